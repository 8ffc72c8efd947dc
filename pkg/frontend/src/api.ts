/**
 * Thin fetch client for the compositing service.  All traffic goes
 * through the service's HTTP endpoints; nothing here reaches into the
 * renderer directly.
 */

import { CompositeParams } from "./params.js";

export interface AssetInfo {
  id: string;
  width: number;
  height: number;
}

export interface ServiceDefaults {
  params: CompositeParams;
  previewMaxDim: number;
  maxUploadBytes: number;
  blendOps: string[];
  classicOps: string[];
  fixtureKinds: string[];
}

export interface CompositeRequest {
  shape: string;
  bg: string;
  fg?: string;
  env?: string;
  params?: Partial<CompositeParams>;
  shapeSrgb?: boolean;
  dFromZ?: boolean;
  previewMaxDim?: number;
}

/** Error with the HTTP status and the server's detail message, if any. */
export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
    this.detail = detail;
  }
}

async function errorFrom(res: Response): Promise<ApiError> {
  let detail = res.statusText || `status ${res.status}`;
  try {
    const body = await res.json();
    if (typeof body?.detail === "string") {
      detail = body.detail;
    } else if (Array.isArray(body?.detail)) {
      // Validation errors arrive as a list of {loc, msg} entries.
      detail = body.detail
        .map((d: { loc?: unknown[]; msg?: string }) => {
          const loc = Array.isArray(d.loc) ? d.loc.slice(1).join(".") : "";
          return loc ? `${loc}: ${d.msg ?? ""}` : d.msg ?? "";
        })
        .join("; ");
    }
  } catch {
    // Non-JSON body: keep the status text.
  }
  return new ApiError(res.status, detail);
}

export class ShapecompClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  async defaults(): Promise<ServiceDefaults> {
    const res = await fetch(`${this.baseUrl}/defaults`);
    if (!res.ok) throw await errorFrom(res);
    return (await res.json()) as ServiceDefaults;
  }

  /** Uploads PNG bytes; returns the content-addressed asset handle. */
  async uploadAsset(data: Blob | ArrayBuffer | Uint8Array): Promise<AssetInfo> {
    const body = data instanceof Blob ? data : new Blob([data as BlobPart]);
    const res = await fetch(`${this.baseUrl}/assets`, {
      method: "POST",
      headers: { "Content-Type": "application/octet-stream" },
      body,
    });
    if (!res.ok) throw await errorFrom(res);
    return (await res.json()) as AssetInfo;
  }

  /** Renders a composite; resolves to the PNG bytes. */
  async composite(req: CompositeRequest): Promise<Blob> {
    const res = await fetch(`${this.baseUrl}/composite`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
    if (!res.ok) throw await errorFrom(res);
    return await res.blob();
  }

  fixtureUrl(kind: string, size: number): string {
    return `${this.baseUrl}/fixtures/${encodeURIComponent(kind)}?size=${size}`;
  }

  /** Downloads a generated shape-map fixture as PNG bytes. */
  async fetchFixture(kind: string, size: number): Promise<Blob> {
    const res = await fetch(this.fixtureUrl(kind, size));
    if (!res.ok) throw await errorFrom(res);
    return await res.blob();
  }
}
