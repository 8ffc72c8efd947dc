/**
 * Browser entry point: wires the controls, curve editors and preview
 * pane to the compositing service.  All rendering happens server-side;
 * this module only uploads assets and requests previews.
 */

import { ApiError, AssetInfo, ShapecompClient } from "./api.js";
import { CurveEditor } from "./curve_editor.js";
import { Curve } from "./curves.js";
import { BlendOp, BLEND_OPS, CompositeParams, defaultParams, validateParams } from "./params.js";
import { PreviewScheduler } from "./scheduler.js";

const FIXTURE_SIZE = 256;

function apiBase(): string {
  const q = new URLSearchParams(window.location.search).get("api");
  return q ?? "http://127.0.0.1:8000";
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  cls?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** Procedural fallback assets so the page works with no files at hand. */
function makeCheckerPng(size: number, cell: number): Promise<Blob> {
  const canvas = document.createElement("canvas");
  canvas.width = size;
  canvas.height = size;
  const ctx = canvas.getContext("2d");
  if (ctx === null) return Promise.reject(new Error("no 2d context"));
  for (let y = 0; y < size; y += cell) {
    for (let x = 0; x < size; x += cell) {
      const on = ((x / cell) | 0) % 2 === ((y / cell) | 0) % 2;
      ctx.fillStyle = on ? "#d25a3c" : "#28788c";
      ctx.fillRect(x, y, cell, cell);
    }
  }
  return canvasPng(canvas);
}

function makeGradientPng(size: number): Promise<Blob> {
  const canvas = document.createElement("canvas");
  canvas.width = size;
  canvas.height = size;
  const ctx = canvas.getContext("2d");
  if (ctx === null) return Promise.reject(new Error("no 2d context"));
  const grad = ctx.createLinearGradient(0, 0, size, size);
  grad.addColorStop(0, "#0b1026");
  grad.addColorStop(0.55, "#4868a8");
  grad.addColorStop(1, "#ffe9c0");
  ctx.fillStyle = grad;
  ctx.fillRect(0, 0, size, size);
  return canvasPng(canvas);
}

function canvasPng(canvas: HTMLCanvasElement): Promise<Blob> {
  return new Promise((resolve, reject) => {
    canvas.toBlob((blob) => {
      if (blob === null) reject(new Error("canvas encode failed"));
      else resolve(blob);
    }, "image/png");
  });
}

interface SliderSpec {
  key: "a" | "w" | "alphaG" | "gloss" | "translucencyGain";
  label: string;
  min: number;
  max: number;
  step: number;
}

const SLIDERS: readonly SliderSpec[] = [
  { key: "a", label: "refraction strength (a)", min: -1, max: 1, step: 0.01 },
  { key: "w", label: "slope scale (w)", min: 0.01, max: 1, step: 0.01 },
  { key: "alphaG", label: "global opacity", min: 0, max: 1, step: 0.01 },
  { key: "gloss", label: "gloss", min: 0, max: 1, step: 0.01 },
  { key: "translucencyGain", label: "translucency gain", min: 0, max: 8, step: 0.05 },
];

class App {
  private readonly client = new ShapecompClient(apiBase());
  private readonly params: CompositeParams = defaultParams();
  private readonly assets: { shape?: AssetInfo; bg?: AssetInfo; fg?: AssetInfo; env?: AssetInfo } =
    {};
  private scheduler!: PreviewScheduler<CompositeParams, Blob>;
  private previewMaxDim = 512;
  private shapeSrgb = false;
  private dFromZ = false;

  private readonly status: HTMLElement;
  private readonly preview: HTMLImageElement;
  private previewUrl: string | null = null;
  private negEditor!: CurveEditor;
  private posEditor!: CurveEditor;
  private renderStart = 0;

  constructor(private readonly root: HTMLElement) {
    this.status = el("div", "status", "connecting…");
    this.preview = el("img", "preview");
    this.preview.alt = "composite preview";
  }

  async start(): Promise<void> {
    this.scheduler = new PreviewScheduler({
      send: (p) => this.renderOnce(p),
      onResult: (blob) => this.showPreview(blob),
      onError: (err) => this.showError(err),
      delayMs: 150,
    });
    this.buildLayout();
    try {
      const d = await this.client.defaults();
      Object.assign(this.params, d.params);
      this.previewMaxDim = d.previewMaxDim;
      this.negEditor.setCurve(this.params.curveNeg);
      this.posEditor.setCurve(this.params.curvePos);
      this.syncControls();
      await this.loadDefaultAssets();
      this.scheduler.flush({ ...this.params });
    } catch (err) {
      this.showError(err);
    }
  }

  private buildLayout(): void {
    const header = el("header");
    header.append(el("h1", "", "shape-map compositor"), this.status);

    const assets = el("section", "panel");
    assets.append(el("h2", "", "inputs"));
    assets.append(
      this.assetRow("shape", "shape map", true),
      this.assetRow("bg", "background", false),
      this.assetRow("env", "environment", false),
      this.assetRow("fg", "foreground", false),
    );
    const flags = el("div", "row");
    flags.append(
      this.checkbox("decode shape as sRGB", (v) => {
        this.shapeSrgb = v;
        this.kick(false);
      }),
      this.checkbox("derive thickness from height", (v) => {
        this.dFromZ = v;
        this.kick(false);
      }),
    );
    assets.append(flags);

    const controls = el("section", "panel");
    controls.append(el("h2", "", "optics"));
    for (const spec of SLIDERS) controls.append(this.sliderRow(spec));
    controls.append(this.offsetRow());
    const toggles = el("div", "row");
    toggles.append(
      this.checkbox("mirror", (v) => {
        this.params.mirror = v;
        this.kick(false);
      }),
      this.checkbox("tileable environment", (v) => {
        this.params.envTileable = v;
        this.kick(false);
      }),
      this.blendSelect(),
    );
    controls.append(toggles);
    controls.append(this.curvesRow());

    const previewPane = el("section", "panel preview-pane");
    previewPane.append(el("h2", "", "preview"), this.preview);

    const columns = el("div", "columns");
    const left = el("div", "column");
    left.append(assets, controls);
    columns.append(left, previewPane);
    this.root.append(header, columns);
  }

  private assetRow(slot: "shape" | "bg" | "fg" | "env", label: string, fixtures: boolean): HTMLElement {
    const row = el("div", "row asset-row");
    row.append(el("label", "", label));
    const info = el("span", "asset-info", "—");
    const input = el("input");
    input.type = "file";
    input.accept = "image/png";
    input.addEventListener("change", async () => {
      const file = input.files?.[0];
      if (!file) return;
      await this.uploadTo(slot, file, info, file.name);
    });
    row.append(input);
    if (fixtures) {
      for (const kind of ["sphere", "rotation", "flat"]) {
        const btn = el("button", "", kind);
        btn.addEventListener("click", async () => {
          try {
            const blob = await this.client.fetchFixture(kind, FIXTURE_SIZE);
            await this.uploadTo(slot, blob, info, `${kind} ${FIXTURE_SIZE}`);
          } catch (err) {
            this.showError(err);
          }
        });
        row.append(btn);
      }
    }
    row.append(info);
    return row;
  }

  private async uploadTo(
    slot: "shape" | "bg" | "fg" | "env",
    data: Blob,
    info: HTMLElement,
    name: string,
  ): Promise<void> {
    try {
      const asset = await this.client.uploadAsset(data);
      this.assets[slot] = asset;
      info.textContent = `${name} (${asset.width}×${asset.height})`;
      this.kick(false);
    } catch (err) {
      this.showError(err);
    }
  }

  private sliderRow(spec: SliderSpec): HTMLElement {
    const row = el("div", "row");
    const label = el("label", "", spec.label);
    const value = el("span", "value");
    const input = el("input");
    input.type = "range";
    input.min = String(spec.min);
    input.max = String(spec.max);
    input.step = String(spec.step);
    input.value = String(this.params[spec.key]);
    input.dataset["param"] = spec.key;
    value.textContent = input.value;
    input.addEventListener("input", () => {
      this.params[spec.key] = Number(input.value);
      value.textContent = input.value;
      this.kick(true);
    });
    input.addEventListener("change", () => this.kick(false));
    row.append(label, input, value);
    return row;
  }

  private offsetRow(): HTMLElement {
    const row = el("div", "row");
    row.append(el("label", "", "light offset"));
    for (const axis of [0, 1] as const) {
      const input = el("input");
      input.type = "range";
      input.min = "-0.5";
      input.max = "0.5";
      input.step = "0.01";
      input.value = String(this.params.lightOffset[axis]);
      input.dataset["param"] = `lightOffset${axis}`;
      input.addEventListener("input", () => {
        this.params.lightOffset[axis] = Number(input.value);
        this.kick(true);
      });
      input.addEventListener("change", () => this.kick(false));
      row.append(input);
    }
    return row;
  }

  private checkbox(label: string, onToggle: (v: boolean) => void): HTMLElement {
    const wrap = el("label", "check");
    const input = el("input");
    input.type = "checkbox";
    input.addEventListener("change", () => onToggle(input.checked));
    wrap.append(input, document.createTextNode(label));
    return wrap;
  }

  private blendSelect(): HTMLElement {
    const wrap = el("label", "check", "blend ");
    const select = el("select");
    for (const op of BLEND_OPS) {
      const opt = el("option", "", op);
      opt.value = op;
      select.append(opt);
    }
    select.value = this.params.blendOp;
    select.addEventListener("change", () => {
      this.params.blendOp = select.value as BlendOp;
      this.kick(false);
    });
    wrap.append(select);
    return wrap;
  }

  private curvesRow(): HTMLElement {
    const row = el("div", "row curves");
    const make = (label: string, key: "curveNeg" | "curvePos"): HTMLCanvasElement => {
      const canvas = el("canvas");
      canvas.width = 220;
      canvas.height = 160;
      const editor = new CurveEditor(canvas, this.params[key], {
        label,
        onChange: (curve: Curve, dragging: boolean) => {
          this.params[key] = curve;
          this.kick(dragging);
        },
      });
      if (key === "curveNeg") this.negEditor = editor;
      else this.posEditor = editor;
      return canvas;
    };
    row.append(make("reflectance, a ≤ 0", "curveNeg"), make("reflectance, a ≥ 0", "curvePos"));
    return row;
  }

  private syncControls(): void {
    for (const input of this.root.querySelectorAll<HTMLInputElement>("input[type=range]")) {
      const key = input.dataset["param"];
      if (!key) continue;
      if (key === "lightOffset0") input.value = String(this.params.lightOffset[0]);
      else if (key === "lightOffset1") input.value = String(this.params.lightOffset[1]);
      else input.value = String(this.params[key as SliderSpec["key"]]);
      const value = input.parentElement?.querySelector(".value");
      if (value) value.textContent = input.value;
    }
  }

  private async loadDefaultAssets(): Promise<void> {
    const [sphere, checker, grad] = await Promise.all([
      this.client.fetchFixture("sphere", FIXTURE_SIZE),
      makeCheckerPng(FIXTURE_SIZE, 32),
      makeGradientPng(FIXTURE_SIZE),
    ]);
    this.assets.shape = await this.client.uploadAsset(sphere);
    this.assets.bg = await this.client.uploadAsset(checker);
    this.assets.env = await this.client.uploadAsset(grad);
    const rows = this.root.querySelectorAll(".asset-info");
    rows[0].textContent = `sphere ${FIXTURE_SIZE}`;
    rows[1].textContent = `checker ${FIXTURE_SIZE}`;
    rows[2].textContent = `gradient ${FIXTURE_SIZE}`;
  }

  /** Schedules a preview; `dragging` keeps it debounced mid-gesture. */
  private kick(dragging: boolean): void {
    const problems = validateParams(this.params);
    if (problems.length > 0) {
      this.status.textContent = problems[0];
      return;
    }
    const snapshot: CompositeParams = {
      ...this.params,
      lightOffset: [...this.params.lightOffset],
      curveNeg: this.params.curveNeg.map((k) => [...k] as [number, number]),
      curvePos: this.params.curvePos.map((k) => [...k] as [number, number]),
    };
    if (dragging) this.scheduler.request(snapshot);
    else this.scheduler.flush(snapshot);
  }

  private async renderOnce(p: CompositeParams): Promise<Blob> {
    if (!this.assets.shape || !this.assets.bg) {
      throw new Error("need a shape map and a background first");
    }
    this.renderStart = performance.now();
    this.status.textContent = "rendering…";
    return this.client.composite({
      shape: this.assets.shape.id,
      bg: this.assets.bg.id,
      fg: this.assets.fg?.id,
      env: this.assets.env?.id,
      params: p,
      shapeSrgb: this.shapeSrgb,
      dFromZ: this.dFromZ,
      previewMaxDim: this.previewMaxDim,
    });
  }

  private showPreview(blob: Blob): void {
    const ms = Math.round(performance.now() - this.renderStart);
    const url = URL.createObjectURL(blob);
    if (this.previewUrl !== null) URL.revokeObjectURL(this.previewUrl);
    this.previewUrl = url;
    this.preview.src = url;
    this.status.textContent = `rendered in ${ms} ms`;
  }

  private showError(err: unknown): void {
    if (err instanceof ApiError) {
      this.status.textContent = `error ${err.status}: ${err.detail}`;
    } else {
      this.status.textContent = err instanceof Error ? err.message : String(err);
    }
  }
}

const mount = document.getElementById("app");
if (mount !== null) {
  void new App(mount).start();
}
