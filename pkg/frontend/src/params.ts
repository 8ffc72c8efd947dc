/**
 * Composite parameter model mirroring the service's JSON schema, plus
 * client-side validation that reproduces the server's rules so bad
 * values are caught before a request leaves the browser.
 */

import { Curve, validateCurve } from "./curves.js";

export type BlendOp = "shape" | "over" | "multiply" | "add";

export const BLEND_OPS: readonly BlendOp[] = ["shape", "over", "multiply", "add"];

export interface CompositeParams {
  a: number;
  w: number;
  alphaG: number;
  gloss: number;
  translucencyGain: number;
  lightOffset: [number, number];
  mirror: boolean;
  envTileable: boolean;
  blendOp: BlendOp;
  curveNeg: Curve;
  curvePos: Curve;
}

/** Built-in defaults; the live values come from GET /defaults. */
export function defaultParams(): CompositeParams {
  return {
    a: 0.5,
    w: 0.5,
    alphaG: 1.0,
    gloss: 0.0,
    translucencyGain: 0.0,
    lightOffset: [0, 0],
    mirror: false,
    envTileable: false,
    blendOp: "shape",
    curveNeg: [
      [0, 0.04],
      [0.5, 0.5],
      [1, 1],
    ],
    curvePos: [
      [0, 0.04],
      [0.7, 0.12],
      [1, 1],
    ],
  };
}

/**
 * Refraction strength from a relative index of refraction:
 * log2(eta) clamped to [-1, 1].  Throws on eta <= 0.
 */
export function etaToStrength(eta: number): number {
  if (!Number.isFinite(eta) || eta <= 0) {
    throw new RangeError("eta must be > 0");
  }
  return Math.min(1, Math.max(-1, Math.log2(eta)));
}

function inRange(v: number, lo: number, hi: number): boolean {
  return Number.isFinite(v) && v >= lo && v <= hi;
}

/**
 * Same rules the service enforces; each message starts with the field
 * name so the form can mark the offending control.
 */
export function validateParams(p: CompositeParams): string[] {
  const errors: string[] = [];
  if (!inRange(p.a, -1, 1)) errors.push("a: must lie in [-1, 1]");
  if (!Number.isFinite(p.w) || p.w <= 0 || p.w > 1) {
    errors.push("w: must lie in (0, 1]");
  }
  if (!inRange(p.alphaG, 0, 1)) errors.push("alphaG: must lie in [0, 1]");
  if (!inRange(p.gloss, 0, 1)) errors.push("gloss: must lie in [0, 1]");
  if (!Number.isFinite(p.translucencyGain) || p.translucencyGain < 0) {
    errors.push("translucencyGain: must be >= 0");
  }
  if (
    p.lightOffset.length !== 2 ||
    !inRange(p.lightOffset[0], -0.5, 0.5) ||
    !inRange(p.lightOffset[1], -0.5, 0.5)
  ) {
    errors.push("lightOffset: components must lie in [-0.5, 0.5]");
  }
  if (!BLEND_OPS.includes(p.blendOp)) {
    errors.push(`blendOp: must be one of ${BLEND_OPS.join(", ")}`);
  }
  const neg = validateCurve(p.curveNeg);
  if (neg !== null) errors.push(`curveNeg: ${neg}`);
  const pos = validateCurve(p.curvePos);
  if (pos !== null) errors.push(`curvePos: ${pos}`);
  return errors;
}
