/**
 * Reflectivity curve model: a piecewise-linear map from incident angle
 * (t in [0, 1], 0 = head-on) to reflectivity (f in [0, 1]).
 *
 * Knots are [t, f] pairs sorted by strictly ascending t, pinned to
 * t = 0 at the start and t = 1 at the end — the same wire format the
 * service accepts.  All editing helpers are pure: they return a new
 * curve and never mutate their input.
 */

export type Knot = readonly [number, number];
export type Curve = readonly Knot[];

/** Minimum horizontal gap kept between neighboring knots. */
export const MIN_KNOT_GAP = 1e-3;

export function validateCurve(curve: Curve): string | null {
  if (curve.length < 2) return "curve needs at least two knots";
  for (const knot of curve) {
    const [t, f] = knot;
    if (!Number.isFinite(t) || !Number.isFinite(f)) {
      return "knot coordinates must be finite";
    }
    if (f < 0 || f > 1) return "reflectivity must lie in [0, 1]";
  }
  if (curve[0][0] !== 0) return "first knot must sit at t = 0";
  if (curve[curve.length - 1][0] !== 1) return "last knot must sit at t = 1";
  for (let i = 1; i < curve.length; i++) {
    if (curve[i][0] <= curve[i - 1][0]) {
      return "knots must have strictly ascending t";
    }
  }
  return null;
}

/** Piecewise-linear evaluation; t outside [0, 1] clamps to the ends. */
export function evalCurve(curve: Curve, t: number): number {
  if (t <= curve[0][0]) return curve[0][1];
  const last = curve[curve.length - 1];
  if (t >= last[0]) return last[1];
  for (let i = 1; i < curve.length; i++) {
    const [t1, f1] = curve[i];
    if (t <= t1) {
      const [t0, f0] = curve[i - 1];
      const s = (t - t0) / (t1 - t0);
      return f0 + s * (f1 - f0);
    }
  }
  return last[1];
}

const clamp01 = (v: number) => Math.min(1, Math.max(0, v));

/**
 * Insert a knot near (t, f).  The time lands strictly between its
 * would-be neighbors; if the segment has no room the curve is returned
 * unchanged.
 */
export function addKnot(curve: Curve, t: number, f: number): Curve {
  let after = 0;
  while (after < curve.length && curve[after][0] < t) after++;
  // neighbors in the existing curve (insertion goes between them)
  const lo = after === 0 ? 0 : curve[after - 1][0];
  const hi = after >= curve.length ? 1 : curve[after][0];
  if (hi - lo < 2 * MIN_KNOT_GAP) return curve;
  const tc = Math.min(hi - MIN_KNOT_GAP, Math.max(lo + MIN_KNOT_GAP, t));
  const next = curve.slice();
  next.splice(after, 0, [tc, clamp01(f)]);
  return next;
}

/**
 * Move knot `index` toward (t, f).  End knots keep their pinned time;
 * interior knots stay strictly between their neighbors.
 */
export function moveKnot(curve: Curve, index: number, t: number, f: number): Curve {
  if (index < 0 || index >= curve.length) return curve;
  let tc: number;
  if (index === 0) {
    tc = 0;
  } else if (index === curve.length - 1) {
    tc = 1;
  } else {
    const lo = curve[index - 1][0] + MIN_KNOT_GAP;
    const hi = curve[index + 1][0] - MIN_KNOT_GAP;
    tc = Math.min(hi, Math.max(lo, t));
  }
  const next = curve.slice();
  next[index] = [tc, clamp01(f)];
  return next;
}

/** Remove an interior knot; end knots and two-knot curves are kept. */
export function deleteKnot(curve: Curve, index: number): Curve {
  if (index <= 0 || index >= curve.length - 1) return curve;
  if (curve.length <= 2) return curve;
  const next = curve.slice();
  next.splice(index, 1);
  return next;
}

/** Deep copy into the plain mutable arrays the JSON body expects. */
export function curveToJson(curve: Curve): number[][] {
  return curve.map(([t, f]) => [t, f]);
}
