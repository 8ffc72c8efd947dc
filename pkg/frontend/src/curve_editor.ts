/**
 * Canvas widget for editing a piecewise-linear response curve.
 *
 * Drag a knot to move it, double-click empty space to add one,
 * alt-click a knot to delete it.  End knots stay pinned to t=0 and t=1.
 */

import { Curve, addKnot, deleteKnot, evalCurve, moveKnot } from "./curves.js";

const KNOT_RADIUS = 5;
const HIT_RADIUS = 9;
const PAD = 8;

export interface CurveEditorOptions {
  /** Called on every edit; `dragging` is true mid-drag. */
  onChange: (curve: Curve, dragging: boolean) => void;
  label?: string;
}

export class CurveEditor {
  private readonly canvas: HTMLCanvasElement;
  private readonly onChange: (curve: Curve, dragging: boolean) => void;
  private readonly label: string;
  private curve: Curve;
  private dragIndex = -1;

  constructor(canvas: HTMLCanvasElement, curve: Curve, opts: CurveEditorOptions) {
    this.canvas = canvas;
    this.curve = curve;
    this.onChange = opts.onChange;
    this.label = opts.label ?? "";
    canvas.addEventListener("pointerdown", (e) => this.onDown(e));
    canvas.addEventListener("pointermove", (e) => this.onMove(e));
    canvas.addEventListener("pointerup", (e) => this.onUp(e));
    canvas.addEventListener("dblclick", (e) => this.onDouble(e));
    this.draw();
  }

  get value(): Curve {
    return this.curve;
  }

  /** Replaces the curve without firing onChange (e.g. loading defaults). */
  setCurve(curve: Curve): void {
    this.curve = curve;
    this.dragIndex = -1;
    this.draw();
  }

  private plotRect(): { x: number; y: number; w: number; h: number } {
    return {
      x: PAD,
      y: PAD,
      w: this.canvas.width - 2 * PAD,
      h: this.canvas.height - 2 * PAD,
    };
  }

  private toCanvas(t: number, f: number): [number, number] {
    const r = this.plotRect();
    return [r.x + t * r.w, r.y + (1 - f) * r.h];
  }

  private fromEvent(e: MouseEvent): [number, number] {
    const rect = this.canvas.getBoundingClientRect();
    const r = this.plotRect();
    const px = ((e.clientX - rect.left) * this.canvas.width) / rect.width;
    const py = ((e.clientY - rect.top) * this.canvas.height) / rect.height;
    return [(px - r.x) / r.w, 1 - (py - r.y) / r.h];
  }

  private hitTest(e: MouseEvent): number {
    const rect = this.canvas.getBoundingClientRect();
    const px = ((e.clientX - rect.left) * this.canvas.width) / rect.width;
    const py = ((e.clientY - rect.top) * this.canvas.height) / rect.height;
    for (let i = 0; i < this.curve.length; i++) {
      const [cx, cy] = this.toCanvas(this.curve[i][0], this.curve[i][1]);
      if (Math.hypot(px - cx, py - cy) <= HIT_RADIUS) return i;
    }
    return -1;
  }

  private onDown(e: PointerEvent): void {
    const hit = this.hitTest(e);
    if (hit < 0) return;
    if (e.altKey) {
      const next = deleteKnot(this.curve, hit);
      if (next !== this.curve) {
        this.curve = next;
        this.draw();
        this.onChange(this.curve, false);
      }
      return;
    }
    this.dragIndex = hit;
    this.canvas.setPointerCapture(e.pointerId);
  }

  private onMove(e: PointerEvent): void {
    if (this.dragIndex < 0) return;
    const [t, f] = this.fromEvent(e);
    this.curve = moveKnot(this.curve, this.dragIndex, t, f);
    this.draw();
    this.onChange(this.curve, true);
  }

  private onUp(e: PointerEvent): void {
    if (this.dragIndex < 0) return;
    this.dragIndex = -1;
    this.canvas.releasePointerCapture(e.pointerId);
    this.draw();
    this.onChange(this.curve, false);
  }

  private onDouble(e: MouseEvent): void {
    if (this.hitTest(e) >= 0) return;
    const [t, f] = this.fromEvent(e);
    const next = addKnot(this.curve, t, f);
    if (next !== this.curve) {
      this.curve = next;
      this.draw();
      this.onChange(this.curve, false);
    }
  }

  private draw(): void {
    const ctx = this.canvas.getContext("2d");
    if (ctx === null) return;
    const { width, height } = this.canvas;
    const r = this.plotRect();
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#1c1f26";
    ctx.fillRect(0, 0, width, height);

    ctx.strokeStyle = "#343945";
    ctx.lineWidth = 1;
    ctx.strokeRect(r.x, r.y, r.w, r.h);
    ctx.beginPath();
    for (const q of [0.25, 0.5, 0.75]) {
      ctx.moveTo(r.x + q * r.w, r.y);
      ctx.lineTo(r.x + q * r.w, r.y + r.h);
      ctx.moveTo(r.x, r.y + q * r.h);
      ctx.lineTo(r.x + r.w, r.y + q * r.h);
    }
    ctx.stroke();

    ctx.strokeStyle = "#7fb4ff";
    ctx.lineWidth = 2;
    ctx.beginPath();
    const steps = Math.max(2, Math.floor(r.w));
    for (let i = 0; i <= steps; i++) {
      const t = i / steps;
      const [cx, cy] = this.toCanvas(t, evalCurve(this.curve, t));
      if (i === 0) ctx.moveTo(cx, cy);
      else ctx.lineTo(cx, cy);
    }
    ctx.stroke();

    for (let i = 0; i < this.curve.length; i++) {
      const [cx, cy] = this.toCanvas(this.curve[i][0], this.curve[i][1]);
      ctx.beginPath();
      ctx.arc(cx, cy, KNOT_RADIUS, 0, 2 * Math.PI);
      ctx.fillStyle = i === this.dragIndex ? "#ffd479" : "#e8ecf4";
      ctx.fill();
    }

    if (this.label) {
      ctx.fillStyle = "#9aa3b2";
      ctx.font = "11px system-ui, sans-serif";
      ctx.fillText(this.label, r.x + 4, r.y + 13);
    }
  }
}
