/**
 * Minimal deterministic SVG plotting.
 *
 * Hand-rolled on purpose: output must be byte-stable across runs, so
 * coordinates are formatted with fixed precision and nothing (ids,
 * timestamps, random jitter) depends on the environment.
 */

const FONT = "font-family=\"Helvetica, Arial, sans-serif\"";

export const PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

function fmt(x: number): string {
  if (!Number.isFinite(x)) return "0";
  return x.toFixed(2).replace(/\.00$/, "").replace(/(\.\d)0$/, "$1");
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Round-ish tick positions covering [lo, hi]. */
export function ticks(lo: number, hi: number, target = 5): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const span = hi - lo;
  const step0 = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  let step = mag;
  for (const m of [1, 2, 2.5, 5, 10]) {
    if (m * mag >= step0) {
      step = m * mag;
      break;
    }
  }
  const out: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step) {
    out.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return out;
}

function tickLabel(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.01) return v.toExponential(0);
  return String(Math.round(v * 1000) / 1000);
}

export interface PanelOptions {
  x: number;
  y: number;
  width: number;
  height: number;
  xRange: [number, number];
  yRange: [number, number];
  title?: string;
  xLabel?: string;
  yLabel?: string;
}

/** One set of axes at a fixed position inside the figure. */
export class Panel {
  private parts: string[] = [];
  constructor(public readonly opt: PanelOptions) {}

  px(x: number): number {
    const [lo, hi] = this.opt.xRange;
    const t = hi > lo ? (x - lo) / (hi - lo) : 0.5;
    return this.opt.x + t * this.opt.width;
  }

  py(y: number): number {
    const [lo, hi] = this.opt.yRange;
    const t = hi > lo ? (y - lo) / (hi - lo) : 0.5;
    return this.opt.y + this.opt.height - t * this.opt.height;
  }

  line(xs: number[], ys: number[], color: string, width = 1.3, dash = ""): void {
    const pts: string[] = [];
    for (let i = 0; i < xs.length; i++) {
      if (Number.isFinite(xs[i]) && Number.isFinite(ys[i])) {
        pts.push(`${fmt(this.px(xs[i]))},${fmt(this.py(ys[i]))}`);
      }
    }
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<polyline fill="none" stroke="${color}" stroke-width="${width}"${dashAttr} points="${pts.join(" ")}"/>`,
    );
  }

  points(xs: number[], ys: number[], color: string, r = 2.5): void {
    for (let i = 0; i < xs.length; i++) {
      this.parts.push(
        `<circle cx="${fmt(this.px(xs[i]))}" cy="${fmt(this.py(ys[i]))}" r="${r}" fill="${color}"/>`,
      );
    }
  }

  errorBars(xs: number[], ys: number[], errs: number[], color: string): void {
    for (let i = 0; i < xs.length; i++) {
      const x = fmt(this.px(xs[i]));
      const lo = fmt(this.py(ys[i] - errs[i]));
      const hi = fmt(this.py(ys[i] + errs[i]));
      this.parts.push(`<line x1="${x}" y1="${lo}" x2="${x}" y2="${hi}" stroke="${color}" stroke-width="1"/>`);
    }
  }

  hline(y: number, color: string, dash = "6,3"): void {
    this.parts.push(
      `<line x1="${fmt(this.opt.x)}" y1="${fmt(this.py(y))}" x2="${fmt(this.opt.x + this.opt.width)}" ` +
        `y2="${fmt(this.py(y))}" stroke="${color}" stroke-dasharray="${dash}" stroke-width="1.2"/>`,
    );
  }

  /** Filled histogram steps from bin edges and densities. */
  steps(left: number[], right: number[], density: number[], color: string): void {
    const base = this.py(Math.max(this.opt.yRange[0], 0));
    const pts: string[] = [`${fmt(this.px(left[0]))},${fmt(base)}`];
    for (let i = 0; i < density.length; i++) {
      const y = fmt(this.py(density[i]));
      pts.push(`${fmt(this.px(left[i]))},${y}`);
      pts.push(`${fmt(this.px(right[i]))},${y}`);
    }
    pts.push(`${fmt(this.px(right[right.length - 1]))},${fmt(base)}`);
    this.parts.push(
      `<polyline fill="${color}" fill-opacity="0.25" stroke="${color}" stroke-width="1" points="${pts.join(" ")}"/>`,
    );
  }

  render(): string {
    const { x, y, width, height, xRange, yRange, title, xLabel, yLabel } = this.opt;
    const out: string[] = [];
    out.push(`<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(width)}" height="${fmt(height)}" fill="none" stroke="#333" stroke-width="1"/>`);
    for (const t of ticks(xRange[0], xRange[1])) {
      const tx = fmt(this.px(t));
      out.push(`<line x1="${tx}" y1="${fmt(y + height)}" x2="${tx}" y2="${fmt(y + height + 4)}" stroke="#333"/>`);
      out.push(`<text x="${tx}" y="${fmt(y + height + 15)}" font-size="10" text-anchor="middle" ${FONT}>${tickLabel(t)}</text>`);
    }
    for (const t of ticks(yRange[0], yRange[1])) {
      const ty = fmt(this.py(t));
      out.push(`<line x1="${fmt(x - 4)}" y1="${ty}" x2="${fmt(x)}" y2="${ty}" stroke="#333"/>`);
      out.push(`<text x="${fmt(x - 6)}" y="${fmt(Number(ty) + 3)}" font-size="10" text-anchor="end" ${FONT}>${tickLabel(t)}</text>`);
    }
    if (title) {
      out.push(`<text x="${fmt(x + width / 2)}" y="${fmt(y - 6)}" font-size="12" text-anchor="middle" ${FONT}>${esc(title)}</text>`);
    }
    if (xLabel) {
      out.push(`<text x="${fmt(x + width / 2)}" y="${fmt(y + height + 30)}" font-size="11" text-anchor="middle" ${FONT}>${esc(xLabel)}</text>`);
    }
    if (yLabel) {
      const lx = fmt(x - 38);
      const ly = fmt(y + height / 2);
      out.push(`<text x="${lx}" y="${ly}" font-size="11" text-anchor="middle" ${FONT} transform="rotate(-90 ${lx} ${ly})">${esc(yLabel)}</text>`);
    }
    out.push(...this.parts);
    return out.join("\n");
  }
}

export interface LegendEntry {
  label: string;
  color: string;
  dash?: string;
}

export class Figure {
  private panels: Panel[] = [];
  private extras: string[] = [];
  constructor(public readonly width: number, public readonly height: number) {}

  panel(opt: PanelOptions): Panel {
    const p = new Panel(opt);
    this.panels.push(p);
    return p;
  }

  legend(x: number, y: number, entries: LegendEntry[]): void {
    entries.forEach((e, i) => {
      const ly = y + 14 * i;
      const dashAttr = e.dash ? ` stroke-dasharray="${e.dash}"` : "";
      this.extras.push(`<line x1="${fmt(x)}" y1="${fmt(ly)}" x2="${fmt(x + 18)}" y2="${fmt(ly)}" stroke="${e.color}" stroke-width="2"${dashAttr}/>`);
      this.extras.push(`<text x="${fmt(x + 23)}" y="${fmt(ly + 3.5)}" font-size="10" ${FONT}>${esc(e.label)}</text>`);
    });
  }

  render(): string {
    const body = [...this.panels.map((p) => p.render()), ...this.extras].join("\n");
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" ` +
      `viewBox="0 0 ${this.width} ${this.height}">\n<rect width="100%" height="100%" fill="white"/>\n${body}\n</svg>\n`
    );
  }
}

/** Padded data range for axis limits. */
export function range(values: number[][], pad = 0.05): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const arr of values) {
    for (const v of arr) {
      if (Number.isFinite(v)) {
        lo = Math.min(lo, v);
        hi = Math.max(hi, v);
      }
    }
  }
  if (!(hi > lo)) {
    return [lo - 1, hi + 1];
  }
  const span = hi - lo;
  return [lo - pad * span, hi + pad * span];
}
