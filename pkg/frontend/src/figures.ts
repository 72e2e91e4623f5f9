/**
 * Figure builders: each one maps CSV artifacts from the simulation CLI to a
 * deterministic SVG analogue of one result figure.
 *
 * All numerical content comes from the CSVs (and their `.meta` sidecars for
 * run parameters); the builders only rescale, overlay and, where a figure
 * calls for it, summarize displayed columns (late-time averages, curves drawn
 * from already-fitted parameters). No simulation happens here.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { column, readMeta, readTable, requireColumns, Table } from "./csv.js";
import { Figure, PALETTE, range } from "./svg.js";

export type FigureId =
  | "fig1"
  | "fig2"
  | "fig3"
  | "fig4"
  | "fig5"
  | "fig6"
  | "fig7"
  | "fig8";

export interface FigureSpec {
  figureId: FigureId;
  /** Input CSV paths, figure-specific order (see each builder). */
  inputs: string[];
  /** Output SVG path. */
  output: string;
}

const PANEL = { width: 230, height: 180, top: 40, left: 55, gapX: 70, gapY: 70 };

function grid(figure: Figure, n: number, i: number) {
  const x = PANEL.left + (PANEL.width + PANEL.gapX) * (i % n);
  const y = PANEL.top + (PANEL.height + PANEL.gapY) * Math.floor(i / n);
  return { x, y };
}

function figureShell(cols: number, rows = 1): Figure {
  return new Figure(
    PANEL.left + cols * PANEL.width + (cols - 1) * PANEL.gapX + 25,
    PANEL.top + rows * PANEL.height + (rows - 1) * PANEL.gapY + 45,
  );
}

function metaLabel(csvPath: string, keys: string[]): string {
  const meta = readMeta(csvPath + ".meta");
  const parts: string[] = [];
  for (const key of keys) {
    if (meta.has(key)) {
      parts.push(`${key}=${meta.get(key)}`);
    }
  }
  return parts.length ? parts.join(", ") : path.basename(csvPath, ".csv");
}

function need(spec: FigureSpec, count: number, what: string): void {
  if (spec.inputs.length < count) {
    throw new Error(`${spec.figureId} needs ${what} (${count} input file(s)), got ${spec.inputs.length}`);
  }
}

// ---------------------------------------------------------------------------
// per-figure builders
// ---------------------------------------------------------------------------

/** fig1: unraveling comparison over time (entropy density, entanglement,
 * magnetization), from one unraveling-compare CSV. */
function buildFig1(spec: FigureSpec): Figure {
  need(spec, 1, "an unraveling-compare CSV");
  const t = readTable(spec.inputs[0]);
  const kinds = ["qj", "mu", "qsd"];
  const panels: Array<[string, string]> = [
    ["m2", "entropy density m2"],
    ["ent", "half-cut entanglement"],
    ["mz", "magnetization m_z"],
  ];
  requireColumns(t, ["t", ...kinds.flatMap((k) => panels.map(([q]) => `${k}_${q}_mean`))]);
  const fig = figureShell(3);
  const time = column(t, "t");
  panels.forEach(([q, label], i) => {
    const series = kinds.map((k) => column(t, `${k}_${q}_mean`));
    const { x, y } = grid(fig, 3, i);
    const p = fig.panel({
      x, y, width: PANEL.width, height: PANEL.height,
      xRange: range([time], 0), yRange: range(series),
      title: label, xLabel: "kappa t",
    });
    series.forEach((s, j) => p.line(time, s, PALETTE[j]));
  });
  fig.legend(PANEL.left + 5, 18, kinds.map((k, j) => ({ label: k, color: PALETTE[j] })));
  return fig;
}

/** fig2: mean-field entropy density dynamics, one panel per input
 * meanfield-dynamics CSV (e.g. below, at and above the critical drive). */
function buildFig2(spec: FigureSpec): Figure {
  need(spec, 1, "meanfield-dynamics CSVs");
  const tables = spec.inputs.map(readTable);
  tables.forEach((t) => requireColumns(t, ["t", "m2"]));
  const fig = figureShell(tables.length);
  tables.forEach((t, i) => {
    const { x, y } = grid(fig, tables.length, i);
    const time = column(t, "t");
    const m2 = column(t, "m2");
    const p = fig.panel({
      x, y, width: PANEL.width, height: PANEL.height,
      xRange: range([time], 0), yRange: range([m2]),
      title: metaLabel(t.path, ["omega"]), xLabel: "kappa t",
      yLabel: i === 0 ? "m2" : undefined,
    });
    p.line(time, m2, PALETTE[0]);
  });
  return fig;
}

/** fig3: entropy density across the transition: fixed-point curve and orbit
 * averages (sweep CSV), saturation-fit curve (fit CSV) and the solid-angle
 * limit line (solid-angle CSV). */
function buildFig3(spec: FigureSpec): Figure {
  need(spec, 3, "sweep, fit and solid-angle CSVs");
  const sweep = readTable(spec.inputs[0]);
  requireColumns(sweep, ["omega", "m2_fixed_point", "m2_orbit_mean", "m2_orbit_stderr"]);
  const fit = readTable(spec.inputs[1]);
  requireColumns(fit, ["m2_sat", "alpha", "a"]);
  const solid = readTable(spec.inputs[2]);
  requireColumns(solid, ["value"]);

  const omega = column(sweep, "omega");
  const fp = column(sweep, "m2_fixed_point");
  const orbit = column(sweep, "m2_orbit_mean");
  const err = column(sweep, "m2_orbit_stderr");
  const limit = column(solid, "value")[0];
  const m2sat = column(fit, "m2_sat")[0];
  const alpha = column(fit, "alpha")[0];
  const a = column(fit, "a")[0];

  const fig = new Figure(560, 360);
  const p = fig.panel({
    x: 65, y: 45, width: 460, height: 260,
    xRange: range([omega], 0.02), yRange: range([fp, orbit, [0, limit * 1.15]], 0.05),
    xLabel: "Omega", yLabel: "m2",
  });
  p.line(omega, fp, PALETTE[0]);
  // fitted saturation curve, drawn from the already-fitted parameters
  const omMax = Math.max(...omega);
  const xs: number[] = [];
  const ys: number[] = [];
  for (let i = 0; i <= 400; i++) {
    const om = 1 + (i / 400) * (omMax - 1);
    const u = Math.pow(Math.max(om - 1, 0), alpha);
    xs.push(om);
    ys.push((m2sat * u) / (a + u));
  }
  p.line(xs, ys, "#333", 1.2, "2,3");
  p.hline(limit, PALETTE[3]);
  p.errorBars(omega, orbit, err, PALETTE[1]);
  p.points(omega, orbit, PALETTE[1]);
  fig.legend(390, 270, [
    { label: "fixed point", color: PALETTE[0] },
    { label: "orbit average", color: PALETTE[1] },
    { label: "saturation fit", color: "#333", dash: "2,3" },
    { label: "solid-angle limit", color: PALETTE[3], dash: "6,3" },
  ]);
  return fig;
}

/** fig4: purity of the averaged state over time, one curve per
 * lindblad-dynamics CSV (several system sizes / drives). */
function buildFig4(spec: FigureSpec): Figure {
  need(spec, 1, "lindblad-dynamics CSVs");
  const tables = spec.inputs.map(readTable);
  tables.forEach((t) => requireColumns(t, ["t", "purity"]));
  const fig = new Figure(560, 340);
  const p = fig.panel({
    x: 65, y: 40, width: 460, height: 240,
    xRange: range(tables.map((t) => column(t, "t")), 0),
    yRange: [0, 1.05],
    xLabel: "kappa t", yLabel: "purity",
  });
  tables.forEach((t, i) => p.line(column(t, "t"), column(t, "purity"), PALETTE[i % PALETTE.length]));
  fig.legend(440, 60, tables.map((t, i) => ({
    label: metaLabel(t.path, ["n", "omega"]),
    color: PALETTE[i % PALETTE.length],
  })));
  return fig;
}

/** fig5: steady-state entropy density and purity versus drive, one curve per
 * lindblad-sweep CSV (one file per system size). */
function buildFig5(spec: FigureSpec): Figure {
  need(spec, 1, "lindblad-sweep CSVs");
  const tables = spec.inputs.map(readTable);
  tables.forEach((t) => requireColumns(t, ["omega", "m2", "purity"]));
  const fig = figureShell(2);
  const omRange = range(tables.map((t) => column(t, "omega")), 0.02);
  const panels: Array<[string, string, [number, number]]> = [
    ["m2", "steady-state m2", range(tables.map((t) => column(t, "m2")))],
    ["purity", "steady-state purity", [0, 1.05]],
  ];
  panels.forEach(([col, label, yRange], i) => {
    const { x, y } = grid(fig, 2, i);
    const p = fig.panel({
      x, y, width: PANEL.width, height: PANEL.height,
      xRange: omRange, yRange, title: label, xLabel: "Omega",
    });
    tables.forEach((t, j) => {
      p.line(column(t, "omega"), column(t, col), PALETTE[j % PALETTE.length]);
      p.points(column(t, "omega"), column(t, col), PALETTE[j % PALETTE.length], 2);
    });
  });
  fig.legend(PANEL.left + 5, 18, tables.map((t, j) => ({
    label: metaLabel(t.path, ["n"]),
    color: PALETTE[j % PALETTE.length],
  })));
  return fig;
}

/** fig6: long-time averaged trajectory entropy density versus drive. Inputs:
 * any number of trajectory-ensemble CSVs (one per (N, Omega) run, grouped by
 * the `n` in their sidecars; the late half of each time series is averaged),
 * then optionally one meanfield-sweep CSV for the orbit-average overlay. */
function buildFig6(spec: FigureSpec): Figure {
  need(spec, 1, "trajectory-ensemble CSVs");
  const ensembleInputs: string[] = [];
  let sweep: Table | undefined;
  for (const input of spec.inputs) {
    const t = readTable(input);
    if (t.data.has("m2_orbit_mean")) {
      sweep = t;
    } else {
      ensembleInputs.push(input);
    }
  }
  const groups = new Map<string, { omega: number[]; m2: number[] }>();
  for (const input of ensembleInputs) {
    const t = readTable(input);
    requireColumns(t, ["t", "m2_mean"]);
    const meta = readMeta(input + ".meta");
    const n = meta.get("n") ?? "?";
    const omega = Number(meta.get("omega") ?? "NaN");
    if (Number.isNaN(omega)) {
      throw new Error(`${input}: sidecar with an 'omega' entry is required for fig6`);
    }
    const m2 = column(t, "m2_mean");
    const late = m2.slice(Math.floor(m2.length / 2));
    const avg = late.reduce((s, v) => s + v, 0) / late.length;
    const g = groups.get(n) ?? { omega: [], m2: [] };
    g.omega.push(omega);
    g.m2.push(avg);
    groups.set(n, g);
  }
  const fig = new Figure(560, 360);
  const allOm = [...groups.values()].map((g) => g.omega);
  const allM2 = [...groups.values()].map((g) => g.m2);
  if (sweep) {
    allOm.push(column(sweep, "omega"));
    allM2.push(column(sweep, "m2_orbit_mean"));
  }
  const p = fig.panel({
    x: 65, y: 45, width: 460, height: 260,
    xRange: range(allOm, 0.02), yRange: range(allM2),
    xLabel: "Omega", yLabel: "late-time m2",
  });
  const legend: { label: string; color: string }[] = [];
  [...groups.entries()].sort().forEach(([n, g], j) => {
    const order = g.omega.map((_, i) => i).sort((a, b) => g.omega[a] - g.omega[b]);
    const om = order.map((i) => g.omega[i]);
    const m2 = order.map((i) => g.m2[i]);
    p.line(om, m2, PALETTE[j % PALETTE.length]);
    p.points(om, m2, PALETTE[j % PALETTE.length], 2.5);
    legend.push({ label: `N=${n}`, color: PALETTE[j % PALETTE.length] });
  });
  if (sweep) {
    p.points(column(sweep, "omega"), column(sweep, "m2_orbit_mean"), PALETTE[1], 3);
    legend.push({ label: "mean-field orbit average", color: PALETTE[1] });
  }
  fig.legend(400, 280, legend);
  return fig;
}

/** fig7: single-trajectory dynamics against the averaged state and the
 * mean-field limit. Inputs: single-trajectory ensemble CSVs (traj=1), a
 * lindblad-dynamics CSV, and a meanfield-dynamics CSV, in any order. */
function buildFig7(spec: FigureSpec): Figure {
  need(spec, 2, "trajectory, lindblad-dynamics and meanfield-dynamics CSVs");
  const curves: Array<{ label: string; t: number[]; mz: number[] | null; m2: number[] }> = [];
  for (const input of spec.inputs) {
    const t = readTable(input);
    if (t.data.has("mz_mean")) {
      requireColumns(t, ["t", "mz_mean", "m2_mean"]);
      curves.push({
        label: metaLabel(input, ["unraveling"]),
        t: column(t, "t"), mz: column(t, "mz_mean"), m2: column(t, "m2_mean"),
      });
    } else if (t.data.has("purity")) {
      requireColumns(t, ["t", "m_z", "m2"]);
      curves.push({ label: "averaged state", t: column(t, "t"), mz: column(t, "m_z"), m2: column(t, "m2") });
    } else {
      requireColumns(t, ["t", "m_z", "m2"]);
      curves.push({ label: "mean field", t: column(t, "t"), mz: column(t, "m_z"), m2: column(t, "m2") });
    }
  }
  const fig = figureShell(2);
  const xr = range(curves.map((c) => c.t), 0);
  const pa = fig.panel({
    x: grid(fig, 2, 0).x, y: grid(fig, 2, 0).y, width: PANEL.width, height: PANEL.height,
    xRange: xr, yRange: range(curves.map((c) => c.mz ?? [])),
    title: "magnetization", xLabel: "kappa t",
  });
  const pb = fig.panel({
    x: grid(fig, 2, 1).x, y: grid(fig, 2, 1).y, width: PANEL.width, height: PANEL.height,
    xRange: xr, yRange: range(curves.map((c) => c.m2)),
    title: "entropy density", xLabel: "kappa t",
  });
  curves.forEach((c, j) => {
    if (c.mz) pa.line(c.t, c.mz, PALETTE[j % PALETTE.length]);
    pb.line(c.t, c.m2, PALETTE[j % PALETTE.length]);
  });
  fig.legend(PANEL.left + 5, 18, curves.map((c, j) => ({ label: c.label, color: PALETTE[j % PALETTE.length] })));
  return fig;
}

/** fig8: distributions over the trajectory ensemble at a fixed time: three
 * histogram CSVs (entropy density, entanglement, magnetization), one overlaid
 * step histogram per density column. */
function buildFig8(spec: FigureSpec): Figure {
  need(spec, 3, "histogram CSVs (m2, entanglement, magnetization)");
  const tables = spec.inputs.map(readTable);
  const titles = ["entropy density m2", "half-cut entanglement", "magnetization m_z"];
  const fig = figureShell(3);
  tables.forEach((t, i) => {
    requireColumns(t, ["bin_left", "bin_right"]);
    const densityCols = t.columns.filter((c) => c.startsWith("density_"));
    if (densityCols.length === 0) {
      throw new Error(`${t.path}: no density_* columns`);
    }
    const left = column(t, "bin_left");
    const right = column(t, "bin_right");
    const { x, y } = grid(fig, 3, i);
    const p = fig.panel({
      x, y, width: PANEL.width, height: PANEL.height,
      xRange: range([left, right], 0.02),
      yRange: range(densityCols.map((c) => column(t, c)).concat([[0]]), 0.05),
      title: titles[i] ?? path.basename(t.path), xLabel: "value",
      yLabel: i === 0 ? "probability density" : undefined,
    });
    densityCols.forEach((c, j) => p.steps(left, right, column(t, c), PALETTE[j % PALETTE.length]));
    if (i === 0) {
      fig.legend(PANEL.left + 5, 18, densityCols.map((c, j) => ({
        label: c.replace("density_", ""),
        color: PALETTE[j % PALETTE.length],
      })));
    }
  });
  return fig;
}

const BUILDERS: Record<FigureId, (spec: FigureSpec) => Figure> = {
  fig1: buildFig1,
  fig2: buildFig2,
  fig3: buildFig3,
  fig4: buildFig4,
  fig5: buildFig5,
  fig6: buildFig6,
  fig7: buildFig7,
  fig8: buildFig8,
};

export function isFigureId(id: string): id is FigureId {
  return Object.prototype.hasOwnProperty.call(BUILDERS, id);
}

/** Build one figure and write its SVG; inputs are never modified. */
export function render(spec: FigureSpec): void {
  const figure = BUILDERS[spec.figureId](spec);
  fs.mkdirSync(path.dirname(path.resolve(spec.output)), { recursive: true });
  fs.writeFileSync(spec.output, figure.render(), "utf8");
}
