/**
 * Figure renderers over the solver CSV artifacts.
 *
 * One figure per spec: { kind, input, output, options? }.  Each renderer
 * validates the columns it needs (schema mismatches throw with the column
 * diff), picks log scales where the data spans decades, and embeds the
 * provenance hash of the input in the caption.
 */

import { column, columnsByPrefix, readTable, requireColumns, Table } from "./csv.js";
import { extent, Figure } from "./svg.js";

export type FigureKind = "density" | "asymptotics" | "lyapunov" | "blowup" | "continuation";

export interface FigureSpec {
  kind: FigureKind;
  input: string;
  output: string;
  options?: {
    title?: string;
    logx?: boolean;
    logy?: boolean;
  };
}

function caption(table: Table): string {
  const hash = table.meta["config_sha256"] ?? "unknown";
  return `source ${hash.slice(0, 16)}`;
}

export function renderDensity(table: Table, spec: FigureSpec): string {
  requireColumns(table, ["scale", "density"]);
  const scale = column(table, "scale");
  const density = column(table, "density");
  const order = scale.map((_, i) => i).sort((a, b) => scale[a] - scale[b]);
  const xs = order.map((i) => scale[i]);
  const ys = order.map((i) => density[i]);
  const fig = new Figure("log", [Math.min(...xs) / 1.5, Math.max(...xs) * 1.5],
    "linear", [0, 1.05]);
  fig.polyline(xs, ys, fig.color(0), { markers: true, label: "good-amplitude fraction" });
  fig.polyline(xs, xs.map(() => 1.0), "#888", { dash: "4 4", label: "full density" });
  return fig.render(spec.options?.title ?? "Non-resonance density vs amplitude box",
    "box scale", "density", caption(table));
}

export function renderAsymptotics(table: Table, spec: FigureSpec): string {
  requireColumns(table, ["j", "Omega", "residual"]);
  const js = column(table, "j");
  const res = column(table, "residual").map(Math.abs);
  const m = Number(table.meta["m"] ?? "1");
  const bound = js.map((j) => (m * m) / (8 * j));
  const positive = res.filter((v) => v > 0);
  const floor = positive.length ? Math.min(...positive) / 3 : 1e-12;
  const ys = res.map((v) => Math.max(v, floor));
  const fig = new Figure("linear", extent(js), "log",
    [floor, Math.max(...bound) * 2]);
  fig.polyline(js, ys, fig.color(0), { markers: true, label: "|j r_j|" });
  fig.polyline(js, bound, fig.color(1), { dash: "5 3", label: "m^2/(8j) bound" });
  return fig.render(spec.options?.title ?? "Normal-frequency asymptotics",
    "mode j", "|j (Omega_j - j - a - m/2j)|", caption(table));
}

export function renderLyapunov(table: Table, spec: FigureSpec): string {
  requireColumns(table, ["t", "M", "H"]);
  const t = column(table, "t");
  const M = column(table, "M");
  const H = column(table, "H");
  const fig = new Figure("linear", extent(t), "linear", extent([...M, ...H]));
  fig.polyline(t, M, fig.color(0), { label: "M = int y_x v" });
  fig.polyline(t, H, fig.color(1), { label: "H = int v^2/2 + y_x^2/2 - F" });
  return fig.render(spec.options?.title ?? "Monotone functionals along the flow",
    "t", "functional value", caption(table));
}

export function renderBlowup(table: Table, spec: FigureSpec): string {
  requireColumns(table, ["t", "meanvel", "flag"]);
  const t = column(table, "t");
  const w = column(table, "meanvel");
  const flag = column(table, "flag");
  const w0 = w[0];
  const cap = Math.max(...w.filter(isFinite)) * 1.3;
  const refXs: number[] = [];
  const refYs: number[] = [];
  for (let i = 0; i < t.length; i++) {
    if (w0 <= 0 || t[i] >= 1 / w0) break;
    const b = w0 / (1 - w0 * t[i]);
    if (b > cap) break;
    refXs.push(t[i]);
    refYs.push(b);
  }
  const fig = new Figure("linear", extent(t), "log", [Math.min(w0, 1) * 0.5, cap]);
  fig.polyline(t, w, fig.color(0), { label: "observed mean velocity" });
  if (refXs.length) {
    fig.polyline(refXs, refYs, fig.color(1), { dash: "5 3", label: "w0/(1 - w0 t) lower bound" });
  }
  const fi = flag.findIndex((f) => f > 0);
  if (fi >= 0) fig.vline(t[fi], "#555", "blow-up flag");
  return fig.render(spec.options?.title ?? "Mean-velocity blow-up comparison",
    "t", "mean velocity", caption(table));
}

export function renderContinuation(table: Table, spec: FigureSpec): string {
  requireColumns(table, ["xi", "residual", "iters"]);
  const xi = column(table, "xi");
  const omegas = columnsByPrefix(table, "omega_");
  if (omegas.length === 0) {
    throw new Error(`schema mismatch: no omega_<site> columns in [${table.columns.join(", ")}]`);
  }
  const order = xi.map((_, i) => i).sort((a, b) => xi[a] - xi[b]);
  const xs = order.map((i) => xi[i]);
  const all = omegas.flatMap((o) => o.values);
  const fig = new Figure("log", [Math.min(...xs) / 1.5, Math.max(...xs) * 1.5],
    "linear", extent(all, 0.15));
  omegas.forEach((o, idx) => {
    fig.polyline(xs, order.map((i) => o.values[i]), fig.color(idx),
      { markers: true, label: o.name });
  });
  return fig.render(spec.options?.title ?? "Frequency continuation in amplitude",
    "xi", "frequency", caption(table));
}

const RENDERERS: Record<FigureKind, (t: Table, s: FigureSpec) => string> = {
  density: renderDensity,
  asymptotics: renderAsymptotics,
  lyapunov: renderLyapunov,
  blowup: renderBlowup,
  continuation: renderContinuation,
};

export function renderSpec(spec: FigureSpec): string {
  const renderer = RENDERERS[spec.kind];
  if (!renderer) {
    throw new Error(`unknown figure kind "${spec.kind}" (have ${Object.keys(RENDERERS).join(", ")})`);
  }
  return renderer(readTable(spec.input), spec);
}
