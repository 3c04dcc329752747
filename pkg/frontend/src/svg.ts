/**
 * Minimal deterministic SVG plotting: fixed canvas, linear/log scales,
 * axes with tick labels, polylines and markers.  No timestamps, no
 * randomness: identical inputs give identical bytes.
 */

export const WIDTH = 840;
export const HEIGHT = 520;
export const MARGIN = { left: 78, right: 24, top: 46, bottom: 64 };

export type ScaleKind = "linear" | "log";

export interface Scale {
  (v: number): number;
  kind: ScaleKind;
  domain: [number, number];
  range: [number, number];
}

export function fmt(v: number): string {
  if (!isFinite(v)) return String(v);
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(2);
  return String(Number(v.toPrecision(6)));
}

export function makeScale(kind: ScaleKind, domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const f = ((v: number) => {
    let t: number;
    if (kind === "log") {
      t = (Math.log(v) - Math.log(d0)) / (Math.log(d1) - Math.log(d0));
    } else {
      t = (v - d0) / (d1 - d0);
    }
    return r0 + t * (r1 - r0);
  }) as Scale;
  f.kind = kind;
  f.domain = domain;
  f.range = range;
  return f;
}

export function extent(values: number[], pad = 0.05): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!isFinite(v)) continue;
    lo = Math.min(lo, v);
    hi = Math.max(hi, v);
  }
  if (!isFinite(lo)) return [0, 1];
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const span = hi - lo;
  return [lo - pad * span, hi + pad * span];
}

export function logTicks([d0, d1]: [number, number]): number[] {
  const out: number[] = [];
  for (let e = Math.ceil(Math.log10(d0) - 1e-9); Math.pow(10, e) <= d1 * (1 + 1e-9); e++) {
    out.push(Math.pow(10, e));
  }
  return out;
}

export function linTicks([d0, d1]: [number, number], n = 6): number[] {
  const raw = (d1 - d0) / n;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => (d1 - d0) / s <= n) ?? mag * 10;
  const out: number[] = [];
  for (let v = Math.ceil(d0 / step) * step; v <= d1 + 1e-12 * Math.abs(step); v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

export class Figure {
  private parts: string[] = [];
  private legendEntries: { label: string; color: string; dash?: string }[] = [];
  readonly x: Scale;
  readonly y: Scale;

  constructor(
    xKind: ScaleKind,
    xDomain: [number, number],
    yKind: ScaleKind,
    yDomain: [number, number],
  ) {
    this.x = makeScale(xKind, xDomain, [MARGIN.left, WIDTH - MARGIN.right]);
    this.y = makeScale(yKind, yDomain, [HEIGHT - MARGIN.bottom, MARGIN.top]);
  }

  color(i: number): string {
    return PALETTE[i % PALETTE.length];
  }

  polyline(xs: number[], ys: number[], color: string, opts: { dash?: string; width?: number; label?: string; markers?: boolean } = {}): void {
    const pts: string[] = [];
    for (let i = 0; i < xs.length; i++) {
      const px = this.x(xs[i]);
      const py = this.y(ys[i]);
      if (!isFinite(px) || !isFinite(py)) continue;
      pts.push(`${fmt(px)},${fmt(py)}`);
    }
    const dash = opts.dash ? ` stroke-dasharray="${opts.dash}"` : "";
    this.parts.push(
      `<polyline fill="none" stroke="${color}" stroke-width="${opts.width ?? 1.8}"${dash} points="${pts.join(" ")}"/>`,
    );
    if (opts.markers) {
      for (const p of pts) {
        const [cx, cy] = p.split(",");
        this.parts.push(`<circle cx="${cx}" cy="${cy}" r="3.2" fill="${color}"/>`);
      }
    }
    if (opts.label) this.legendEntries.push({ label: opts.label, color, dash: opts.dash });
  }

  vline(xv: number, color: string, label?: string): void {
    const px = this.x(xv);
    this.parts.push(
      `<line x1="${fmt(px)}" y1="${MARGIN.top}" x2="${fmt(px)}" y2="${HEIGHT - MARGIN.bottom}" stroke="${color}" stroke-width="1.2" stroke-dasharray="2 3"/>`,
    );
    if (label) this.legendEntries.push({ label, color, dash: "2 3" });
  }

  private axes(xLabel: string, yLabel: string): string {
    const out: string[] = [];
    const x0 = MARGIN.left;
    const x1 = WIDTH - MARGIN.right;
    const y0 = HEIGHT - MARGIN.bottom;
    const y1 = MARGIN.top;
    out.push(`<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" fill="none" stroke="#444" stroke-width="1"/>`);
    const xt = this.x.kind === "log" ? logTicks(this.x.domain) : linTicks(this.x.domain);
    for (const v of xt) {
      const px = this.x(v);
      if (px < x0 - 0.5 || px > x1 + 0.5) continue;
      out.push(`<line x1="${fmt(px)}" y1="${y0}" x2="${fmt(px)}" y2="${y0 + 5}" stroke="#444"/>`);
      out.push(`<text x="${fmt(px)}" y="${y0 + 20}" font-size="12" text-anchor="middle" fill="#222">${fmt(v)}</text>`);
    }
    const yt = this.y.kind === "log" ? logTicks(this.y.domain) : linTicks(this.y.domain);
    for (const v of yt) {
      const py = this.y(v);
      if (py < y1 - 0.5 || py > y0 + 0.5) continue;
      out.push(`<line x1="${x0 - 5}" y1="${fmt(py)}" x2="${x0}" y2="${fmt(py)}" stroke="#444"/>`);
      out.push(`<text x="${x0 - 9}" y="${fmt(py + 4)}" font-size="12" text-anchor="end" fill="#222">${fmt(v)}</text>`);
    }
    out.push(`<text x="${(x0 + x1) / 2}" y="${HEIGHT - 18}" font-size="14" text-anchor="middle" fill="#111">${xLabel}</text>`);
    out.push(`<text x="20" y="${(y0 + y1) / 2}" font-size="14" text-anchor="middle" fill="#111" transform="rotate(-90 20 ${(y0 + y1) / 2})">${yLabel}</text>`);
    return out.join("\n");
  }

  private legend(): string {
    if (this.legendEntries.length === 0) return "";
    const x = MARGIN.left + 12;
    let y = MARGIN.top + 16;
    const out: string[] = [];
    for (const e of this.legendEntries) {
      const dash = e.dash ? ` stroke-dasharray="${e.dash}"` : "";
      out.push(`<line x1="${x}" y1="${y - 4}" x2="${x + 26}" y2="${y - 4}" stroke="${e.color}" stroke-width="2"${dash}/>`);
      out.push(`<text x="${x + 32}" y="${y}" font-size="12" fill="#222">${e.label}</text>`);
      y += 18;
    }
    return out.join("\n");
  }

  render(title: string, xLabel: string, yLabel: string, caption: string): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
      `<text x="${WIDTH / 2}" y="26" font-size="16" text-anchor="middle" fill="#111">${title}</text>`,
      this.axes(xLabel, yLabel),
      this.parts.join("\n"),
      this.legend(),
      `<text x="${WIDTH - MARGIN.right}" y="${HEIGHT - 4}" font-size="9" text-anchor="end" fill="#888">${caption}</text>`,
      `</svg>`,
    ].join("\n");
  }
}
