/**
 * Small deterministic SVG canvas: panels with linear/log axes, polylines and
 * PNG-backed heatmaps. Pure string assembly; no timestamps, no randomness.
 */

import { encodePng } from "./png.js";
import { heatmapBytes } from "./colormap.js";

export interface Scale {
  (value: number): number;
  ticks: number[];
  kind: "linear" | "log";
}

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const span = hi - lo || 1;
  const scale = ((value: number) => outLo + ((value - lo) / span) * (outHi - outLo)) as Scale;
  scale.kind = "linear";
  scale.ticks = niceTicks(lo, hi, 5);
  return scale;
}

export function logScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const safeLo = Math.max(lo, 1e-300);
  const la = Math.log10(safeLo);
  const lb = Math.log10(Math.max(hi, safeLo * 10));
  const scale = ((value: number) =>
    outLo + ((Math.log10(Math.max(value, 1e-300)) - la) / (lb - la)) * (outHi - outLo)) as Scale;
  scale.kind = "log";
  const ticks: number[] = [];
  for (let e = Math.ceil(la); e <= Math.floor(lb); e++) ticks.push(10 ** e);
  scale.ticks = ticks.length >= 2 ? ticks : [safeLo, hi];
  return scale;
}

function niceTicks(lo: number, hi: number, count: number): number[] {
  const span = hi - lo || 1;
  const step = 10 ** Math.floor(Math.log10(span / count));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count + 1) ?? 10 * step;
  const start = Math.ceil(lo / chosen) * chosen;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += chosen) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks;
}

function fmt(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 0.01 && magnitude < 10000) {
    return parseFloat(value.toPrecision(4)).toString();
  }
  return value.toExponential(0).replace("+", "");
}

export class SvgCanvas {
  private parts: string[] = [];

  constructor(public readonly width: number, public readonly height: number) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
      `<rect width="${width}" height="${height}" fill="white"/>`
    );
  }

  raw(fragment: string): void {
    this.parts.push(fragment);
  }

  text(x: number, y: number, content: string, size = 11, anchor = "middle", extra = ""): void {
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}" text-anchor="${anchor}" ${extra}>` +
        `${escapeXml(content)}</text>`
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke = "black", width = 1): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${stroke}" stroke-width="${width}"/>`
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.3, dash = ""): void {
    const path = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<polyline points="${path}" fill="none" stroke="${stroke}" stroke-width="${width}"${dashAttr}/>`
    );
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${fill}"/>`);
  }

  image(x: number, y: number, w: number, h: number, png: Uint8Array): void {
    const base64 = Buffer.from(png).toString("base64");
    this.parts.push(
      `<image x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" ` +
        `preserveAspectRatio="none" image-rendering="pixelated" ` +
        `href="data:image/png;base64,${base64}"/>`
    );
  }

  openGroup(attrs: string): void {
    this.parts.push(`<g ${attrs}>`);
  }

  closeGroup(): void {
    this.parts.push("</g>");
  }

  toString(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

export interface PanelBox {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** Draw a framed panel with ticks and axis labels; returns the two scales. */
export function axesPanel(
  svg: SvgCanvas,
  box: PanelBox,
  xDomain: [number, number],
  yDomain: [number, number],
  options: {
    xLabel?: string;
    yLabel?: string;
    title?: string;
    yLog?: boolean;
  } = {}
): { sx: Scale; sy: Scale } {
  const sx = linearScale(xDomain[0], xDomain[1], box.x, box.x + box.w);
  const sy = options.yLog
    ? logScale(yDomain[0], yDomain[1], box.y + box.h, box.y)
    : linearScale(yDomain[0], yDomain[1], box.y + box.h, box.y);
  svg.raw(
    `<rect x="${box.x}" y="${box.y}" width="${box.w}" height="${box.h}" ` +
      `fill="none" stroke="black" stroke-width="1"/>`
  );
  for (const tick of sx.ticks) {
    const px = sx(tick);
    svg.line(px, box.y + box.h, px, box.y + box.h + 4);
    svg.text(px, box.y + box.h + 15, fmt(tick), 9);
  }
  for (const tick of sy.ticks) {
    const py = sy(tick);
    svg.line(box.x - 4, py, box.x, py);
    svg.text(box.x - 6, py + 3, fmt(tick), 9, "end");
  }
  if (options.xLabel) {
    svg.text(box.x + box.w / 2, box.y + box.h + 30, options.xLabel, 11);
  }
  if (options.yLabel) {
    svg.text(
      box.x - 42,
      box.y + box.h / 2,
      options.yLabel,
      11,
      "middle",
      `transform="rotate(-90 ${fmt(box.x - 42)} ${fmt(box.y + box.h / 2)})"`
    );
  }
  if (options.title) {
    svg.text(box.x + box.w / 2, box.y - 6, options.title, 11);
  }
  return { sx, sy };
}

/** Heatmap panel over angle axes, values normalized to their own range. */
export function heatmapPanel(
  svg: SvgCanvas,
  box: PanelBox,
  grid: { rowAxis: number[]; colAxis: number[]; values: number[][] },
  title: string,
  normalize?: [number, number]
): void {
  // rows run along theta (x of the figure), columns along the second mode
  const flat = grid.values.flat();
  const lo = normalize ? normalize[0] : Math.min(...flat);
  const hi = normalize ? normalize[1] : Math.max(...flat);
  // transpose so the row axis (theta) runs horizontally, flip vertically so
  // the column axis increases upward
  const height = grid.colAxis.length;
  const width = grid.rowAxis.length;
  const transposed: number[][] = [];
  for (let y = 0; y < height; y++) {
    const row: number[] = [];
    for (let x = 0; x < width; x++) {
      row.push(grid.values[x][height - 1 - y]);
    }
    transposed.push(row);
  }
  const { rgb } = heatmapBytes(transposed, lo, hi);
  svg.image(box.x, box.y, box.w, box.h, encodePng(width, height, rgb));
  svg.raw(
    `<rect x="${box.x}" y="${box.y}" width="${box.w}" height="${box.h}" ` +
      `fill="none" stroke="black" stroke-width="0.8"/>`
  );
  if (title) {
    svg.text(box.x + box.w / 2, box.y - 4, title, 9);
  }
}
