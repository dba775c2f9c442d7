/** Self-contained SVG renderer: one mean line per scheme plus a translucent
 * min/max band whenever more than one seed backs a point. */

import { FigureKind, KIND_XLABEL, Series, Y_LABEL } from "./series.js";

const WIDTH = 760;
const HEIGHT = 480;
const MARGIN = { left: 72, right: 180, top: 28, bottom: 56 };

const SCHEME_COLORS: Record<string, string> = {
  sop: "#c0392b",
  jop: "#2471a3",
  passive: "#1e8449",
  passive_boost: "#7d3c98",
  random: "#b7950b",
  none: "#566573",
};

function color(scheme: string, i: number): string {
  const fallback = ["#e74c3c", "#3498db", "#27ae60", "#8e44ad", "#f39c12"];
  return SCHEME_COLORS[scheme] ?? fallback[i % fallback.length];
}

function ticks(lo: number, hi: number, n = 6): number[] {
  if (hi <= lo) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const pick = candidates.find((s) => span / s <= n) ?? 10 * step;
  const start = Math.ceil(lo / pick) * pick;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += pick) {
    out.push(Number(v.toPrecision(12)));
  }
  return out;
}

const esc = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export function renderSvg(kind: FigureKind, series: Series[]): string {
  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const ysLo = series.flatMap((s) => s.points.map((p) => p.lo));
  const ysHi = series.flatMap((s) => s.points.map((p) => p.hi));
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  let yLo = Math.min(...ysLo, 0);
  let yHi = Math.max(...ysHi);
  if (yHi <= yLo) yHi = yLo + 1;

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (x: number): number =>
    MARGIN.left + (xHi === xLo ? 0.5 : (x - xLo) / (xHi - xLo)) * plotW;
  const sy = (y: number): number =>
    MARGIN.top + (1 - (y - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="13">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  // axes and grid
  for (const t of ticks(xLo, xHi)) {
    const px = sx(t);
    parts.push(
      `<line x1="${px.toFixed(2)}" y1="${MARGIN.top}" x2="${px.toFixed(2)}" ` +
        `y2="${MARGIN.top + plotH}" stroke="#eeeeee"/>`,
      `<text x="${px.toFixed(2)}" y="${MARGIN.top + plotH + 18}" ` +
        `text-anchor="middle">${t}</text>`,
    );
  }
  for (const t of ticks(yLo, yHi)) {
    const py = sy(t);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${py.toFixed(2)}" ` +
        `x2="${MARGIN.left + plotW}" y2="${py.toFixed(2)}" stroke="#eeeeee"/>`,
      `<text x="${MARGIN.left - 8}" y="${(py + 4).toFixed(2)}" ` +
        `text-anchor="end">${Number(t.toPrecision(6))}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" ` +
      `height="${plotH}" fill="none" stroke="#333333"/>`,
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 14}" ` +
      `text-anchor="middle">${esc(KIND_XLABEL[kind])}</text>`,
    `<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">${esc(Y_LABEL)}</text>`,
  );

  series.forEach((s, i) => {
    const c = color(s.scheme, i);
    const banded = s.points.some((p) => p.seeds > 1);
    if (banded) {
      const upper = s.points.map((p) => `${sx(p.x).toFixed(2)},${sy(p.hi).toFixed(2)}`);
      const lower = [...s.points]
        .reverse()
        .map((p) => `${sx(p.x).toFixed(2)},${sy(p.lo).toFixed(2)}`);
      parts.push(
        `<polygon class="band" points="${[...upper, ...lower].join(" ")}" ` +
          `fill="${c}" opacity="0.15"/>`,
      );
    }
    const line = s.points
      .map((p) => `${sx(p.x).toFixed(2)},${sy(p.mean).toFixed(2)}`)
      .join(" ");
    parts.push(
      `<polyline class="mean" points="${line}" fill="none" stroke="${c}" stroke-width="2"/>`,
    );
    for (const p of s.points) {
      parts.push(
        `<circle cx="${sx(p.x).toFixed(2)}" cy="${sy(p.mean).toFixed(2)}" r="3" fill="${c}"/>`,
      );
    }
    const ly = MARGIN.top + 16 + i * 20;
    parts.push(
      `<line x1="${WIDTH - MARGIN.right + 12}" y1="${ly - 4}" ` +
        `x2="${WIDTH - MARGIN.right + 40}" y2="${ly - 4}" stroke="${c}" stroke-width="2"/>`,
      `<text x="${WIDTH - MARGIN.right + 46}" y="${ly}">${esc(s.scheme)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
