// Genji-mon rendering: a pure function from server-sent segment lists to
// SVG markup. No layout logic lives here; the abstract coordinates are
// mapped into the fixed viewBox the same way the server's exporter does.

import type { DiagramJson, PairJson } from "./protocol.js";

export const VIEWBOX = { x: 0, y: 0, w: 5, h: 11 };
export const STROKE = 0.12;
const FULL_HEIGHT = 10;

export interface RenderOptions {
  highlightColumns?: number[]; // abstract x coordinates to tint
  cssClass?: string;
}

function toSvgCoords(seg: number[]): { x1: number; y1: number; x2: number; y2: number } {
  const [ax1, ay1, ax2, ay2] = seg as [number, number, number, number];
  return {
    x1: ax1 + 0.5,
    y1: FULL_HEIGHT + 0.5 - ay1,
    x2: ax2 + 0.5,
    y2: FULL_HEIGHT + 0.5 - ay2,
  };
}

export function diagramSvg(diagram: DiagramJson, options: RenderOptions = {}): string {
  const highlight = new Set(options.highlightColumns ?? []);
  const lines = diagram.segments
    .map((seg) => {
      const { x1, y1, x2, y2 } = toSvgCoords(seg);
      const vertical = seg[0] === seg[2];
      const tinted = vertical && highlight.has(seg[0] as number);
      const cls = tinted ? ' class="hl"' : "";
      return `  <line${cls} x1="${x1}" y1="${y1}" x2="${x2}" y2="${y2}"/>`;
    })
    .join("\n");
  const cls = options.cssClass ? ` class="${options.cssClass}"` : "";
  return (
    `<svg${cls} xmlns="http://www.w3.org/2000/svg" ` +
    `viewBox="${VIEWBOX.x} ${VIEWBOX.y} ${VIEWBOX.w} ${VIEWBOX.h}">\n` +
    `<g stroke="currentColor" stroke-width="${STROKE}" ` +
    `stroke-linecap="square" fill="none">\n${lines}\n</g>\n</svg>`
  );
}

export function columnOfRound(round: number): number {
  return 5 - round;
}

// every abstract segment must land inside the viewBox after mapping
export function segmentsInBounds(diagram: DiagramJson): boolean {
  return diagram.segments.every((seg) => {
    const { x1, y1, x2, y2 } = toSvgCoords(seg);
    return [x1, x2].every((x) => x >= VIEWBOX.x && x <= VIEWBOX.x + VIEWBOX.w) &&
      [y1, y2].every((y) => y >= VIEWBOX.y && y <= VIEWBOX.y + VIEWBOX.h);
  });
}

export function agreementSummary(pairs: PairJson[]): string {
  const agreed = pairs.filter((p) => p.agree);
  return `${agreed.length} of ${pairs.length} pairs agree`;
}

export function pairBadges(pairs: PairJson[]): string {
  return pairs
    .map((p) => {
      const cls = p.agree ? "pair agree" : "pair differ";
      return `<span class="${cls}" data-pair="${p.i}-${p.j}">${p.i}&middot;${p.j}</span>`;
    })
    .join("");
}

export function voteBars(probs: number[], classNames?: string[]): string {
  return probs
    .map((p, i) => {
      const pct = Math.round(p * 100);
      const label = classNames?.[i] ?? `scent ${i + 1}`;
      return (
        `<div class="vote-row"><span class="vote-label">${label}</span>` +
        `<div class="vote-bar"><div class="vote-fill" style="width:${pct}%"></div></div>` +
        `<span class="vote-pct">${pct}%</span></div>`
      );
    })
    .join("");
}
