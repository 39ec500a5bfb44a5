// The 52-pattern gallery: server-provided diagrams only, no local layout.

import { ApiClient, type PatternEntry } from "./api.js";
import { diagramSvg, segmentsInBounds } from "./render.js";

export interface GalleryResult {
  total: number;
  rendered: number;
  outOfBounds: string[];
}

export async function loadGallery(root: HTMLElement, api: ApiClient): Promise<GalleryResult> {
  const { patterns } = await api.patterns();
  const grid = document.createElement("div");
  grid.className = "gallery";
  const outOfBounds: string[] = [];
  let rendered = 0;
  patterns.forEach((entry: PatternEntry) => {
    const figure = document.createElement("figure");
    figure.className = "pattern";
    figure.dataset.rgs = entry.rgs;
    figure.innerHTML = diagramSvg(entry.diagram) + `<figcaption>${entry.rgs}</figcaption>`;
    if (!segmentsInBounds(entry.diagram)) outOfBounds.push(entry.rgs);
    if (figure.querySelector("svg line")) rendered += 1;
    grid.appendChild(figure);
  });
  root.replaceChildren(grid);
  return { total: patterns.length, rendered, outOfBounds };
}
