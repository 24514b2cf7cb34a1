/** Ribbon geometry: straight connectors between sentence-group midpoints. */

import type { Link } from "./types.js";

export interface Box {
  top: number;
  height: number;
}

export function groupMidpoint(ids: string[], boxes: Map<string, Box>): number | null {
  const mids: number[] = [];
  for (const id of ids) {
    const box = boxes.get(id);
    if (box) {
      mids.push(box.top + box.height / 2);
    }
  }
  if (mids.length === 0) {
    return null;
  }
  return mids.reduce((a, b) => a + b, 0) / mids.length;
}

export interface Ribbon {
  linkIndex: number;
  y1: number | null; // null on the empty side of a 1:0 / 0:1 link
  y2: number | null;
}

export function ribbons(
  links: Link[],
  pivotBoxes: Map<string, Box>,
  targetBoxes: Map<string, Box>,
): Ribbon[] {
  return links.map((link, i) => ({
    linkIndex: i,
    y1: groupMidpoint(link.pivot, pivotBoxes),
    y2: groupMidpoint(link.target, targetBoxes),
  }));
}

/** SVG path for one connector across a gutter of the given width. */
export function ribbonPath(y1: number, y2: number, width: number): string {
  return `M 0 ${y1.toFixed(1)} L ${width} ${y2.toFixed(1)}`;
}
