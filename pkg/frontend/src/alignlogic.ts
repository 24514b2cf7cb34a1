/** Pure helpers behind the alignment screen: selections map to edit ops,
 * legality mirrors the server's link-shape rules, never inventing links. */

import type { EditOp, Link } from "./types.js";

const LEGAL_SHAPES = new Set(["1:1", "1:2", "2:1", "1:0", "0:1"]);

export function shapeOf(nPivot: number, nTarget: number): string {
  return `${nPivot}:${nTarget}`;
}

export function isLegalShape(nPivot: number, nTarget: number): boolean {
  return LEGAL_SHAPES.has(shapeOf(nPivot, nTarget));
}

/** A merge is offered only for two adjacent selected links whose combined
 * shape is legal. */
export function mergeFromSelection(links: Link[], selected: number[]): EditOp | null {
  if (selected.length !== 2) {
    return null;
  }
  const [a, b] = [...selected].sort((x, y) => x - y);
  if (b !== a + 1 || a < 0 || b >= links.length) {
    return null;
  }
  const nPivot = links[a].pivot.length + links[b].pivot.length;
  const nTarget = links[a].target.length + links[b].target.length;
  if (!isLegalShape(nPivot, nTarget)) {
    return null;
  }
  return { op: "merge", index: a };
}

export interface SplitChoice {
  pivotFirst: number;
  targetFirst: number;
  label: string; // e.g. "1:1 + 0:1"
}

/** All legal two-piece splits of one link. */
export function splitChoices(link: Link): SplitChoice[] {
  const out: SplitChoice[] = [];
  const np = link.pivot.length;
  const nt = link.target.length;
  for (let a = 0; a <= np; a++) {
    for (let b = 0; b <= nt; b++) {
      const restP = np - a;
      const restT = nt - b;
      if (a + b === 0 || restP + restT === 0) {
        continue; // a piece may not be empty
      }
      if (isLegalShape(a, b) && isLegalShape(restP, restT)) {
        out.push({
          pivotFirst: a,
          targetFirst: b,
          label: `${shapeOf(a, b)} + ${shapeOf(restP, restT)}`,
        });
      }
    }
  }
  return out;
}

export function splitToEdit(index: number, choice: SplitChoice): EditOp {
  return {
    op: "split",
    index,
    pivot_first: choice.pivotFirst,
    target_first: choice.targetFirst,
  };
}

export function confirmEdit(index: number): EditOp {
  return { op: "confirm", index };
}

/** Keyboard flow: the next link (after `from`) still awaiting confirmation. */
export function nextUnconfirmed(links: Link[], from: number): number | null {
  for (let i = from + 1; i < links.length; i++) {
    if (links[i].status === "auto") {
      return i;
    }
  }
  for (let i = 0; i <= Math.min(from, links.length - 1); i++) {
    if (links[i].status === "auto") {
      return i;
    }
  }
  return null;
}

export function progress(links: Link[]): { confirmed: number; total: number } {
  return {
    confirmed: links.filter((l) => l.status !== "auto").length,
    total: links.length,
  };
}
