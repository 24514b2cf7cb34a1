/** Pure helpers behind the pair-review screen. */

import type { PairItem, ProcedureLabel } from "./types.js";

export interface PairFilter {
  label?: ProcedureLabel | "";
  evidence?: string;
  hypertype?: string;
}

export function filterPairs(pairs: PairItem[], filter: PairFilter): PairItem[] {
  return pairs.filter((p) => {
    if (filter.label && p.label !== filter.label) {
      return false;
    }
    if (filter.evidence && p.evidence !== filter.evidence) {
      return false;
    }
    if (filter.hypertype && p.hypertype !== filter.hypertype) {
      return false;
    }
    return true;
  });
}

/** An override to Other requires a note; every label needs to be valid. */
export function overrideBlocked(label: ProcedureLabel, note: string): string | null {
  if (label === "Other" && note.trim() === "") {
    return "a note is required when overriding to Other";
  }
  return null;
}

export function evidenceValues(pairs: PairItem[]): string[] {
  return [...new Set(pairs.map((p) => p.evidence))].sort();
}

export function hypertypeValues(pairs: PairItem[]): string[] {
  return [...new Set(pairs.map((p) => p.hypertype))].sort();
}

export function reviewedShare(pairs: PairItem[]): number {
  if (pairs.length === 0) {
    return 0;
  }
  return pairs.filter((p) => p.override).length / pairs.length;
}

/** Highlight span inside the cell text; falls back to plain text. */
export function splitCellForHighlight(
  cellText: string,
  span: [number, number] | null,
): { before: string; inside: string; after: string } {
  if (span === null || span[0] < 0 || span[1] > cellText.length || span[0] >= span[1]) {
    return { before: cellText, inside: "", after: "" };
  }
  return {
    before: cellText.slice(0, span[0]),
    inside: cellText.slice(span[0], span[1]),
    after: cellText.slice(span[1]),
  };
}
