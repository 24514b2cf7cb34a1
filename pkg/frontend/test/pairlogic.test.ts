import { describe, expect, it } from "vitest";

import {
  filterPairs,
  overrideBlocked,
  reviewedShare,
  splitCellForHighlight,
} from "../src/pairlogic.js";
import type { PairItem } from "../src/types.js";

function pair(overrides: Partial<PairItem>): PairItem {
  return {
    index: 0,
    segment: "d1p1s1",
    surface: "Fogg",
    hypertype: "anthroponym",
    lang: "en",
    row: 0,
    span: [0, 4],
    targetSurface: "Fogg",
    label: "Borrowing",
    evidence: "exact",
    score: 1,
    note: "",
    override: false,
    ...overrides,
  };
}

describe("filterPairs", () => {
  const pairs = [
    pair({ index: 0, label: "Borrowing" }),
    pair({ index: 1, label: "Absence", span: null, targetSurface: null, evidence: "none" }),
    pair({ index: 2, hypertype: "toponym", label: "Assimilation", evidence: "edit" }),
  ];

  it("filter label=Absence lists exactly the span-less pairs", () => {
    const absent = filterPairs(pairs, { label: "Absence" });
    expect(absent.map((p) => p.index)).toEqual([1]);
    expect(absent.every((p) => p.span === null)).toBe(true);
  });

  it("filters compose as conjunction", () => {
    expect(
      filterPairs(pairs, { hypertype: "toponym", evidence: "edit" }).map((p) => p.index),
    ).toEqual([2]);
    expect(filterPairs(pairs, { hypertype: "toponym", label: "Borrowing" })).toEqual([]);
  });

  it("empty filter keeps everything", () => {
    expect(filterPairs(pairs, {})).toHaveLength(3);
  });
});

describe("overrideBlocked", () => {
  it("Other without a note is blocked", () => {
    expect(overrideBlocked("Other", "")).toBeTruthy();
    expect(overrideBlocked("Other", "   ")).toBeTruthy();
  });

  it("Other with a note passes, other labels need none", () => {
    expect(overrideBlocked("Other", "possessive form")).toBeNull();
    expect(overrideBlocked("Borrowing", "")).toBeNull();
    expect(overrideBlocked("Absence", "")).toBeNull();
  });
});

describe("helpers", () => {
  it("reviewedShare counts overrides", () => {
    expect(reviewedShare([pair({}), pair({ override: true })])).toBe(0.5);
    expect(reviewedShare([])).toBe(0);
  });

  it("splitCellForHighlight slices the candidate span", () => {
    expect(splitCellForHighlight("the Red Sea", [4, 11])).toEqual({
      before: "the ",
      inside: "Red Sea",
      after: "",
    });
    expect(splitCellForHighlight("plain", null)).toEqual({
      before: "plain",
      inside: "",
      after: "",
    });
    expect(splitCellForHighlight("abc", [2, 9])).toEqual({
      before: "abc",
      inside: "",
      after: "",
    });
  });
});
