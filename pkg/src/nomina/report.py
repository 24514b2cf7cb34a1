"""Statistical tables: name inventory, frequency sample, procedure matrix."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .cascade import AnnotatedDocument, HYPERTYPES
from .errors import Unlabeled
from .transfer import PROCEDURES, NamePair


@dataclass(frozen=True)
class InventoryRow:
    hypertype: str
    occurrences: int
    distinct: int


@dataclass(frozen=True)
class InventoryTable:
    rows: tuple[InventoryRow, ...]  # fixed hypertype order
    total_occurrences: int
    total_distinct: int


def np_inventory(annotated: AnnotatedDocument) -> InventoryTable:
    """Occurrence and distinct-surface counts per hypertype."""
    occ: dict[str, int] = {h: 0 for h in HYPERTYPES}
    distinct: dict[str, set[str]] = {h: set() for h in HYPERTYPES}
    for ann in annotated.annotations:
        occ[ann.type.hypertype] += 1
        distinct[ann.type.hypertype].add(ann.surface)
    rows = tuple(
        InventoryRow(h, occ[h], len(distinct[h])) for h in HYPERTYPES
    )
    return InventoryTable(
        rows=rows,
        total_occurrences=sum(r.occurrences for r in rows),
        total_distinct=sum(r.distinct for r in rows),
    )


@dataclass(frozen=True)
class SampleEntry:
    hypertype: str
    surface: str
    occurrences: int


@dataclass(frozen=True)
class FrequencySample:
    fraction: float
    entries: tuple[SampleEntry, ...]
    covered_occurrences: int
    total_occurrences: int

    @property
    def coverage_share(self) -> float:
        if not self.total_occurrences:
            return 0.0
        return self.covered_occurrences / self.total_occurrences


def top_frequency_sample(
    annotated: AnnotatedDocument, fraction: float = 0.10
) -> FrequencySample:
    """Per hypertype, the max(1, floor(fraction * distinct)) most frequent
    distinct surfaces; ties break on first occurrence order."""
    counts: dict[str, dict[str, int]] = {h: {} for h in HYPERTYPES}
    first_seen: dict[str, dict[str, int]] = {h: {} for h in HYPERTYPES}
    for order, ann in enumerate(annotated.annotations):
        h = ann.type.hypertype
        counts[h][ann.surface] = counts[h].get(ann.surface, 0) + 1
        first_seen[h].setdefault(ann.surface, order)
    entries: list[SampleEntry] = []
    covered = 0
    total = 0
    for h in HYPERTYPES:
        total += sum(counts[h].values())
        if not counts[h]:
            continue
        k = max(1, int(fraction * len(counts[h])))
        ranked = sorted(
            counts[h].items(), key=lambda sc: (-sc[1], first_seen[h][sc[0]])
        )
        for surface, c in ranked[:k]:
            entries.append(SampleEntry(h, surface, c))
            covered += c
    return FrequencySample(
        fraction=fraction,
        entries=tuple(entries),
        covered_occurrences=covered,
        total_occurrences=total,
    )


@dataclass(frozen=True)
class ProcedureMatrix:
    row_labels: tuple[str, ...]  # column labels of the multitext, Fig.-6 rows
    counts: dict[str, dict[str, int]]  # label -> procedure -> count
    basis: dict[str, int]  # label -> total classified pairs

    def percentage(self, row: str, procedure: str) -> float:
        total = self.basis[row]
        if total == 0:
            return 0.0
        # one-decimal half-up rendering, in exact integer arithmetic
        tenths = (2000 * self.counts[row][procedure] + total) // (2 * total)
        return tenths / 10.0

    def row_percentages(self, row: str) -> dict[str, float]:
        return {p: self.percentage(row, p) for p in PROCEDURES}


def procedure_matrix(pairs: list[NamePair]) -> ProcedureMatrix:
    """Percentage of classified occurrences per procedure, per target row."""
    counts: dict[str, dict[str, int]] = {}
    order: list[str] = []
    for pair in pairs:
        if not pair.label:
            raise Unlabeled(f"pair {pair.entity.surface!r} has no procedure label")
        if pair.label not in PROCEDURES:
            raise Unlabeled(f"pair {pair.entity.surface!r} has unknown label {pair.label!r}")
        row = pair.column_label
        if row not in counts:
            counts[row] = {p: 0 for p in PROCEDURES}
            order.append(row)
        counts[row][pair.label] += 1
    basis = {row: sum(c.values()) for row, c in counts.items()}
    return ProcedureMatrix(tuple(order), counts, basis)


@dataclass(frozen=True)
class ReportBundle:
    inventory: InventoryTable
    sample: FrequencySample
    matrix: ProcedureMatrix
    basis_note: str = ""


# --- serialization -------------------------------------------------------------


def _inventory_dict(inv: InventoryTable) -> dict:
    return {
        "rows": [
            {"hypertype": r.hypertype, "occurrences": r.occurrences, "distinct": r.distinct}
            for r in inv.rows
        ],
        "total_occurrences": inv.total_occurrences,
        "total_distinct": inv.total_distinct,
    }


def _sample_dict(sample: FrequencySample) -> dict:
    return {
        "fraction": sample.fraction,
        "entries": [
            {"hypertype": e.hypertype, "surface": e.surface, "occurrences": e.occurrences}
            for e in sample.entries
        ],
        "covered_occurrences": sample.covered_occurrences,
        "total_occurrences": sample.total_occurrences,
        "coverage_share": sample.coverage_share,
    }


def _matrix_dict(matrix: ProcedureMatrix) -> dict:
    return {
        "procedures": list(PROCEDURES),
        "rows": [
            {
                "label": row,
                "basis": matrix.basis[row],
                "counts": dict(matrix.counts[row]),
                "percentages": matrix.row_percentages(row),
            }
            for row in matrix.row_labels
        ],
    }


def matrix_from_dict(payload: dict) -> ProcedureMatrix:
    rows = payload["rows"]
    return ProcedureMatrix(
        row_labels=tuple(r["label"] for r in rows),
        counts={r["label"]: {p: int(c) for p, c in r["counts"].items()} for r in rows},
        basis={r["label"]: int(r["basis"]) for r in rows},
    )


def emit_report(report: ReportBundle, format: str = "tsv") -> bytes:
    """Deterministic TSV / markdown / JSON rendering of the three tables."""
    if format == "json":
        payload = {
            "basis_note": report.basis_note,
            "inventory": _inventory_dict(report.inventory),
            "sample": _sample_dict(report.sample),
            "matrix": _matrix_dict(report.matrix),
        }
        return (json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n").encode("utf-8")

    inv = report.inventory
    matrix = report.matrix
    if format == "tsv":
        lines = []
        if report.basis_note:
            lines.append(f"# {report.basis_note}")
        lines.append("hypertype\toccurrences\tdistinct")
        for r in inv.rows:
            lines.append(f"{r.hypertype}\t{r.occurrences}\t{r.distinct}")
        lines.append(f"total\t{inv.total_occurrences}\t{inv.total_distinct}")
        lines.append("")
        lines.append("hypertype\tsurface\toccurrences")
        for e in report.sample.entries:
            lines.append(f"{e.hypertype}\t{e.surface}\t{e.occurrences}")
        lines.append(
            f"# sample covers {report.sample.covered_occurrences}"
            f"/{report.sample.total_occurrences} occurrences"
        )
        lines.append("")
        lines.append("target\t" + "\t".join(PROCEDURES))
        for row in matrix.row_labels:
            pct = matrix.row_percentages(row)
            lines.append(row + "\t" + "\t".join(f"{pct[p]:.1f}" for p in PROCEDURES))
        return ("\n".join(lines) + "\n").encode("utf-8")

    if format == "markdown":
        lines = []
        if report.basis_note:
            lines.append(f"> {report.basis_note}")
            lines.append("")
        lines.append("| hypertype | occurrences | distinct |")
        lines.append("| --- | ---: | ---: |")
        for r in inv.rows:
            lines.append(f"| {r.hypertype} | {r.occurrences} | {r.distinct} |")
        lines.append(f"| **total** | {inv.total_occurrences} | {inv.total_distinct} |")
        lines.append("")
        lines.append("| hypertype | surface | occurrences |")
        lines.append("| --- | --- | ---: |")
        for e in report.sample.entries:
            lines.append(f"| {e.hypertype} | {e.surface} | {e.occurrences} |")
        lines.append("")
        lines.append("| target | " + " | ".join(PROCEDURES) + " |")
        lines.append("| --- |" + " ---: |" * len(PROCEDURES))
        for row in matrix.row_labels:
            pct = matrix.row_percentages(row)
            lines.append(
                f"| {row} | " + " | ".join(f"{pct[p]:.1f}%" for p in PROCEDURES) + " |"
            )
        return ("\n".join(lines) + "\n").encode("utf-8")

    raise ValueError(f"unknown report format {format!r}")
