"""Merge bitexts sharing one pivot into a queryable multitext table."""

from __future__ import annotations

import html as html_mod
import re
from dataclasses import dataclass

from .align import Bitext, validate_links
from .cascade import AnnotatedDocument, EntityAnnotation, HYPERTYPES, render_tagged_sentence
from .corpus import Document, SegmentId, serialize_tei
from .errors import InvalidBitext, ParseError, PivotMismatch, QueryError


@dataclass(frozen=True)
class Column:
    label: str
    lang: str
    doc: Document
    links: tuple


@dataclass(frozen=True)
class Row:
    pivot_ids: tuple[SegmentId, ...]
    cells: tuple[tuple[SegmentId, ...], ...]  # one per column, in column order


@dataclass(frozen=True)
class Multitext:
    pivot: AnnotatedDocument
    columns: tuple[Column, ...]
    rows: tuple[Row, ...]

    def pivot_cell_text(self, row: Row) -> str:
        return " ".join(self.pivot.doc.get(sid).text for sid in row.pivot_ids)

    def cell_text(self, row: Row, col_index: int) -> str:
        column = self.columns[col_index]
        return " ".join(column.doc.get(sid).text for sid in row.cells[col_index])

    def row_annotations(self, row: Row) -> tuple[EntityAnnotation, ...]:
        wanted = set(row.pivot_ids)
        return tuple(a for a in self.pivot.annotations if a.segment in wanted)


def merge(pivot: AnnotatedDocument, bitexts: list[tuple[str, Bitext]]) -> Multitext:
    """Combine bitexts over one pivot; rows widen to the finest common
    coarsening of all links' pivot groupings. Target-only (0:1) sentences
    attach to the row of the preceding pivot group."""
    pivot_hash = serialize_tei(pivot.doc)
    for label, bitext in bitexts:
        if serialize_tei(bitext.pivot) != pivot_hash:
            raise PivotMismatch(f"bitext {label!r} was aligned against a different pivot")
        violations = validate_links(bitext)
        if violations:
            raise InvalidBitext(f"bitext {label!r} has invalid links", violations)

    sentences = pivot.doc.sentences
    index_of = {s.id: i for i, s in enumerate(sentences)}
    n = len(sentences)

    # union-find over pivot sentence indices
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for _, bitext in bitexts:
        for link in bitext.links:
            idxs = [index_of[sid] for sid in link.pivot]
            for a, b in zip(idxs, idxs[1:]):
                union(a, b)

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    ordered_groups = [sorted(v) for _, v in sorted(groups.items())]
    row_of_index = {}
    for row_idx, group in enumerate(ordered_groups):
        for i in group:
            row_of_index[i] = row_idx

    # distribute target sentences into rows
    cells: list[list[list[SegmentId]]] = [
        [[] for _ in bitexts] for _ in ordered_groups
    ]
    for col, (_, bitext) in enumerate(bitexts):
        current_row = 0
        for link in bitext.links:
            if link.pivot:
                current_row = row_of_index[index_of[link.pivot[0]]]
            for tid in link.target:
                cells[current_row][col].append(tid)

    rows = tuple(
        Row(
            pivot_ids=tuple(sentences[i].id for i in group),
            cells=tuple(tuple(cell) for cell in cells[row_idx]),
        )
        for row_idx, group in enumerate(ordered_groups)
    )
    columns = tuple(
        Column(label, bitext.target.lang, bitext.target, bitext.links)
        for label, bitext in bitexts
    )
    return Multitext(pivot, columns, rows)


# --- export ------------------------------------------------------------------


def escape_cell(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def unescape_cell(text: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            out.append({"t": "\t", "n": "\n", "\\": "\\"}.get(nxt, "\\" + nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _tagged_pivot_cell(mt: Multitext, row: Row) -> str:
    parts = []
    for sid in row.pivot_ids:
        sent = mt.pivot.doc.get(sid)
        anns = [a for a in mt.pivot.annotations if a.segment == sid]
        parts.append(render_tagged_sentence(sent, anns))
    return " ".join(parts)


def export_table(mt: Multitext, format: str = "tsv") -> bytes:
    """TSV (interchange) or HTML (inspection) rendering of the table."""
    header = ["PIVOT-NP"] + [c.label for c in mt.columns]
    body_rows = []
    for row in mt.rows:
        cells = [_tagged_pivot_cell(mt, row)]
        cells += [mt.cell_text(row, j) for j in range(len(mt.columns))]
        body_rows.append(cells)
    if format == "tsv":
        lines = ["\t".join(escape_cell(c) for c in header)]
        for cells in body_rows:
            lines.append("\t".join(escape_cell(c) for c in cells))
        return ("\n".join(lines) + "\n").encode("utf-8")
    if format == "html":
        out = ["<!DOCTYPE html>", "<html><head><meta charset='utf-8'>",
               "<style>table{border-collapse:collapse}td,th{border:1px solid #999;"
               "padding:4px;vertical-align:top}</style></head><body><table>"]
        out.append("<tr>" + "".join(f"<th>{html_mod.escape(h)}</th>" for h in header) + "</tr>")
        for cells in body_rows:
            out.append(
                "<tr>" + "".join(f"<td>{html_mod.escape(c)}</td>" for c in cells) + "</tr>"
            )
        out.append("</table></body></html>")
        return "\n".join(out).encode("utf-8")
    raise ValueError(f"unknown export format {format!r}")


def import_table(data: bytes) -> tuple[list[str], list[list[str]]]:
    """Parse a TSV export back into header + unescaped cell rows."""
    lines = data.decode("utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("empty table")
    header = [unescape_cell(c) for c in lines[0].split("\t")]
    rows = [[unescape_cell(c) for c in line.split("\t")] for line in lines[1:]]
    return header, rows


# --- queries -----------------------------------------------------------------


def query(
    mt: Multitext,
    entity_type: str | None = None,
    surface: str | None = None,
) -> list[Row]:
    """Rows whose pivot cell holds a matching annotation.

    ``entity_type`` is a hypertype name or a dotted raw-tag prefix;
    ``surface`` is a regular expression searched in annotation surfaces.
    """
    if surface is not None:
        try:
            pattern = re.compile(surface)
        except re.error as exc:
            raise QueryError(f"bad surface pattern: {exc}") from exc
    else:
        pattern = None
    if entity_type is not None and not entity_type:
        raise QueryError("empty entity type")

    def type_ok(ann: EntityAnnotation) -> bool:
        if entity_type is None:
            return True
        if entity_type in HYPERTYPES:
            return ann.type.hypertype == entity_type
        return ann.type.raw == entity_type or ann.type.raw.startswith(entity_type + ".")

    out = []
    for row in mt.rows:
        for ann in mt.row_annotations(row):
            if type_ok(ann) and (pattern is None or pattern.search(ann.surface)):
                out.append(row)
                break
    return out
