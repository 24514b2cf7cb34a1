from __future__ import annotations

import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nomina.cascade import (
    AnnotatedDocument,
    EntityAnnotation,
    EntityTypeTag,
    HYPERTYPES,
)
from nomina.corpus import SegmentId, segment_text
from nomina.errors import Unlabeled
from nomina.report import (
    ReportBundle,
    emit_report,
    matrix_from_dict,
    np_inventory,
    procedure_matrix,
    top_frequency_sample,
)
from nomina.transfer import PROCEDURES, NamePair

RAW_BY_HYPERTYPE = {
    "anthroponym": "pers.hum",
    "toponym": "loc.city",
    "ergonym": "prod.boat",
    "pragmonym": "event",
}


def make_annotated(surfaces: list[tuple[str, str]]) -> AnnotatedDocument:
    """surfaces: list of (surface, hypertype); one sentence per annotation."""
    text = " ".join(f"Voici {s} ici." for s, _ in surfaces) or "Rien."
    doc = segment_text(text, "fr")
    anns = []
    for sent, (surface, hypertype) in zip(doc.sentences, surfaces):
        start = next(
            i for i, t in enumerate(sent.tokens)
            if sent.text[t.offset : t.end] == surface.split()[0]
        )
        width = len(surface.split())
        anns.append(
            EntityAnnotation(
                segment=sent.id,
                span=(start, start + width),
                type=EntityTypeTag.of(RAW_BY_HYPERTYPE[hypertype]),
                surface=surface,
            )
        )
    return AnnotatedDocument(doc, tuple(anns))


def pair(label: str, column: str, surface: str = "Fogg") -> NamePair:
    ann = EntityAnnotation(SegmentId(1, 1, 1), (0, 1), EntityTypeTag.of("pers.hum"), surface)
    return NamePair(
        entity=ann, target_lang="en", column_label=column, row_index=0,
        target_span=(0, 4) if label != "Absence" else None,
        target_surface=surface if label != "Absence" else None,
        label=label, evidence="exact" if label == "Borrowing" else "none",
        score=1.0,
    )


class TestInventory:
    def test_untagged_document_all_zero(self):
        inv = np_inventory(make_annotated([]))
        assert all(r.occurrences == 0 and r.distinct == 0 for r in inv.rows)
        assert inv.total_occurrences == 0

    def test_direct_count(self):
        inv = np_inventory(
            make_annotated(
                [("Fogg", "anthroponym"), ("Fogg", "anthroponym"),
                 ("Fix", "anthroponym"), ("Suez", "toponym")]
            )
        )
        by = {r.hypertype: r for r in inv.rows}
        assert (by["anthroponym"].occurrences, by["anthroponym"].distinct) == (3, 2)
        assert (by["toponym"].occurrences, by["toponym"].distinct) == (1, 1)
        assert inv.total_occurrences == 4
        assert inv.total_distinct == 3

    def test_rows_in_fixed_order(self):
        inv = np_inventory(make_annotated([("Noël", "pragmonym")]))
        assert tuple(r.hypertype for r in inv.rows) == HYPERTYPES


class TestSample:
    def test_floor_with_minimum_one(self):
        # 1 distinct name per hypertype: floor(0.1 * 1) = 0 -> minimum 1 each
        surfaces = [
            ("Fogg", "anthroponym"), ("Suez", "toponym"),
            ("Mongolia", "ergonym"), ("Noël", "pragmonym"),
        ]
        sample = top_frequency_sample(make_annotated(surfaces))
        assert len(sample.entries) == 4

    def test_sizes_match_documented_convention(self):
        # the convention reproduces 16/162, 32/320, 3/31 and 1/6
        for distinct, expected in ((162, 16), (320, 32), (31, 3), (6, 1)):
            assert max(1, int(0.10 * distinct)) == expected

    def test_most_frequent_selected_with_coverage(self):
        surfaces = [("Fogg", "anthroponym")] * 6 + [("Fix", "anthroponym")] * 3
        surfaces += [("Aouda", "anthroponym")] * 2  # 3 distinct -> pick 1
        sample = top_frequency_sample(make_annotated(surfaces))
        assert sample.entries == (
            __import__("nomina.report", fromlist=["SampleEntry"]).SampleEntry(
                "anthroponym", "Fogg", 6
            ),
        )
        assert sample.covered_occurrences == 6
        assert sample.total_occurrences == 11
        assert sample.coverage_share == pytest.approx(6 / 11)

    def test_ties_broken_by_first_occurrence(self):
        surfaces = [("Fix", "anthroponym"), ("Fogg", "anthroponym"),
                    ("Fogg", "anthroponym"), ("Fix", "anthroponym")]
        sample = top_frequency_sample(make_annotated(surfaces))
        assert sample.entries[0].surface == "Fix"

    def test_stable_under_annotation_reordering(self):
        surfaces = [("Fogg", "anthroponym"), ("Fix", "anthroponym"),
                    ("Fogg", "anthroponym"), ("Suez", "toponym")]
        base = make_annotated(surfaces)
        shuffled = AnnotatedDocument(base.doc, tuple(reversed(base.annotations)))
        a = top_frequency_sample(base)
        b = top_frequency_sample(shuffled)
        assert {(e.hypertype, e.surface, e.occurrences) for e in a.entries} == {
            (e.hypertype, e.surface, e.occurrences) for e in b.entries
        }


class TestMatrix:
    def test_all_borrowing_row(self):
        m = procedure_matrix([pair("Borrowing", "eng")] * 4)
        assert m.row_percentages("eng") == {
            "Borrowing": 100.0, "Assimilation": 0.0, "Calque": 0.0,
            "Absence": 0.0, "Other": 0.0,
        }

    def test_toy_arithmetic(self):
        pairs = [pair("Borrowing", "eng")] * 2 + [pair("Calque", "eng"), pair("Absence", "eng")]
        m = procedure_matrix(pairs)
        pct = m.row_percentages("eng")
        assert pct["Borrowing"] == 50.0
        assert pct["Calque"] == 25.0
        assert pct["Absence"] == 25.0
        assert pct["Assimilation"] == 0.0

    def test_unlabeled_rejected(self):
        broken = pair("Borrowing", "eng")
        object.__setattr__(broken, "label", "")
        with pytest.raises(Unlabeled):
            procedure_matrix([broken])

    def test_rows_follow_first_appearance(self):
        pairs = [pair("Borrowing", "srb"), pair("Borrowing", "eng"), pair("Calque", "srb")]
        assert procedure_matrix(pairs).row_labels == ("srb", "eng")


class TestEmit:
    def _bundle(self):
        annotated = make_annotated(
            [("Fogg", "anthroponym"), ("Suez", "toponym"), ("Suez", "toponym")]
        )
        pairs = [pair("Borrowing", "eng")] * 3 + [pair("Absence", "eng")]
        return ReportBundle(
            inventory=np_inventory(annotated),
            sample=top_frequency_sample(annotated),
            matrix=procedure_matrix(pairs),
            basis_note="basis: 4 pairs in eng",
        )

    def test_empty_inventory_header_only(self):
        bundle = ReportBundle(
            inventory=np_inventory(make_annotated([])),
            sample=top_frequency_sample(make_annotated([])),
            matrix=procedure_matrix([pair("Borrowing", "eng")]),
        )
        tsv = emit_report(bundle, "tsv").decode()
        assert tsv.splitlines()[0] == "hypertype\toccurrences\tdistinct"

    def test_json_round_trips_matrix(self):
        bundle = self._bundle()
        payload = json.loads(emit_report(bundle, "json"))
        again = matrix_from_dict(payload["matrix"])
        assert again == bundle.matrix

    def test_markdown_has_fixed_hypertype_rows(self):
        md = emit_report(self._bundle(), "markdown").decode()
        idx = [md.index(h) for h in HYPERTYPES]
        assert idx == sorted(idx)

    def test_deterministic_bytes(self):
        bundle = self._bundle()
        for fmt in ("tsv", "markdown", "json"):
            assert emit_report(bundle, fmt) == emit_report(bundle, fmt)


# --- oracle and property tests -------------------------------------------------


def brute_force_recount(annotated: AnnotatedDocument) -> dict[str, tuple[int, int]]:
    """Independent linear-scan recount of the inventory."""
    out: dict[str, tuple[int, int]] = {}
    for h in HYPERTYPES:
        seen = []
        surfaces = set()
        for ann in annotated.annotations:
            if ann.type.hypertype == h:
                seen.append(ann)
                surfaces.add(ann.surface)
        out[h] = (len(seen), len(surfaces))
    return out


def test_inventory_matches_brute_force_on_random_documents():
    rng = random.Random(20250809)
    names = ["Fogg", "Fix", "Aouda", "Suez", "Bombay", "Mongolia", "Noël", "Londres"]
    hts = list(HYPERTYPES)
    for _ in range(100):
        surfaces = [
            (rng.choice(names), rng.choice(hts)) for _ in range(rng.randint(0, 12))
        ]
        annotated = make_annotated(surfaces)
        inv = np_inventory(annotated)
        recount = brute_force_recount(annotated)
        for row in inv.rows:
            assert (row.occurrences, row.distinct) == recount[row.hypertype]


@given(
    st.lists(
        st.tuples(st.sampled_from(PROCEDURES), st.sampled_from(["en", "sr", "bg"])),
        min_size=1,
        max_size=60,
    )
)
def test_matrix_rows_sum_to_hundred(assignments):
    pairs = [pair(label, col) for label, col in assignments]
    m = procedure_matrix(pairs)
    for row in m.row_labels:
        total = sum(m.row_percentages(row).values())
        assert 100.0 - 0.2 - 1e-9 <= total <= 100.0 + 0.2 + 1e-9
