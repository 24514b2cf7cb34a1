from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nomina.align import (
    AlignmentLink,
    Bitext,
    CostParams,
    Edit,
    align_bitext,
    apply_corrections,
    detect_cognates,
    link_cost,
    read_links,
    validate_links,
    write_links,
)
from nomina.corpus import SegmentId, segment_text
from nomina.errors import EditConflict, EmptyDocument, InvalidEdit, LinkShapeError
from tests.synthbitext import exhaustive_min_cost, gold_links_as_ids, make_parallel

PARAMS = CostParams()


def sent(text: str, lang: str = "fr"):
    return segment_text(text, lang).sentences[0]


class TestCognates:
    def test_identical_name_tokens(self):
        got = detect_cognates(sent("Phileas Fogg partit."), sent("Phileas Fogg left.", "en"), 4)
        assert got == {"phileas", "fogg"}

    def test_numbers_always_count(self):
        got = detect_cognates(sent("En 1872, rien."), sent("In 1872, well.", "en"), 4)
        assert got == {"1872"}

    def test_cross_script_yields_nothing(self):
        got = detect_cognates(
            sent("Phileas Fogg partit."), sent("Филеас Фог отиде.", "bg"), 4
        )
        assert got == set()

    def test_diacritics_fold_together(self):
        got = detect_cognates(sent("Noël passa."), sent("Noel passed.", "en"), 4)
        assert got == {"noel"}


class TestLinkCost:
    def test_equal_length_pair_costs_exactly_the_prior(self):
        a = sent("abcd efgh ikjl.")
        b = sent("mnop qrst uvwx.", "en")
        assert len(a.text) == len(b.text)
        params = CostParams(prior_11=0.7, anchor_bonus=0.0)
        assert link_cost([a], [b], params) == pytest.approx(0.7)

    def test_omission_is_the_flat_penalty(self):
        a = sent("abcd efgh.")
        assert link_cost([a], [], PARAMS) == PARAMS.omission_penalty
        assert link_cost([], [a], PARAMS) == PARAMS.omission_penalty

    def test_length_cost_matches_independent_oracle(self):
        # 40 vs 80 chars, c=1, s2=6.8: hand-evaluated with mpmath.ncdf and
        # checked by numeric quadrature of the normal pdf; both give
        # -ln(2*(1-Phi(40/sqrt(272)))) = 4.180335810470649.
        a = sent("x" * 39 + ".")
        b = sent("y" * 79 + ".", "en")
        params = CostParams(anchor_bonus=0.0, cognate_bonus=0.0)
        assert link_cost([a], [b], params) == pytest.approx(4.180335810470649, abs=1e-9)

    def test_illegal_shape_rejected(self):
        a, b = sent("Aa bb."), sent("Cc dd.")
        with pytest.raises(LinkShapeError):
            link_cost([a, a], [b, b], PARAMS)
        with pytest.raises(LinkShapeError):
            link_cost([], [], PARAMS)

    def test_cognates_and_anchor_reduce_cost(self):
        a = sent("Fogg partit vers 1872 enfin.")
        b = sent("Fogg left in 1872 indeed.", "en")
        with_bonus = CostParams(prior_11=2.0)
        without = CostParams(prior_11=2.0, cognate_bonus=0.0, anchor_bonus=0.0)
        assert link_cost([a], [b], with_bonus) < link_cost([a], [b], without)

    def test_never_negative(self):
        a = sent("Fogg Aouda Passepartout 1872 1873 1874.")
        b = sent("Fogg Aouda Passepartout 1872 1873 1874.", "en")
        assert link_cost([a], [b], PARAMS) == 0.0


class TestAlignBitext:
    def test_identical_documents_all_one_to_one(self):
        text = "Premier pas. Second pas.\n\nTroisieme pas. Quatrieme pas."
        pivot = segment_text(text, "fr")
        target = segment_text(text, "en")
        bitext = align_bitext(pivot, target, PARAMS)
        assert [l.kind for l in bitext.links] == ["1:1"] * 4
        assert sum(l.score for l in bitext.links) == pytest.approx(
            len(bitext.links) * PARAMS.prior_11
        )

    def test_synthetic_split_found(self):
        pivot = segment_text(
            "Ka lo 1001. Mi tu renta vasto polder nobis 1002 grandiose magnifico. Zon fal 1003.",
            "fr",
        )
        target = segment_text(
            "Ka lo 1001. Mi tu renta vasto 1002. Polder nobis grandiose magnifico. Zon fal 1003.",
            "en",
        )
        bitext = align_bitext(pivot, target, PARAMS)
        assert [l.kind for l in bitext.links] == ["1:1", "1:2", "1:1"]
        # the DP optimum equals the exhaustive minimum
        assert sum(l.score for l in bitext.links) == pytest.approx(
            exhaustive_min_cost(pivot, target, PARAMS)
        )

    def test_empty_document_rejected(self):
        doc = segment_text("Un.", "fr")
        empty = segment_text("x", "fr")
        object.__setattr__(empty.divisions[0].paragraphs[0], "sentences", ())
        with pytest.raises(EmptyDocument):
            align_bitext(doc, empty, PARAMS)

    def test_result_always_validates(self):
        rng = random.Random(7)
        for _ in range(5):
            pivot, target, _ = make_parallel(rng, rng.randint(3, 8))
            bitext = align_bitext(pivot, target, PARAMS)
            assert validate_links(bitext) == []

    def test_opening_paragraph_against_real_translation(self, opening_plain):
        # The opening French sentence against the first English rendering;
        # whatever shape the DP picks must reach the exhaustive minimum.
        pivot = segment_text(opening_plain, "fr")
        target = segment_text(
            "Mr. Phileas Fogg lived, in 1872, at No. 7, Saville Row, Burlington "
            "Gardens, the house in which Sheridan died in 1814. He was one of the "
            "most noticeable members of the Reform Club, though he seemed always "
            "to avoid attracting attention;",
            "en",
            rules=__import__("nomina.corpus", fromlist=["SegmentationRules"]).SegmentationRules(
                abbreviations=frozenset({"Mr.", "No."})
            ),
        )
        assert len(target.sentences) == 2
        bitext = align_bitext(pivot, target, PARAMS)
        total = sum(l.score for l in bitext.links)
        assert total == pytest.approx(exhaustive_min_cost(pivot, target, PARAMS))
        assert bitext.links[0].kind in ("1:1", "1:2")


class TestValidateLinks:
    def _bitext(self):
        pivot = segment_text("Un x. Deux y.", "fr")
        target = segment_text("One x. Two y.", "en")
        return align_bitext(pivot, target, PARAMS)

    def test_aligner_output_is_clean(self):
        assert validate_links(self._bitext()) == []

    def test_gap_names_the_segment(self):
        bt = self._bitext()
        broken = Bitext(bt.pivot, bt.target, (bt.links[0],))
        violations = validate_links(broken)
        gaps = [v for v in violations if v.kind == "gap"]
        assert {v.segment for v in gaps} == {"d1p1s2"}
        assert {v.side for v in gaps} == {"pivot", "target"}

    def test_overlap_detected(self):
        bt = self._bitext()
        dup = Bitext(bt.pivot, bt.target, bt.links + (bt.links[0],))
        assert any(v.kind == "overlap" for v in validate_links(dup))

    def test_illegal_kind_detected(self):
        bt = self._bitext()
        bad = AlignmentLink(
            pivot=bt.links[0].pivot + bt.links[1].pivot,
            target=bt.links[0].target + bt.links[1].target,
            kind="2:2",
            score=0.0,
        )
        assert any(
            v.kind == "illegal_shape" for v in validate_links(Bitext(bt.pivot, bt.target, (bad,)))
        )


class TestApplyCorrections:
    def _bitext(self):
        pivot = segment_text("Un x. Deux y. Trois z.", "fr")
        target = segment_text("One x. Two y. Three z.", "en")
        return align_bitext(pivot, target, PARAMS)

    def test_merge_two_one_to_one_is_invalid(self):
        with pytest.raises(InvalidEdit):
            apply_corrections(self._bitext(), [Edit("merge", 0)])

    def test_split_two_to_one(self):
        bt = self._bitext()
        merged = apply_corrections(
            bt, [Edit("retype", 0, pieces=((1, 1),)), ]
        )
        # build a 2:1 by merging a 1:1 with an omission, then split it back
        pivot = segment_text("Un x. Deux y.", "fr")
        target = segment_text("Un x deux y.", "en")
        two_one = align_bitext(pivot, target, CostParams(cognate_bonus=3.0))
        assert [l.kind for l in two_one.links] == ["2:1"]
        split = apply_corrections(two_one, [Edit("split", 0, pivot_first=1, target_first=1)])
        assert [l.kind for l in split.links] == ["1:1", "1:0"]
        assert all(l.status == "edited" for l in split.links)
        assert validate_links(split) == []
        assert merged is not None

    def test_split_one_to_two_into_11_and_01(self):
        pivot = segment_text("Mi tu renta vasto polder nobis 1002 grandiose magnifico.", "fr")
        target = segment_text("Mi tu renta vasto 1002. Polder nobis grandiose magnifico.", "en")
        bt = align_bitext(pivot, target, PARAMS)
        assert [l.kind for l in bt.links] == ["1:2"]
        edited = apply_corrections(bt, [Edit("split", 0, pivot_first=1, target_first=1)])
        assert [l.kind for l in edited.links] == ["1:1", "0:1"]

    def test_confirm_only_touches_status(self):
        bt = self._bitext()
        confirmed = apply_corrections(bt, [Edit("confirm", 1)])
        assert confirmed.links[1].status == "confirmed"
        assert confirmed.links[0] == bt.links[0]
        assert confirmed.links[1].pivot == bt.links[1].pivot

    def test_stale_index_conflicts(self):
        with pytest.raises(EditConflict):
            apply_corrections(self._bitext(), [Edit("confirm", 99)])

    def test_atomic_on_failure(self):
        bt = self._bitext()
        with pytest.raises(InvalidEdit):
            apply_corrections(bt, [Edit("confirm", 0), Edit("merge", 0)])
        assert bt.links[0].status == "auto"  # original untouched


class TestLinkFileRoundTrip:
    def test_round_trip(self):
        bt_pivot = segment_text("Un x. Deux y.", "fr")
        bt_target = segment_text("One x. Two y.", "en")
        bt = align_bitext(bt_pivot, bt_target, PARAMS)
        data = write_links(bt.links)
        assert read_links(data) == tuple(
            AlignmentLink(l.pivot, l.target, l.kind, float(f"{l.score:.6f}"), l.status)
            for l in bt.links
        )
        first = data.decode().splitlines()[0].split("\t")
        assert first[0] == "d1p1s1" and first[2] == "1:1" and first[3] == "auto"

    def test_empty_side_dash(self):
        link = AlignmentLink((SegmentId(1, 1, 1),), (), "1:0", 6.9)
        line = write_links([link]).decode().splitlines()[0]
        assert line.split("\t")[1] == "-"
        assert read_links(write_links([link])) == (link,)


# --- optimality and recovery properties --------------------------------------


def test_dp_matches_exhaustive_on_small_random_bitexts():
    rng = random.Random(20250809)
    for case in range(40):
        pivot, target, _ = make_parallel(rng, rng.randint(2, 8))
        got = sum(l.score for l in align_bitext(pivot, target, PARAMS).links)
        want = exhaustive_min_cost(pivot, target, PARAMS)
        assert got == pytest.approx(want, abs=1e-9), f"case {case}"


def test_memoized_oracle_agrees_with_pure_enumeration():
    rng = random.Random(99)
    for _ in range(10):
        pivot, target, _ = make_parallel(rng, rng.randint(2, 5))
        memoized = exhaustive_min_cost(pivot, target, PARAMS, memo=True)
        pure = exhaustive_min_cost(pivot, target, PARAMS, memo=False)
        assert memoized == pytest.approx(pure, abs=1e-12)


def test_anchor_bonus_only_helps_the_gold_path():
    # The gold path's cost is non-increasing as the anchor bonus grows, and
    # the DP optimum never exceeds the gold path's cost.
    rng = random.Random(5)
    pivot, target, gold = make_parallel(rng, 8, omit_p=0.0, insert_p=0.0)
    id_links = gold_links_as_ids(pivot, target, gold)

    def gold_cost(params: CostParams) -> float:
        total = 0.0
        for pids, tids in id_links:
            pg = [pivot.get(s) for s in pids]
            tg = [target.get(s) for s in tids]
            if pg and tg:
                total += link_cost(pg, tg, params)
            else:
                total += params.omission_penalty
        return total

    previous = math.inf
    for bonus in (0.0, 0.75, 1.5, 3.0):
        params = CostParams(anchor_bonus=bonus)
        g = gold_cost(params)
        assert g <= previous + 1e-9
        previous = g
        dp_total = sum(l.score for l in align_bitext(pivot, target, params).links)
        assert dp_total <= g + 1e-9


@given(st.integers(min_value=1, max_value=6), st.randoms(use_true_random=False))
@settings(max_examples=20)
def test_self_alignment_is_all_one_to_one(n, rng):
    words = " ".join(f"Word{i} alpha beta." for i in range(n))
    doc = segment_text(words, "fr")
    bitext = align_bitext(doc, doc, PARAMS)
    assert [l.kind for l in bitext.links] == ["1:1"] * len(doc.sentences)
    assert sum(l.score for l in bitext.links) == pytest.approx(
        len(doc.sentences) * PARAMS.prior_11
    )


edit_specs = st.lists(
    st.tuples(
        st.sampled_from(["merge", "split", "retype", "confirm"]),
        st.integers(min_value=0, max_value=9),
        st.integers(min_value=0, max_value=2),
        st.integers(min_value=0, max_value=2),
    ),
    max_size=5,
)


@given(st.integers(min_value=2, max_value=6), edit_specs)
@settings(max_examples=60)
def test_corrections_never_break_the_partition(n, specs):
    # whatever sequence of edits is thrown at it, apply_corrections either
    # rejects atomically or returns a bitext that still validates
    text = " ".join(f"Phrase numero {1000 + i} ici." for i in range(n))
    pivot = segment_text(text, "fr")
    target = segment_text(text, "en")
    bitext = align_bitext(pivot, target, PARAMS)
    edits = []
    for op, index, a, b in specs:
        if op == "retype":
            edits.append(Edit(op, index, pieces=((a, b), (1 - a if a <= 1 else 0, 1 - b if b <= 1 else 0))))
        else:
            edits.append(Edit(op, index, pivot_first=a, target_first=b))
    try:
        edited = apply_corrections(bitext, edits)
    except (EditConflict, InvalidEdit):
        assert validate_links(bitext) == []  # original untouched
        return
    assert validate_links(edited) == []
