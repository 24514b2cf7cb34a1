"""Sentence alignment of a pivot document with one target document.

Dynamic programming over sentence prefixes with link shapes 1:1, 1:2, 2:1,
1:0 and 0:1. The cost of a link combines a Gaussian character-length term,
a shape prior, a bonus per shared cognate, and a bonus when both groups
open at the same (division, paragraph) coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .corpus import Document, SegmentId, Sentence
from .errors import (
    EditConflict,
    EmptyDocument,
    InvalidEdit,
    LinkShapeError,
    ParseError,
)
from .norm import fold

LINK_KINDS = ("1:1", "1:2", "2:1", "1:0", "0:1")


@dataclass(frozen=True)
class CostParams:
    mean_ratio: float = 1.0  # expected target/pivot character ratio
    variance: float = 6.8  # per-character variance of the ratio model
    prior_11: float = 0.0
    prior_12: float = 2.3
    prior_21: float = 2.3
    omission_penalty: float = 6.9  # flat cost of a 1:0 / 0:1 link
    # Bonuses stay below prior_12 so that absorbing a stray sentence into a
    # 1:2/2:1 link is never free; costs clamp at zero.
    cognate_bonus: float = 0.5
    anchor_bonus: float = 0.5
    min_cognate_length: int = 4

    def __post_init__(self):
        if self.variance <= 0:
            raise ValueError("variance must be positive")
        if self.omission_penalty < 0:
            raise ValueError("omission penalty must be non-negative")

    def prior(self, kind: str) -> float:
        return {
            "1:1": self.prior_11,
            "1:2": self.prior_12,
            "2:1": self.prior_21,
            "1:0": self.omission_penalty,
            "0:1": self.omission_penalty,
        }[kind]


@dataclass(frozen=True)
class AlignmentLink:
    pivot: tuple[SegmentId, ...]
    target: tuple[SegmentId, ...]
    kind: str
    score: float
    status: str = "auto"  # auto | confirmed | edited


@dataclass(frozen=True)
class Bitext:
    pivot: Document
    target: Document
    links: tuple[AlignmentLink, ...]


@dataclass(frozen=True)
class Violation:
    kind: str  # gap | overlap | non_monotone | illegal_shape
    side: str  # pivot | target | link
    segment: str
    detail: str = ""


def _cognate_forms(sentence: Sentence, min_length: int) -> frozenset[str]:
    forms = set()
    for tok in sentence.tokens:
        text = sentence.text[tok.offset : tok.end]
        if tok.kind == "number":
            forms.add(text)
        elif tok.kind == "word" and len(text) >= min_length:
            forms.add(fold(text))
    return frozenset(forms)


def detect_cognates(pivot: Sentence, target: Sentence, min_length: int = 4) -> set[str]:
    """Word tokens shared by both sentences after case/diacritic folding.

    Number tokens count regardless of length.
    """
    return set(_cognate_forms(pivot, min_length) & _cognate_forms(target, min_length))


def _group_kind(np: int, nt: int) -> str:
    kind = f"{np}:{nt}"
    if kind not in LINK_KINDS:
        raise LinkShapeError(f"illegal link shape {kind}")
    return kind


def _length(group: Sequence[Sentence]) -> int:
    return sum(len(s.text) for s in group)


def _gaussian_length_cost(l_pivot: int, l_target: int, params: CostParams) -> float:
    if l_pivot <= 0 or l_target <= 0:
        return 0.0
    delta = (l_target - l_pivot * params.mean_ratio) / math.sqrt(
        l_pivot * params.variance
    )
    tail = 1.0 - 0.5 * (1.0 + math.erf(abs(delta) / math.sqrt(2.0)))
    return -math.log(max(2.0 * tail, 1e-300))


def link_cost(
    pivot_group: Sequence[Sentence],
    target_group: Sequence[Sentence],
    params: CostParams,
    cognate_sets: tuple[Sequence[frozenset[str]], Sequence[frozenset[str]]] | None = None,
) -> float:
    """Non-negative cost of linking the two sentence groups."""
    kind = _group_kind(len(pivot_group), len(target_group))
    if kind in ("1:0", "0:1"):
        return params.omission_penalty
    cost = _gaussian_length_cost(_length(pivot_group), _length(target_group), params)
    cost += params.prior(kind)
    if cognate_sets is not None:
        pset: frozenset[str] = frozenset().union(*cognate_sets[0])
        tset: frozenset[str] = frozenset().union(*cognate_sets[1])
    else:
        pset = frozenset().union(
            *(_cognate_forms(s, params.min_cognate_length) for s in pivot_group)
        )
        tset = frozenset().union(
            *(_cognate_forms(s, params.min_cognate_length) for s in target_group)
        )
    cost -= params.cognate_bonus * len(pset & tset)
    lead_p, lead_t = pivot_group[0].id, target_group[0].id
    if (lead_p.d, lead_p.p) == (lead_t.d, lead_t.p):
        cost -= params.anchor_bonus
    return max(0.0, cost)


# DP moves in tie-break preference order: 1:1 first, then earlier pivot
# consumption.
_MOVES = ((1, 1), (2, 1), (1, 2), (1, 0), (0, 1))


def align_bitext(
    pivot: Document, target: Document, params: CostParams | None = None
) -> Bitext:
    """Minimum-cost monotone link sequence between the two documents."""
    params = params or CostParams()
    psents = list(pivot.sentences)
    tsents = list(target.sentences)
    if not psents or not tsents:
        raise EmptyDocument("cannot align an empty document")
    pcogs = [_cognate_forms(s, params.min_cognate_length) for s in psents]
    tcogs = [_cognate_forms(s, params.min_cognate_length) for s in tsents]

    n, m = len(psents), len(tsents)
    best = [[math.inf] * (m + 1) for _ in range(n + 1)]
    back: list[list[tuple[int, int] | None]] = [[None] * (m + 1) for _ in range(n + 1)]
    best[0][0] = 0.0
    for ii in range(n + 1):
        for jj in range(m + 1):
            if ii == 0 and jj == 0:
                continue
            best_cost = math.inf
            best_move = None
            for a, b in _MOVES:  # preference order settles cost ties
                i, j = ii - a, jj - b
                if i < 0 or j < 0 or math.isinf(best[i][j]):
                    continue
                pg = psents[i:ii]
                tg = tsents[j:jj]
                if pg and tg:
                    cost = link_cost(pg, tg, params, (pcogs[i:ii], tcogs[j:jj]))
                else:
                    cost = params.omission_penalty
                cand = best[i][j] + cost
                if cand < best_cost - 1e-12:
                    best_cost = cand
                    best_move = (a, b)
            best[ii][jj] = best_cost
            back[ii][jj] = best_move

    # backtrack
    links: list[AlignmentLink] = []
    i, j = n, m
    while i > 0 or j > 0:
        move = back[i][j]
        if move is None:  # unreachable in practice
            raise RuntimeError("alignment backtrack failed")
        a, b = move
        pg = psents[i - a : i]
        tg = tsents[j - b : j]
        if pg and tg:
            cost = link_cost(pg, tg, params, None)
        else:
            cost = params.omission_penalty
        links.append(
            AlignmentLink(
                pivot=tuple(s.id for s in pg),
                target=tuple(s.id for s in tg),
                kind=_group_kind(len(pg), len(tg)),
                score=cost,
            )
        )
        i, j = i - a, j - b
    links.reverse()
    return Bitext(pivot, target, tuple(links))


def validate_links(bitext: Bitext) -> list[Violation]:
    """Partition, monotonicity and shape checks; empty list iff valid."""
    violations: list[Violation] = []
    for idx, link in enumerate(bitext.links):
        try:
            kind = _group_kind(len(link.pivot), len(link.target))
            if kind != link.kind:
                violations.append(
                    Violation("illegal_shape", "link", f"#{idx}",
                              f"kind {link.kind} does not match shape {kind}")
                )
        except LinkShapeError as exc:
            violations.append(Violation("illegal_shape", "link", f"#{idx}", str(exc)))

    for side, doc in (("pivot", bitext.pivot), ("target", bitext.target)):
        expected = [s.id for s in doc.sentences]
        expected_set = set(expected)
        flat: list[SegmentId] = []
        for link in bitext.links:
            flat.extend(getattr(link, side))
        counts: dict[SegmentId, int] = {}
        for sid in flat:
            counts[sid] = counts.get(sid, 0) + 1
        for sid, c in counts.items():
            if c > 1:
                violations.append(Violation("overlap", side, str(sid)))
            if sid not in expected_set:
                violations.append(Violation("gap", side, str(sid), "unknown segment"))
        for sid in expected:
            if sid not in counts:
                violations.append(Violation("gap", side, str(sid)))
        if not any(v.kind in ("gap", "overlap") and v.side == side for v in violations):
            if flat != expected:
                first_bad = next(
                    (str(a) for a, b in zip(flat, expected) if a != b), str(flat[-1])
                )
                violations.append(Violation("non_monotone", side, first_bad))
    return violations


# --- manual corrections ------------------------------------------------------


@dataclass(frozen=True)
class Edit:
    """One correction: merge/split/retype reshape links, confirm marks them.

    ``split`` assigns the first ``pivot_first``/``target_first`` sentences of
    the link to the first piece; ``retype`` replaces the link by explicit
    ``pieces`` shapes consuming the same sentences in order.
    """

    op: str  # merge | split | retype | confirm
    index: int
    pivot_first: int = 0
    target_first: int = 0
    pieces: tuple[tuple[int, int], ...] = ()

    @classmethod
    def from_dict(cls, payload: dict) -> "Edit":
        return cls(
            op=payload["op"],
            index=int(payload["index"]),
            pivot_first=int(payload.get("pivot_first", 0)),
            target_first=int(payload.get("target_first", 0)),
            pieces=tuple((int(a), int(b)) for a, b in payload.get("pieces", [])),
        )

    def to_dict(self) -> dict:
        out: dict = {"op": self.op, "index": self.index}
        if self.op == "split":
            out["pivot_first"] = self.pivot_first
            out["target_first"] = self.target_first
        if self.op == "retype":
            out["pieces"] = [list(p) for p in self.pieces]
        return out


def _reshaped(pivot: tuple[SegmentId, ...], target: tuple[SegmentId, ...],
              pieces: Iterable[tuple[int, int]]) -> list[AlignmentLink]:
    links = []
    pi = ti = 0
    for np_, nt in pieces:
        pg = pivot[pi : pi + np_]
        tg = target[ti : ti + nt]
        if len(pg) != np_ or len(tg) != nt:
            raise InvalidEdit("pieces consume more sentences than the link holds")
        try:
            kind = _group_kind(np_, nt)
        except LinkShapeError as exc:
            raise InvalidEdit(str(exc)) from exc
        links.append(AlignmentLink(pg, tg, kind, 0.0, "edited"))
        pi += np_
        ti += nt
    if pi != len(pivot) or ti != len(target):
        raise InvalidEdit("pieces do not consume the whole link")
    return links


def apply_corrections(bitext: Bitext, edits: Sequence[Edit]) -> Bitext:
    """Apply edits atomically; the result must still validate."""
    links = list(bitext.links)
    for edit in edits:
        if not (0 <= edit.index < len(links)):
            raise EditConflict(f"link index {edit.index} does not exist")
        if edit.op == "confirm":
            links[edit.index] = replace(links[edit.index], status="confirmed")
        elif edit.op == "merge":
            if edit.index + 1 >= len(links):
                raise EditConflict("merge requires a following link")
            first, second = links[edit.index], links[edit.index + 1]
            pivot = first.pivot + second.pivot
            target = first.target + second.target
            try:
                kind = _group_kind(len(pivot), len(target))
            except LinkShapeError as exc:
                raise InvalidEdit(
                    f"merge would create shape {len(pivot)}:{len(target)}"
                ) from exc
            links[edit.index : edit.index + 2] = [
                AlignmentLink(pivot, target, kind, 0.0, "edited")
            ]
        elif edit.op == "split":
            link = links[edit.index]
            pieces = (
                (edit.pivot_first, edit.target_first),
                (len(link.pivot) - edit.pivot_first, len(link.target) - edit.target_first),
            )
            links[edit.index : edit.index + 1] = _reshaped(link.pivot, link.target, pieces)
        elif edit.op == "retype":
            link = links[edit.index]
            links[edit.index : edit.index + 1] = _reshaped(
                link.pivot, link.target, edit.pieces
            )
        else:
            raise InvalidEdit(f"unknown edit op {edit.op!r}")
    result = Bitext(bitext.pivot, bitext.target, tuple(links))
    violations = validate_links(result)
    if violations:
        raise InvalidEdit("edits break the link partition", violations)
    return result


# --- link file io ------------------------------------------------------------


def write_links(links: Iterable[AlignmentLink]) -> bytes:
    """Line-oriented link file: pivotIds, targetIds, kind, status, score."""
    lines = []
    for link in links:
        pids = ",".join(str(s) for s in link.pivot) or "-"
        tids = ",".join(str(s) for s in link.target) or "-"
        lines.append(f"{pids}\t{tids}\t{link.kind}\t{link.status}\t{link.score:.6f}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_links(data: bytes) -> tuple[AlignmentLink, ...]:
    links = []
    for lineno, line in enumerate(data.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise ParseError("link line needs 5 tab-separated fields", line=lineno)
        pids, tids, kind, status, score = parts
        links.append(
            AlignmentLink(
                pivot=tuple(SegmentId.parse(x) for x in pids.split(",")) if pids != "-" else (),
                target=tuple(SegmentId.parse(x) for x in tids.split(",")) if tids != "-" else (),
                kind=kind,
                score=float(score),
                status=status,
            )
        )
    return tuple(links)
