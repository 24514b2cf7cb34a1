"""Project pivot proper names into target cells and classify the procedure.

The projector walks an evidence ladder per candidate token: exact surface
match, transliteration/diacritic equality, inflection-stripped lemma match,
bounded edit distance, then bilingual-lexicon mapping for descriptive-base
names. The classifier maps evidence to one of five procedure labels:
Borrowing, Assimilation, Calque, Absence, Other.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .cascade import AnnotatedDocument, EntityAnnotation
from .corpus import Token, tokenize
from .errors import ParseError
from .norm import fold

PROCEDURES = ("Borrowing", "Assimilation", "Calque", "Absence", "Other")

_EVIDENCE_ORDER = {"exact": 0, "translit": 1, "lemma": 2, "edit": 3, "lexicon": 4, "none": 5}

# Latin grapheme-phoneme equivalences applied to comparison forms, so that
# phonetic respellings (Fix/Fiks, Phileas/Fileas) compare equal on the
# transliteration rung.
_GRAPHEME_EQUIV = (("ph", "f"), ("x", "ks"))


def phonetic(folded: str) -> str:
    for src, dst in _GRAPHEME_EQUIV:
        folded = folded.replace(src, dst)
    return folded


@dataclass(frozen=True)
class TransliterationTable:
    script: str  # cyrillic | greek
    rules: tuple[tuple[str, str], ...]  # applied longest-source-first

    @classmethod
    def load(cls, path, script: str) -> "TransliterationTable":
        rules: list[tuple[str, str]] = []
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                if "\t" not in line:
                    raise ParseError("transliteration rule needs source<TAB>target",
                                     line=lineno)
                src, dst = line.split("\t", 1)
                rules.append((src, dst))
        return cls(script, tuple(sorted(rules, key=lambda r: -len(r[0]))))

    def source_alphabet(self) -> set[str]:
        return {ch for src, _ in self.rules for ch in src}

    def covers(self, token: str) -> bool:
        alphabet = self.source_alphabet()
        return any(ch.lower() in alphabet for ch in token)


def transliterate(text: str, table: TransliterationTable) -> str:
    """Deterministic longest-match rewriting; output is lowercased.

    Characters outside the table pass through unchanged (then lowercased).
    """
    out: list[str] = []
    lowered = text.lower()
    i = 0
    while i < len(lowered):
        for src, dst in table.rules:
            if lowered.startswith(src, i):
                out.append(dst)
                i += len(src)
                break
        else:
            out.append(lowered[i])
            i += 1
    return "".join(out)


@dataclass(frozen=True)
class InflectionRules:
    """Suffix-strip rules: case endings first, then derivational suffixes."""

    lang: str
    case_rules: tuple[tuple[str, str], ...] = ()
    derivational_rules: tuple[tuple[str, str], ...] = ()
    min_stem: int = 2

    @classmethod
    def load(cls, path, lang: str) -> "InflectionRules":
        case_rules: list[tuple[str, str]] = []
        deriv_rules: list[tuple[str, str]] = []
        section = "case"
        with open(path, encoding="utf-8") as fh:
            for raw in fh:
                line = raw.rstrip("\n")
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                if stripped.lower() in ("[case]", "[derivational]"):
                    section = stripped[1:-1].lower()
                    continue
                if "\t" in line:
                    suffix, repl = line.split("\t", 1)
                else:
                    suffix, repl = line, ""
                (case_rules if section == "case" else deriv_rules).append(
                    (suffix.strip() or suffix, repl.strip())
                )
        return cls(lang, tuple(case_rules), tuple(deriv_rules))


@dataclass(frozen=True)
class Candidate:
    form: str
    via_case: bool = False
    via_derivational: bool = False


def inflection_candidates(token: str, rules: InflectionRules | None) -> list[Candidate]:
    """Identity plus one round of case stripping, then derivational stripping."""
    out: list[Candidate] = [Candidate(token)]
    seen = {token}
    if rules is None:
        return out
    stage_one = [Candidate(token)]
    for suffix, repl in rules.case_rules:
        if token.endswith(suffix) and len(token) > len(suffix):
            form = token[: len(token) - len(suffix)] + repl
            if len(form) >= rules.min_stem and form not in seen:
                cand = Candidate(form, via_case=True)
                out.append(cand)
                stage_one.append(cand)
                seen.add(form)
    for base in stage_one:
        for suffix, repl in rules.derivational_rules:
            if base.form.endswith(suffix) and len(base.form) > len(suffix):
                form = base.form[: len(base.form) - len(suffix)] + repl
                if len(form) >= rules.min_stem and form not in seen:
                    out.append(Candidate(form, via_case=base.via_case, via_derivational=True))
                    seen.add(form)
    return out


def strip_inflection(token: str, rules: InflectionRules | None) -> set[str]:
    """Lemma candidate set; always contains the token itself."""
    return {c.form for c in inflection_candidates(token, rules)}


def edit_distance(a: str, b: str) -> float:
    """Levenshtein distance normalized by max length, on folded forms."""
    a, b = fold(a), fold(b)
    if a == b:
        return 0.0
    if not a or not b:
        return 1.0
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            cur.append(min(cur[j - 1] + 1, prev[j] + 1, prev[j - 1] + cost))
        prev = cur
    return prev[-1] / max(len(a), len(b))


@dataclass(frozen=True)
class LangResources:
    """Per-target-language matching resources."""

    lang: str
    script: str = "latin"
    translit: TransliterationTable | None = None
    inflection: InflectionRules | None = None
    np_lexicon: dict[str, frozenset[str]] = field(default_factory=dict)
    theta: float = 0.34  # edit-rung threshold

    def comparable(self, token: str) -> str:
        if self.translit is not None and self.translit.covers(token):
            return phonetic(fold(transliterate(token, self.translit)))
        return phonetic(fold(token))


def load_np_lexicon(path) -> dict[str, dict[str, frozenset[str]]]:
    """``lang<TAB>source<TAB>target`` lines, folded on both sides."""
    table: dict[str, dict[str, set[str]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError("lexicon line needs lang<TAB>source<TAB>target",
                                 line=lineno)
            lang, src, dst = parts
            table.setdefault(lang, {}).setdefault(fold(src), set()).add(fold(dst))
    return {
        lang: {src: frozenset(dsts) for src, dsts in entries.items()}
        for lang, entries in table.items()
    }


@dataclass(frozen=True)
class Projection:
    span: tuple[int, int]  # character span in the cell text
    surface: str
    evidence: str  # exact | translit | lemma | edit | lexicon
    score: float
    derivational: bool = False


@dataclass(frozen=True)
class NamePair:
    entity: EntityAnnotation
    target_lang: str
    column_label: str
    row_index: int
    target_span: tuple[int, int] | None
    target_surface: str | None
    label: str
    evidence: str
    score: float
    derivational: bool = False
    note: str = ""
    override: bool = False


@dataclass(frozen=True)
class _TokenMatch:
    evidence: str
    distance: float
    derivational: bool


def _match_token(pivot_word: str, cell_word: str, resources: LangResources) -> _TokenMatch | None:
    """Evidence ladder for one pivot word against one cell word."""
    if cell_word == pivot_word:
        return _TokenMatch("exact", 0.0, False)
    pivot_comp = phonetic(fold(pivot_word))
    if resources.comparable(cell_word) == pivot_comp:
        return _TokenMatch("translit", 0.0, False)
    candidates = inflection_candidates(cell_word, resources.inflection)
    lemma_hits = [
        c
        for c in candidates[1:]
        if c.form == pivot_word or resources.comparable(c.form) == pivot_comp
    ]
    if lemma_hits:
        non_deriv = [c for c in lemma_hits if not c.via_derivational]
        return _TokenMatch("lemma", 0.0, not non_deriv)
    best = None
    for c in candidates:
        d = edit_distance(resources.comparable(c.form), pivot_comp)
        key = (d, c.via_derivational)
        if best is None or key < best[0]:
            best = (key, c)
    if best is not None and best[0][0] <= resources.theta:
        return _TokenMatch("edit", best[0][0], best[1].via_derivational)
    return None


def _word_tokens(text: str) -> list[tuple[int, Token]]:
    return [
        (i, t) for i, t in enumerate(tokenize(text)) if t.kind in ("word", "number")
    ]


def _entity_words(entity: EntityAnnotation) -> list[str]:
    return [
        t for t in re.findall(r"[^\W\d_]+(?:['’-][^\W\d_]+)*|\d+", entity.surface)
    ]


def project_entity(
    entity: EntityAnnotation,
    cell_text: str,
    resources: LangResources,
    pivot_token_freq: dict[str, int] | None = None,
) -> Projection | None:
    """Locate the entity's rendering in the target cell, with evidence.

    Single-word names walk the ladder directly; multiword names anchor on
    the rarest pivot word and extend over adjacent matching tokens; finally
    the bilingual lexicon handles descriptive-base (mixed) names.
    """
    pivot_words = _entity_words(entity)
    if not pivot_words:
        return None
    cell_tokens = _word_tokens(cell_text)
    if not cell_tokens:
        return None

    freq = pivot_token_freq or {}
    # anchor on the rarest capitalized token; lowercase components (articles,
    # appositions) extend the span but make poor anchors
    head_pool = [w for w in pivot_words if w[:1].isupper()] or pivot_words
    head = min(
        head_pool,
        key=lambda w: (freq.get(fold(w), 0), -len(w), pivot_words.index(w)),
    )

    best: tuple[tuple[int, float, int], int, _TokenMatch] | None = None
    for pos, (tok_idx, tok) in enumerate(cell_tokens):
        word = cell_text[tok.offset : tok.end]
        m = _match_token(head, word, resources)
        if m is None:
            continue
        key = (_EVIDENCE_ORDER[m.evidence], m.distance, pos)
        if best is None or key < best[0]:
            best = (key, pos, m)

    if best is not None:
        _, head_pos, head_match = best
        matches: dict[int, _TokenMatch] = {head_pos: head_match}
        remaining = list(pivot_words)
        remaining.remove(head)
        for direction in (-1, 1):
            pos = head_pos + direction
            while remaining and 0 <= pos < len(cell_tokens):
                tok = cell_tokens[pos][1]
                word = cell_text[tok.offset : tok.end]
                found = None
                for pw in remaining:
                    m = _match_token(pw, word, resources)
                    if m is not None:
                        found = (pw, m)
                        break
                if found is None:
                    break
                remaining.remove(found[0])
                matches[pos] = found[1]
                pos += direction
        first = min(matches)
        last = max(matches)
        span = (cell_tokens[first][1].offset, cell_tokens[last][1].end)
        worst = max(matches.values(), key=lambda m: _EVIDENCE_ORDER[m.evidence])
        distance = max(m.distance for m in matches.values())
        return Projection(
            span=span,
            surface=cell_text[span[0] : span[1]],
            evidence=worst.evidence,
            score=1.0 - distance,
            derivational=any(m.derivational for m in matches.values()),
        )

    # lexicon rung: every content word maps via the bilingual lexicon or,
    # for embedded pure names, via the ladder; cell words are tried in all
    # their inflection-stripped variants (calqued nouns decline too)
    lexicon = resources.np_lexicon
    if not lexicon:
        return None
    matched_positions: list[int] = []
    for pw in pivot_words:
        targets = lexicon.get(fold(pw))
        hit = None
        for pos, (tok_idx, tok) in enumerate(cell_tokens):
            word = cell_text[tok.offset : tok.end]
            if targets:
                variants = inflection_candidates(word, resources.inflection)
                if any(resources.comparable(v.form) in targets for v in variants):
                    hit = pos
                    break
            elif _match_token(pw, word, resources) is not None:
                hit = pos
                break
        if hit is None:
            return None
        matched_positions.append(hit)
    first, last = min(matched_positions), max(matched_positions)
    span = (cell_tokens[first][1].offset, cell_tokens[last][1].end)
    return Projection(
        span=span,
        surface=cell_text[span[0] : span[1]],
        evidence="lexicon",
        score=1.0,
        derivational=False,
    )


def classify_procedure(projection: Projection | None) -> tuple[str, str]:
    """Decision table from evidence to (label, note)."""
    if projection is None:
        return "Absence", ""
    if projection.evidence == "exact":
        return "Borrowing", ""
    if projection.evidence == "lexicon":
        return "Calque", ""
    if projection.evidence in ("translit", "lemma", "edit"):
        if projection.derivational:
            return "Other", "derivational form (possessive adjective)"
        return "Assimilation", ""
    return "Absence", ""


def pivot_token_frequencies(annotated: AnnotatedDocument) -> dict[str, int]:
    freq: dict[str, int] = {}
    for sent in annotated.doc.sentences:
        for tok in sent.tokens:
            if tok.kind in ("word", "number"):
                key = fold(sent.text[tok.offset : tok.end])
                freq[key] = freq.get(key, 0) + 1
    return freq


def classify_multitext(
    mt,
    resources_by_label: dict[str, LangResources],
) -> dict[str, list[NamePair]]:
    """Project and classify every pivot annotation into every column."""
    freq = pivot_token_frequencies(mt.pivot)
    out: dict[str, list[NamePair]] = {}
    for col_idx, column in enumerate(mt.columns):
        resources = resources_by_label[column.label]
        pairs: list[NamePair] = []
        for row_idx, row in enumerate(mt.rows):
            cell = mt.cell_text(row, col_idx)
            for ann in sorted(mt.row_annotations(row), key=lambda a: (a.segment, a.span)):
                projection = project_entity(ann, cell, resources, freq)
                label, note = classify_procedure(projection)
                pairs.append(
                    NamePair(
                        entity=ann,
                        target_lang=resources.lang,
                        column_label=column.label,
                        row_index=row_idx,
                        target_span=projection.span if projection else None,
                        target_surface=projection.surface if projection else None,
                        label=label,
                        evidence=projection.evidence if projection else "none",
                        score=projection.score if projection else 0.0,
                        derivational=projection.derivational if projection else False,
                        note=note,
                    )
                )
        out[column.label] = pairs
    return out


def apply_override(pair: NamePair, label: str, note: str = "") -> NamePair:
    """Operator decision wins over the automatic label."""
    if label not in PROCEDURES:
        raise ValueError(f"unknown procedure label {label!r}")
    return replace(pair, label=label, note=note, override=True)


# --- name-pair dump -----------------------------------------------------------

_DUMP_HEADER = [
    "pivotSegId", "surface", "hypertype", "lang", "targetSpan",
    "label", "evidence", "score", "note",
]


def write_pairs(pairs: list[NamePair]) -> bytes:
    from .multitext import escape_cell

    lines = ["\t".join(_DUMP_HEADER)]
    for p in pairs:
        if p.target_span is not None:
            span = f"r{p.row_index}[{p.target_span[0]}:{p.target_span[1]}]={p.target_surface}"
        elif p.row_index >= 0:
            span = f"r{p.row_index}"  # absence: row known, no span
        else:
            span = "-"
        lines.append(
            "\t".join(
                escape_cell(str(v))
                for v in (
                    p.entity.segment, p.entity.surface, p.entity.type.hypertype,
                    p.target_lang, span, p.label, p.evidence,
                    f"{p.score:.4f}", ("*" if p.override else "") + p.note,
                )
            )
        )
    return ("\n".join(lines) + "\n").encode("utf-8")
