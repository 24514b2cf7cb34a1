"""Local grammars compiled to finite-state matchers, applied as a cascade.

Grammar DSL, one rule per line::

    priority  pattern => type(first..last)

Pattern atoms:
  ``"literal"``   token equals the literal (append ``i`` for case-insensitive)
  ``@Cap``        capitalized word token
  ``@Word``       any word token
  ``@Num``        number token
  ``%name``       word token contained in lexicon ``name``
  ``<type>``      an entity already tagged with ``type`` (dotted prefix ok)

The capture range selects which pattern positions fall inside the emitted
tag. Grammars fire in priority order (lower first); at one priority level
competing matches are resolved leftmost-first, then longest. Tokens covered
by an annotation are opaque to token atoms of later rules but remain
matchable through ``<type>`` atoms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .corpus import Document, SegmentId, Sentence, Token
from .errors import GrammarError, LexiconError

DEFAULT_HYPERTYPE_MAP: dict[str, str] = {
    "pers": "anthroponym",
    "org": "anthroponym",
    "loc": "toponym",
    "prod": "ergonym",
    "time": "pragmonym",
    "event": "pragmonym",
}

HYPERTYPES = ("anthroponym", "toponym", "ergonym", "pragmonym")


@dataclass(frozen=True)
class EntityTypeTag:
    raw: str
    hypertype: str

    @classmethod
    def of(cls, raw: str, mapping: dict[str, str] | None = None) -> "EntityTypeTag":
        mapping = mapping if mapping is not None else DEFAULT_HYPERTYPE_MAP
        first = raw.split(".", 1)[0]
        if first not in mapping:
            raise GrammarError(f"entity type {raw!r} has no hypertype mapping")
        return cls(raw, mapping[first])


@dataclass(frozen=True)
class Atom:
    kind: str  # literal | cap | word | num | lexicon | entity
    value: str = ""
    fold_case: bool = False


@dataclass(frozen=True)
class LocalGrammar:
    name: str
    priority: int
    atoms: tuple[Atom, ...]
    tag: EntityTypeTag
    capture: tuple[int, int]  # 0-based half-open range over pattern positions


@dataclass(frozen=True)
class Cascade:
    grammars: tuple[LocalGrammar, ...]  # sorted by (priority, source order)
    lexicons: dict[str, frozenset[str]] = field(default_factory=dict)


@dataclass(frozen=True)
class EntityAnnotation:
    segment: SegmentId
    span: tuple[int, int]  # token range, half-open
    type: EntityTypeTag
    surface: str


@dataclass(frozen=True)
class AnnotatedDocument:
    doc: Document
    annotations: tuple[EntityAnnotation, ...]

    def for_sentence(self, sid: SegmentId) -> tuple[EntityAnnotation, ...]:
        return tuple(a for a in self.annotations if a.segment == sid)


_ATOM_RE = re.compile(
    r"\"(?P<lit>(?:[^\"\\]|\\.)*)\"(?P<fold>i)?"
    r"|@(?P<cls>Cap|Word|Num)"
    r"|%(?P<lex>[\w.-]+)"
    r"|<(?P<ent>[\w.]+)>"
)
_RULE_RE = re.compile(
    r"^\s*(?:(?P<prio>\d+)\s+)?(?P<pattern>.+?)\s*=>\s*(?P<type>[\w.]+)"
    r"\s*\(\s*(?P<a>\d+)\s*\.\.\s*(?P<b>\d+)\s*\)\s*$"
)


def compile_grammar(
    source: str,
    lexicons: dict[str, frozenset[str]] | None = None,
    name: str = "rule",
    hypertype_map: dict[str, str] | None = None,
) -> LocalGrammar:
    """Compile one DSL rule line into a LocalGrammar."""
    lexicons = lexicons or {}
    m = _RULE_RE.match(source)
    if not m:
        raise GrammarError(f"cannot parse rule: {source.strip()!r}", col=0)
    priority = int(m.group("prio")) if m.group("prio") else 0
    atoms: list[Atom] = []
    pattern = m.group("pattern")
    pos = 0
    while pos < len(pattern):
        if pattern[pos].isspace():
            pos += 1
            continue
        am = _ATOM_RE.match(pattern, pos)
        if not am:
            raise GrammarError(f"bad pattern atom at {pattern[pos:]!r}", col=pos)
        if am.group("lit") is not None:
            lit = am.group("lit").replace('\\"', '"').replace("\\\\", "\\")
            atoms.append(Atom("literal", lit, fold_case=bool(am.group("fold"))))
        elif am.group("cls"):
            atoms.append(Atom({"Cap": "cap", "Word": "word", "Num": "num"}[am.group("cls")]))
        elif am.group("lex"):
            lex = am.group("lex")
            if lex not in lexicons:
                raise LexiconError(f"lexicon {lex!r} not provided")
            atoms.append(Atom("lexicon", lex))
        else:
            atoms.append(Atom("entity", am.group("ent")))
        pos = am.end()
    if not atoms:
        raise GrammarError("empty pattern")
    a, b = int(m.group("a")), int(m.group("b"))
    if not (1 <= a <= b <= len(atoms)):
        raise GrammarError(f"capture {a}..{b} out of range for {len(atoms)} atoms")
    for atom in atoms[a - 1 : b]:
        if atom.kind == "entity":
            raise GrammarError("capture range may not include <entity> atoms")
    tag = EntityTypeTag.of(m.group("type"), hypertype_map)
    return LocalGrammar(name, priority, tuple(atoms), tag, (a - 1, b))


def compile_cascade(
    source: str,
    lexicons: dict[str, frozenset[str]] | None = None,
    hypertype_map: dict[str, str] | None = None,
) -> Cascade:
    """Compile a grammar file (one rule per line, # comments)."""
    lexicons = lexicons or {}
    grammars: list[LocalGrammar] = []
    for lineno, line in enumerate(source.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            grammars.append(
                compile_grammar(stripped, lexicons, name=f"rule{lineno}",
                                hypertype_map=hypertype_map)
            )
        except GrammarError as exc:
            raise GrammarError(f"{exc.args[0]}", line=lineno) from exc
    ordered = sorted(enumerate(grammars), key=lambda ig: (ig[1].priority, ig[0]))
    return Cascade(tuple(g for _, g in ordered), dict(lexicons))


def load_lexicon(path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip() for line in fh if line.strip())


# --- matching ---------------------------------------------------------------


def _is_cap(text: str) -> bool:
    return bool(text) and (text[0].isupper() or text[0].istitle())


def _atom_matches_token(atom: Atom, tok: Token, text: str,
                        lexicons: dict[str, frozenset[str]]) -> bool:
    tok_text = text[tok.offset : tok.end]
    if atom.kind == "literal":
        if atom.fold_case:
            return tok_text.casefold() == atom.value.casefold()
        return tok_text == atom.value
    if atom.kind == "cap":
        return tok.kind == "word" and _is_cap(tok_text)
    if atom.kind == "word":
        return tok.kind == "word"
    if atom.kind == "num":
        return tok.kind == "number"
    if atom.kind == "lexicon":
        return tok.kind in ("word", "number") and tok_text in lexicons[atom.value]
    return False


def _type_matches(raw: str, wanted: str) -> bool:
    return raw == wanted or raw.startswith(wanted + ".")


def _sentence_items(sentence: Sentence, annotations: list[EntityAnnotation]):
    """Token/entity item sequence: annotated spans collapse to one item."""
    covered: dict[int, EntityAnnotation] = {}
    inside: set[int] = set()
    for ann in annotations:
        covered[ann.span[0]] = ann
        inside.update(range(ann.span[0], ann.span[1]))
    items: list[tuple[str, int, int, EntityAnnotation | None]] = []
    i = 0
    n = len(sentence.tokens)
    while i < n:
        if i in covered:
            ann = covered[i]
            items.append(("entity", ann.span[0], ann.span[1], ann))
            i = ann.span[1]
        elif i in inside:  # defensive; spans are contiguous
            i += 1
        else:
            items.append(("token", i, i + 1, None))
            i += 1
    return items


def _match_at(grammar: LocalGrammar, items, start: int, sentence: Sentence,
              lexicons: dict[str, frozenset[str]]):
    """Try to match the pattern beginning at item index ``start``."""
    idx = start
    matched: list[tuple[str, int, int]] = []  # (kind, tok_start, tok_end)
    for atom in grammar.atoms:
        if idx >= len(items):
            return None
        kind, t0, t1, ann = items[idx]
        if atom.kind == "entity":
            if kind != "entity" or not _type_matches(ann.type.raw, atom.value):
                return None
        else:
            if kind != "token":
                return None
            if not _atom_matches_token(atom, sentence.tokens[t0], sentence.text, lexicons):
                return None
        matched.append((kind, t0, t1))
        idx += 1
    a, b = grammar.capture
    tok_start = matched[a][1]
    tok_end = matched[b - 1][2]
    return tok_start, tok_end


def run_cascade(doc: Document, cascade: Cascade) -> AnnotatedDocument:
    """Apply grammars in priority order; produce non-overlapping annotations.

    Within one priority level all rule matches compete: accepted leftmost
    first, then longest, then in rule order. Annotations from earlier levels
    are visible to later rules only through ``<type>`` atoms.
    """
    annotations: list[EntityAnnotation] = []
    levels: list[list[LocalGrammar]] = []
    for g in cascade.grammars:
        if levels and levels[-1][0].priority == g.priority:
            levels[-1].append(g)
        else:
            levels.append([g])
    for sentence in doc.sentences:
        sent_anns: list[EntityAnnotation] = []
        for level in levels:
            items = _sentence_items(sentence, sent_anns)
            candidates: list[tuple[int, int, int, LocalGrammar]] = []
            for rule_order, g in enumerate(level):
                for start in range(len(items)):
                    span = _match_at(g, items, start, sentence, cascade.lexicons)
                    if span is not None:
                        candidates.append((span[0], span[1], rule_order, g))
            candidates.sort(key=lambda c: (c[0], -(c[1] - c[0]), c[2]))
            taken = [False] * len(sentence.tokens)
            for ann in sent_anns:
                for i in range(ann.span[0], ann.span[1]):
                    taken[i] = True
            for t0, t1, _, g in candidates:
                if any(taken[i] for i in range(t0, t1)):
                    continue
                for i in range(t0, t1):
                    taken[i] = True
                surface = sentence.text[
                    sentence.tokens[t0].offset : sentence.tokens[t1 - 1].end
                ]
                sent_anns.append(EntityAnnotation(sentence.id, (t0, t1), g.tag, surface))
        sent_anns.sort(key=lambda a: a.span)
        annotations.extend(sent_anns)
    return AnnotatedDocument(doc, tuple(annotations))


# --- tagged-text rendering ---------------------------------------------------

_ENT_RE = re.compile(r'<ENT type="([^"]*)">(.*?)</ENT>', re.DOTALL)


def render_tagged_sentence(sentence: Sentence,
                           annotations: list[EntityAnnotation] | tuple[EntityAnnotation, ...]) -> str:
    """Insert ``<ENT type="...">...</ENT>`` tags into the sentence text."""
    pieces: list[str] = []
    cursor = 0
    for ann in sorted(annotations, key=lambda a: a.span):
        c0 = sentence.tokens[ann.span[0]].offset
        c1 = sentence.tokens[ann.span[1] - 1].end
        pieces.append(sentence.text[cursor:c0])
        pieces.append(f'<ENT type="{ann.type.raw}">{sentence.text[c0:c1]}</ENT>')
        cursor = c1
    pieces.append(sentence.text[cursor:])
    return "".join(pieces)


def render_tagged(annotated: AnnotatedDocument) -> str:
    """Full-document rendering: reconstructed text with entity tags inline."""
    by_sentence: dict[SegmentId, list[EntityAnnotation]] = {}
    for ann in annotated.annotations:
        by_sentence.setdefault(ann.segment, []).append(ann)
    parts: list[str] = []
    for div in annotated.doc.divisions:
        if div.heading is not None:
            parts.append(div.gap_before)
            parts.append(div.heading)
        for para in div.paragraphs:
            for sent in para.sentences:
                parts.append(sent.gap_before)
                parts.append(render_tagged_sentence(sent, by_sentence.get(sent.id, [])))
    parts.append(annotated.doc.trailing)
    return "".join(parts)


def parse_tagged(text: str) -> tuple[str, list[tuple[int, int, str]]]:
    """Inverse of rendering: plain text plus (char_start, char_end, type) spans."""
    plain: list[str] = []
    spans: list[tuple[int, int, str]] = []
    cursor = 0
    plain_len = 0
    for m in _ENT_RE.finditer(text):
        before = text[cursor : m.start()]
        plain.append(before)
        plain_len += len(before)
        surface = m.group(2)
        spans.append((plain_len, plain_len + len(surface), m.group(1)))
        plain.append(surface)
        plain_len += len(surface)
        cursor = m.end()
    plain.append(text[cursor:])
    return "".join(plain), spans


# --- statistics --------------------------------------------------------------


@dataclass(frozen=True)
class CoverageStats:
    np_char_fraction: float
    np_word_fraction: float
    occurrences_total: int
    occurrences_distinct: int


def coverage_stats(annotated: AnnotatedDocument) -> CoverageStats:
    """Character/word coverage of annotations over the sentence text."""
    total_chars = 0
    total_words = 0
    np_chars = 0
    np_words = 0
    by_sentence: dict[SegmentId, list[EntityAnnotation]] = {}
    for ann in annotated.annotations:
        by_sentence.setdefault(ann.segment, []).append(ann)
    for sent in annotated.doc.sentences:
        total_chars += sum(1 for c in sent.text if not c.isspace())
        total_words += sum(1 for t in sent.tokens if t.kind == "word")
        for ann in by_sentence.get(sent.id, []):
            c0 = sent.tokens[ann.span[0]].offset
            c1 = sent.tokens[ann.span[1] - 1].end
            np_chars += sum(1 for c in sent.text[c0:c1] if not c.isspace())
            np_words += sum(
                1 for t in sent.tokens[ann.span[0] : ann.span[1]] if t.kind == "word"
            )
    surfaces = [a.surface for a in annotated.annotations]
    return CoverageStats(
        np_char_fraction=np_chars / total_chars if total_chars else 0.0,
        np_word_fraction=np_words / total_words if total_words else 0.0,
        occurrences_total=len(surfaces),
        occurrences_distinct=len(set(surfaces)),
    )
