"""Hierarchical text model: divisions, paragraphs, sentences with stable ids.

A raw text is segmented into a Document whose sentences carry canonical
``d{d}p{p}s{s}`` identifiers. Whitespace between segments is recorded so that
concatenating the pieces reproduces the normalized source text exactly.
Documents serialize to a small TEI-like XML profile and back.
"""

from __future__ import annotations

import logging
import re
import unicodedata
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from hashlib import sha256
from xml.sax.saxutils import escape

from .errors import EmptyText, IdError, ParseError
from .norm import is_digit, is_letter

logger = logging.getLogger(__name__)

SCRIPTS = ("latin", "cyrillic", "greek")

XML_ID = "{http://www.w3.org/XML/1998/namespace}id"

# Characters that may join two letters inside one word token.
_WORD_JOINERS = "-'’"

_TERMINALS = ".!?…"
# Closing quotes/brackets that may sit between the terminal and the space.
_CLOSERS = "»\"')]”’"
# Characters that may open a sentence besides an uppercase letter.
_OPENERS = "«\"“‘„("


@dataclass(frozen=True, order=True)
class SegmentId:
    """Canonical sentence address: division, paragraph, sentence (1-based)."""

    d: int
    p: int
    s: int

    def __str__(self) -> str:
        return f"d{self.d}p{self.p}s{self.s}"

    @classmethod
    def parse(cls, text: str) -> "SegmentId":
        m = re.fullmatch(r"d(\d+)p(\d+)s(\d+)", text)
        if not m:
            raise ParseError(f"bad segment id {text!r}")
        return cls(int(m.group(1)), int(m.group(2)), int(m.group(3)))


@dataclass(frozen=True)
class Token:
    offset: int
    length: int
    kind: str  # word | number | punct

    @property
    def end(self) -> int:
        return self.offset + self.length

    def text_in(self, sentence_text: str) -> str:
        return sentence_text[self.offset : self.end]


@dataclass(frozen=True)
class Sentence:
    id: SegmentId
    text: str
    gap_before: str = ""
    tokens: tuple[Token, ...] = ()


@dataclass(frozen=True)
class Paragraph:
    sentences: tuple[Sentence, ...]


@dataclass(frozen=True)
class Division:
    heading: str | None
    gap_before: str  # whitespace before the heading line; "" when no heading
    paragraphs: tuple[Paragraph, ...]


@dataclass(frozen=True)
class Document:
    lang: str
    script: str
    divisions: tuple[Division, ...]
    trailing: str = ""

    @property
    def sentences(self) -> tuple[Sentence, ...]:
        return tuple(
            s for d in self.divisions for p in d.paragraphs for s in p.sentences
        )

    def get(self, sid: SegmentId) -> Sentence:
        return self.divisions[sid.d - 1].paragraphs[sid.p - 1].sentences[sid.s - 1]

    def reconstruct(self) -> str:
        """Rebuild the normalized source text from segments and recorded gaps."""
        parts: list[str] = []
        for div in self.divisions:
            if div.heading is not None:
                parts.append(div.gap_before)
                parts.append(div.heading)
            for para in div.paragraphs:
                for sent in para.sentences:
                    parts.append(sent.gap_before)
                    parts.append(sent.text)
        parts.append(self.trailing)
        return "".join(parts)

    def content_hash(self) -> str:
        return sha256(serialize_tei(self)).hexdigest()


@dataclass(frozen=True)
class SegmentationRules:
    """Abbreviations that never end a sentence, and division-marker patterns."""

    abbreviations: frozenset[str] = frozenset()
    division_markers: tuple[str, ...] = ()

    @classmethod
    def load(cls, path) -> "SegmentationRules":
        abbrevs: set[str] = set()
        markers: list[str] = []
        section = "abbreviations"
        with open(path, encoding="utf-8") as fh:
            for raw in fh:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if line.lower() in ("[abbreviations]", "[divisions]"):
                    section = line[1:-1].lower()
                    continue
                if section == "divisions":
                    markers.append(line)
                else:
                    abbrevs.add(line)
        return cls(frozenset(abbrevs), tuple(markers))


def tokenize(text: str, lang: str = "und") -> tuple[Token, ...]:
    """Split a sentence into word / number / punct tokens.

    Word tokens are maximal letter runs, allowing hyphens and apostrophes
    between letters ("Saville-row", "Cromarty'ego"). Offsets are Unicode
    scalar positions into ``text``.
    """
    del lang  # tokenization is currently language-independent
    tokens: list[Token] = []
    n = len(text)
    i = 0
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if is_letter(ch) or unicodedata.category(ch) == "Mn":
            j = i + 1
            while j < n:
                cj = text[j]
                if is_letter(cj) or unicodedata.category(cj) == "Mn":
                    j += 1
                elif cj in _WORD_JOINERS and j + 1 < n and is_letter(text[j + 1]):
                    j += 1
                else:
                    break
            tokens.append(Token(i, j - i, "word"))
            i = j
        elif is_digit(ch):
            j = i + 1
            while j < n and is_digit(text[j]):
                j += 1
            tokens.append(Token(i, j - i, "number"))
            i = j
        else:
            tokens.append(Token(i, 1, "punct"))
            i += 1
    return tuple(tokens)


def _normalize(raw: str) -> str:
    return unicodedata.normalize("NFC", raw).replace("\r\n", "\n").replace("\r", "\n")


def _abbrev_before(text: str, dot: int, abbreviations: frozenset[str]) -> bool:
    """Check whether the word ending at ``dot`` (inclusive) is an abbreviation."""
    if not abbreviations:
        return False
    j = dot
    while j > 0 and (is_letter(text[j - 1]) or is_digit(text[j - 1]) or text[j - 1] == "."):
        j -= 1
    return text[j : dot + 1] in abbreviations


def _split_sentence_spans(
    text: str, start: int, end: int, abbreviations: frozenset[str]
) -> list[tuple[int, int]]:
    """Sentence spans (trimmed) inside text[start:end]."""
    breaks: list[int] = []
    i = start
    while i < end:
        ch = text[i]
        if ch in _TERMINALS:
            j = i + 1
            while j < end and text[j] in _CLOSERS:
                j += 1
            k = j
            while k < end and text[k].isspace():
                k += 1
            if k < end and k > j and (text[k].isupper() or text[k] in _OPENERS):
                if not (ch == "." and _abbrev_before(text, i, abbreviations)):
                    breaks.append(j)
            i = j
        else:
            i += 1
    spans: list[tuple[int, int]] = []
    piece_start = start
    for b in breaks + [end]:
        a, z = piece_start, b
        while a < z and text[a].isspace():
            a += 1
        while z > a and text[z - 1].isspace():
            z -= 1
        if z > a:
            spans.append((a, z))
        piece_start = b
    return spans


def segment_text(
    raw: str,
    lang: str,
    rules: SegmentationRules | None = None,
    script: str = "latin",
) -> Document:
    """Segment plain text into a Document.

    Divisions open at lines matching a configured marker pattern (the line
    becomes the division heading, not a sentence); paragraphs split on blank
    lines; sentences split on terminal punctuation followed by whitespace and
    an uppercase-or-quote opener, unless the preceding word is a listed
    abbreviation.
    """
    rules = rules or SegmentationRules()
    text = _normalize(raw)
    if not text.strip():
        raise EmptyText("no text to segment")
    marker_res = [re.compile(p) for p in rules.division_markers]

    # Line inventory with absolute offsets.
    lines: list[tuple[int, int]] = []  # (start, end) excluding the newline
    pos = 0
    for chunk in text.split("\n"):
        lines.append((pos, pos + len(chunk)))
        pos += len(chunk) + 1

    def line_kind(a: int, b: int) -> str:
        stripped = text[a:b].strip()
        if not stripped:
            return "blank"
        if any(m.match(stripped) for m in marker_res):
            return "marker"
        return "normal"

    # Group lines into divisions (opened by marker lines) and paragraphs.
    divisions: list[Division] = []
    cur_heading: tuple[str, str] | None = None  # (heading text, gap before it)
    cur_paragraphs: list[Paragraph] = []
    cur_para_lines: list[tuple[int, int]] = []
    cursor = 0  # end of the previous emitted piece
    d_idx = 1
    p_idx = 1

    def close_paragraph() -> None:
        nonlocal cur_para_lines, cursor, p_idx
        if not cur_para_lines:
            return
        start = cur_para_lines[0][0]
        end = cur_para_lines[-1][1]
        spans = _split_sentence_spans(text, start, end, rules.abbreviations)
        sentences: list[Sentence] = []
        gap_cursor = cursor
        for s_idx, (a, z) in enumerate(spans, start=1):
            sent_text = text[a:z]
            sentences.append(
                Sentence(
                    id=SegmentId(d_idx, p_idx, s_idx),
                    text=sent_text,
                    gap_before=text[gap_cursor:a],
                    tokens=tokenize(sent_text, lang),
                )
            )
            gap_cursor = z
        cursor = gap_cursor
        cur_paragraphs.append(Paragraph(tuple(sentences)))
        cur_para_lines = []
        p_idx += 1

    def close_division() -> None:
        nonlocal cur_heading, cur_paragraphs, d_idx, p_idx
        close_paragraph()
        if cur_heading is None and not cur_paragraphs:
            return
        heading, gap = cur_heading if cur_heading is not None else (None, "")
        divisions.append(Division(heading, gap, tuple(cur_paragraphs)))
        cur_heading = None
        cur_paragraphs = []
        d_idx += 1
        p_idx = 1

    for a, b in lines:
        kind = line_kind(a, b)
        if kind == "marker":
            close_division()
            # Heading piece covers the non-whitespace core of the line.
            ha, hb = a, b
            while ha < hb and text[ha].isspace():
                ha += 1
            while hb > ha and text[hb - 1].isspace():
                hb -= 1
            cur_heading = (text[ha:hb], text[cursor:ha])
            cursor = hb
        elif kind == "blank":
            close_paragraph()
        else:
            cur_para_lines.append((a, b))
    close_division()

    doc = Document(
        lang=lang,
        script=script,
        divisions=tuple(divisions),
        trailing=text[cursor:],
    )
    return doc


def serialize_tei(doc: Document) -> bytes:
    """Render the Document as deterministic TEI-lite XML (UTF-8)."""
    out: list[str] = ['<?xml version="1.0" encoding="UTF-8"?>\n']
    out.append(f'<text lang="{escape(doc.lang)}" script="{escape(doc.script)}">')
    for di, div in enumerate(doc.divisions, start=1):
        if div.heading is not None:
            out.append(escape(div.gap_before))
            out.append(f'<d xml:id="d{di}">')
            out.append(f"<head>{escape(div.heading)}</head>")
        else:
            first_gap = ""
            if div.paragraphs and div.paragraphs[0].sentences:
                first_gap = div.paragraphs[0].sentences[0].gap_before
            out.append(escape(first_gap))
            out.append(f'<d xml:id="d{di}">')
        for pi, para in enumerate(div.paragraphs, start=1):
            first = para.sentences[0] if para.sentences else None
            if first is not None and not (pi == 1 and div.heading is None):
                out.append(escape(first.gap_before))
            out.append(f'<p xml:id="d{di}p{pi}">')
            for si, sent in enumerate(para.sentences, start=1):
                if si > 1:
                    out.append(escape(sent.gap_before))
                out.append(f'<s xml:id="d{di}p{pi}s{si}">{escape(sent.text)}</s>')
            out.append("</p>")
        out.append("</d>")
    out.append(escape(doc.trailing))
    out.append("</text>\n")
    return "".join(out).encode("utf-8")


def _expect_id(elem: ET.Element, expected: str) -> None:
    got = elem.get(XML_ID)
    if got != expected:
        raise IdError(f"expected xml:id {expected!r}, found {got!r}")


def parse_tei(data: bytes) -> Document:
    """Parse TEI-lite XML back into a Document.

    Unknown inline markup inside ``<s>`` is flattened to its text content
    with a warning; stray non-whitespace text outside sentences is an error.
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ParseError(f"malformed XML: {exc.msg if hasattr(exc, 'msg') else exc}",
                         line=line, col=col) from exc
    if root.tag != "text":
        raise ParseError(f"expected <text> root, found <{root.tag}>")
    lang = root.get("lang", "und")
    script = root.get("script", "latin")

    def ws_only(s: str | None, where: str) -> str:
        s = s or ""
        if s.strip():
            raise ParseError(f"unexpected text content {s.strip()[:20]!r} {where}")
        return s

    divisions: list[Division] = []
    pending_gap = ws_only(root.text, "before first <d>")
    d_elems = list(root)
    for di, d_el in enumerate(d_elems, start=1):
        if d_el.tag != "d":
            raise ParseError(f"expected <d>, found <{d_el.tag}>")
        _expect_id(d_el, f"d{di}")
        children = list(d_el)
        heading: str | None = None
        div_gap = ""
        if children and children[0].tag == "head":
            head_el = children[0]
            heading = head_el.text or ""
            heading += "".join(
                (sub.text or "") + (sub.tail or "") for sub in head_el
            )
            div_gap = pending_gap
            sent_gap = ws_only(head_el.tail, "after </head>")
            ws_only(d_el.text, "between <d> and <head>")
            children = children[1:]
        else:
            sent_gap = pending_gap + ws_only(d_el.text, "inside <d>")
        paragraphs: list[Paragraph] = []
        for pi, p_el in enumerate(children, start=1):
            if p_el.tag != "p":
                raise ParseError(f"expected <p>, found <{p_el.tag}>")
            _expect_id(p_el, f"d{di}p{pi}")
            if pi > 1:
                sent_gap = ws_only(children[pi - 2].tail, "between paragraphs")
            sent_gap += ws_only(p_el.text, "between <p> and first <s>")
            sentences: list[Sentence] = []
            s_elems = list(p_el)
            for si, s_el in enumerate(s_elems, start=1):
                if s_el.tag != "s":
                    raise ParseError(f"expected <s>, found <{s_el.tag}>")
                _expect_id(s_el, f"d{di}p{pi}s{si}")
                if si > 1:
                    sent_gap = ws_only(s_elems[si - 2].tail, "between sentences")
                if len(s_el):
                    logger.warning(
                        "flattening unknown markup inside <s xml:id=%r>: %s",
                        s_el.get(XML_ID),
                        [sub.tag for sub in s_el],
                    )
                stext = "".join(s_el.itertext())
                sentences.append(
                    Sentence(
                        id=SegmentId(di, pi, si),
                        text=stext,
                        gap_before=sent_gap,
                        tokens=tokenize(stext, lang),
                    )
                )
                sent_gap = ""
            paragraphs.append(Paragraph(tuple(sentences)))
            if s_elems:
                sent_gap = ""
        divisions.append(Division(heading, div_gap, tuple(paragraphs)))
        if children:
            ws_only(children[-1].tail, "after last <p>")
        pending_gap = d_el.tail or ""
        if di < len(d_elems):
            pending_gap = ws_only(pending_gap, "between divisions")
    trailing = ws_only(pending_gap, "after last <d>")
    return Document(lang=lang, script=script, divisions=tuple(divisions), trailing=trailing)
