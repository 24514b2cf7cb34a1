"""Unicode normalization helpers used by the aligner and the name projector."""

from __future__ import annotations

import unicodedata


def strip_diacritics(text: str) -> str:
    """Remove combining marks after canonical decomposition (e.g. é -> e)."""
    decomposed = unicodedata.normalize("NFD", text)
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


def fold(text: str) -> str:
    """Case-fold and strip diacritics; the comparison form for Latin tokens."""
    return strip_diacritics(text).casefold()


def is_letter(ch: str) -> bool:
    return unicodedata.category(ch).startswith("L")


def is_digit(ch: str) -> bool:
    return unicodedata.category(ch) == "Nd"
