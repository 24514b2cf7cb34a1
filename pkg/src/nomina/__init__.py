"""Proper-name tracking across aligned multilingual corpora."""

__version__ = "0.1.0"
