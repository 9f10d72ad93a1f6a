"""Loaders for shipped and user-supplied word lists."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def _read_list(text: str) -> list[str]:
    items = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            items.append(line)
    return items


def _shipped(name: str) -> str:
    return resources.files("regcheck.data").joinpath(name).read_text(encoding="utf-8")


def default_stopwords() -> frozenset[str]:
    return frozenset(w.lower() for w in _read_list(_shipped("stopwords.txt")))


def default_abbreviations() -> frozenset[str]:
    return frozenset(w.lower() for w in _read_list(_shipped("abbreviations.txt")))


def default_marker_text() -> str:
    return _shipped("markers.txt")


def load_wordlist(path: str | Path) -> frozenset[str]:
    """Read a user word list (one entry per line, '#' comments)."""
    return frozenset(w.lower() for w in _read_list(Path(path).read_text(encoding="utf-8")))
