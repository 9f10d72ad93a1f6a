"""Sentence splitting, tokenization and the shared question-hash convention.

These mirror the interchange conventions of the consuming toolkit: edge
punctuation becomes separate tokens, sentences end at ``. ? !`` followed by
whitespace and a capital or digit (abbreviations excepted), and question
keys are the first 12 hex digits of the SHA-256 of the casefolded,
whitespace-collapsed question text.
"""

from __future__ import annotations

import hashlib
import re

_TERMINATORS = frozenset(".?!")
_EDGE_PUNCT = frozenset(".,;:!?()[]{}\"'`«»…“”‘’—–-/")
_ABBREVIATIONS = frozenset(
    a.casefold()
    for a in (
        "Art.", "Arts.", "No.", "Nos.", "e.g.", "i.e.", "etc.", "cf.", "vs.",
        "v.", "p.", "pp.", "para.", "paras.", "Sec.", "Mr.", "Mrs.", "Ms.",
        "Dr.", "St.", "Inc.", "Ltd.", "Co.",
    )
)

STOPWORDS = frozenset(
    """a an and are as at be been by can could did do does for from had has
    have he her his how i in into is it its may might must of on or our she
    shall should so such that the their them they this those to under upon
    was we were what when where which while who why will with would you
    your""".split()
)


def question_hash(text: str) -> str:
    normalized = re.sub(r"\s+", " ", text.strip().casefold())
    return hashlib.sha256(normalized.encode("utf-8")).hexdigest()[:12]


def split_sentences(text: str) -> list[tuple[int, int]]:
    """(start, end) spans of sentences, surrounding whitespace excluded."""
    spans: list[tuple[int, int]] = []
    n = len(text)
    start = 0
    i = 0
    while i < n:
        if text[i] in _TERMINATORS:
            j = i + 1
            while j < n and text[j].isspace():
                j += 1
            boundary = j > i + 1 and j < n and (text[j].isupper() or text[j].isdigit())
            if boundary and text[i] == ".":
                k = i
                while k > 0 and not text[k - 1].isspace():
                    k -= 1
                if text[k : i + 1].casefold() in _ABBREVIATIONS:
                    boundary = False
            if boundary:
                spans.append((start, i + 1))
                start = j
                i = j
                continue
        i += 1
    if text[start:].strip():
        spans.append((start, n))
    trimmed = []
    for s, e in spans:
        while s < e and text[s].isspace():
            s += 1
        while e > s and text[e - 1].isspace():
            e -= 1
        if e > s:
            trimmed.append((s, e))
    return trimmed


def tokenize(text: str) -> list[str]:
    """Whitespace chunks with leading/trailing punctuation detached."""
    tokens: list[str] = []
    for chunk in text.split():
        head: list[str] = []
        tail: list[str] = []
        while chunk and chunk[0] in _EDGE_PUNCT:
            head.append(chunk[0])
            chunk = chunk[1:]
        while chunk and chunk[-1] in _EDGE_PUNCT:
            tail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(head)
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(tail))
    return tokens


def content_terms(text: str) -> list[str]:
    """Lowercased word tokens with stopwords removed."""
    return [
        t
        for t in (tok.casefold() for tok in tokenize(text))
        if any(c.isalnum() for c in t) and t not in STOPWORDS
    ]
