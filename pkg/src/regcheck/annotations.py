"""Ingestion of syntactic annotations and dependency-tree queries.

The input is a tab-separated 10-column format (index, form, lemma, upos,
xpos, feats, head, deprel, deps, misc) with '_' for unused columns, blank
lines between sentences and '#' comment lines. Multi-word token ranges and
empty nodes are rejected: producers are instructed not to emit them.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

from .errors import MalformedAnnotation, NoRootVerb

_VERB_TAGS = ("VERB", "AUX")
_PHRASE_LABELS = {
    "VERB": "VP",
    "AUX": "VP",
    "NOUN": "NP",
    "PROPN": "NP",
    "PRON": "NP",
    "ADP": "PP",
    "ADV": "ADVP",
}


@dataclass(frozen=True)
class AnnotationEntry:
    index: int  # 1-based position in the sentence
    form: str
    lemma: str
    upos: str
    xpos: str
    feats: str
    head: int  # 0 for the root
    deprel: str
    deps: str
    misc: str


@dataclass(frozen=True)
class AnnotatedSentence:
    sent_id: int
    entries: tuple[AnnotationEntry, ...]

    def entry(self, index: int) -> AnnotationEntry:
        if not 1 <= index <= len(self.entries):
            raise IndexError(f"token index {index} out of range 1..{len(self.entries)}")
        return self.entries[index - 1]

    @property
    def root_index(self) -> int:
        for e in self.entries:
            if e.head == 0:
                return e.index
        raise MalformedAnnotation("sentence has no root")

    def children(self, index: int) -> list[AnnotationEntry]:
        return [e for e in self.entries if e.head == index]

    def depth(self, index: int) -> int:
        d = 0
        e = self.entry(index)
        while e.head != 0:
            e = self.entry(e.head)
            d += 1
        return d

    @property
    def lemmas(self) -> tuple[str, ...]:
        return tuple(e.lemma for e in self.entries)

    @property
    def text(self) -> str:
        return " ".join(e.form for e in self.entries)


@dataclass(frozen=True)
class Phrase:
    head_index: int
    label: str  # VP | NP | PP | ADVP | OTHER
    token_range: tuple[int, int]  # inclusive interval
    text: str
    non_projective: bool = False


def _iter_lines(stream: str | TextIO | Iterable[str]) -> Iterable[str]:
    if isinstance(stream, str):
        return stream.splitlines()
    if hasattr(stream, "read"):
        return stream.read().splitlines()
    return stream


def parse_annotations(stream: str | TextIO | Iterable[str]) -> list[AnnotatedSentence]:
    """Parse an annotation stream into validated sentences.

    Raises MalformedAnnotation (with the offending line number) on column
    count errors, non-contiguous indices, out-of-range heads, multiple or
    missing roots, cycles, and multi-word/empty-node ids.
    """
    sentences: list[AnnotatedSentence] = []
    pending: list[AnnotationEntry] = []
    pending_line = 0
    sent_id: int | None = None
    next_sent_id = 0

    def flush(at_line: int) -> None:
        nonlocal pending, sent_id, next_sent_id
        if not pending:
            sent_id = None
            return
        _validate_tree(pending, pending_line)
        sid = sent_id if sent_id is not None else next_sent_id
        sentences.append(AnnotatedSentence(sent_id=sid, entries=tuple(pending)))
        next_sent_id = sid + 1
        pending = []
        sent_id = None

    for lineno, raw in enumerate(_iter_lines(stream), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush(lineno)
            continue
        if line.startswith("#"):
            m = line[1:].split("=", 1)
            if len(m) == 2 and m[0].strip() == "sent_id":
                try:
                    sent_id = int(m[1].strip())
                except ValueError:
                    raise MalformedAnnotation(f"bad sent_id {m[1].strip()!r}", lineno)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise MalformedAnnotation(f"expected 10 columns, found {len(cols)}", lineno)
        idx_col = cols[0]
        if "-" in idx_col or "." in idx_col:
            raise MalformedAnnotation(
                f"multi-word tokens / empty nodes are not accepted: {idx_col!r}", lineno
            )
        try:
            index = int(idx_col)
            head = int(cols[6])
        except ValueError:
            raise MalformedAnnotation(f"non-integer index or head: {idx_col!r}/{cols[6]!r}", lineno)
        if not pending:
            pending_line = lineno
        if index != len(pending) + 1:
            raise MalformedAnnotation(
                f"token index {index} not contiguous (expected {len(pending) + 1})", lineno
            )
        pending.append(
            AnnotationEntry(
                index=index,
                form=cols[1],
                lemma=cols[2],
                upos=cols[3],
                xpos=cols[4],
                feats=cols[5],
                head=head,
                deprel=cols[7],
                deps=cols[8],
                misc=cols[9],
            )
        )
    flush(0)
    return sentences


def _validate_tree(entries: list[AnnotationEntry], first_line: int) -> None:
    n = len(entries)
    roots = [e.index for e in entries if e.head == 0]
    if len(roots) != 1:
        raise MalformedAnnotation(f"expected exactly one root, found {len(roots)}", first_line)
    for e in entries:
        if not 0 <= e.head <= n:
            raise MalformedAnnotation(
                f"head {e.head} of token {e.index} out of range 0..{n}", first_line
            )
        if e.head == e.index:
            raise MalformedAnnotation(f"token {e.index} is its own head", first_line)
    # Walk each head chain; revisiting a node before reaching 0 means a cycle.
    for e in entries:
        seen = set()
        cur = e.index
        while cur != 0:
            if cur in seen:
                raise MalformedAnnotation(f"cycle through token {cur}", first_line)
            seen.add(cur)
            cur = entries[cur - 1].head


def find_root_verb(s: AnnotatedSentence) -> int:
    """Index of the sentence's main verb.

    The root entry wins when it is verbal; otherwise the shallowest VERB
    (then AUX) entry, leftmost on ties. Raises NoRootVerb when the sentence
    has no verbal token at all.
    """
    if not s.entries:
        raise NoRootVerb("empty sentence")
    root = s.entry(s.root_index)
    if root.upos in _VERB_TAGS:
        return root.index
    for tag in _VERB_TAGS:
        candidates = [e for e in s.entries if e.upos == tag]
        if candidates:
            return min(candidates, key=lambda e: (s.depth(e.index), e.index)).index
    raise NoRootVerb(f"no verb in sentence {s.sent_id}")


def descendants(s: AnnotatedSentence, head: int) -> set[int]:
    """Indices of ``head`` and everything below it."""
    s.entry(head)
    result = {head}
    frontier = [head]
    while frontier:
        nxt = [e.index for e in s.entries if e.head in frontier and e.index not in result]
        result.update(nxt)
        frontier = nxt
    return result


def subtree_span(s: AnnotatedSentence, head: int) -> tuple[int, int]:
    """Minimal contiguous interval covering the subtree of ``head``."""
    nodes = descendants(s, head)
    return min(nodes), max(nodes)


def phrase_of(s: AnnotatedSentence, head: int) -> Phrase:
    """Phrase projected by ``head``: label from its POS, span from its subtree."""
    nodes = descendants(s, head)
    lo, hi = min(nodes), max(nodes)
    entry = s.entry(head)
    return Phrase(
        head_index=head,
        label=_PHRASE_LABELS.get(entry.upos, "OTHER"),
        token_range=(lo, hi),
        text=" ".join(s.entry(i).form for i in range(lo, hi + 1)),
        non_projective=len(nodes) != hi - lo + 1,
    )


def load_annotations(path: str | Path) -> list[AnnotatedSentence]:
    return parse_annotations(Path(path).read_text(encoding="utf-8"))
