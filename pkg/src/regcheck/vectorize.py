"""Term statistics, TF-IDF vectors, BM25 scoring, cosine similarity.

Formulas are pinned so tests can recompute them independently:

  tfidf weight(t) = tf(t) * (ln((N + 1) / (df(t) + 1)) + 1)
  bm25 idf(t)     = ln(1 + (N - df + 0.5) / (df + 0.5))
  bm25 term score = idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avglen))

The TF-IDF idf is smoothed so corpus-wide terms keep non-zero weight; the
BM25 idf uses the +1-inside-log variant so scores stay non-negative.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

from .errors import DimensionMismatch, DuplicateId, InvalidInput, ZeroVector

SparseVector = dict[int, float]


@dataclass(frozen=True)
class TermIndex:
    vocabulary: dict[str, int]
    doc_count: int
    doc_freq: dict[str, int]
    avg_doc_len: float
    doc_term_freqs: tuple[dict[int, int], ...]
    doc_lens: tuple[int, ...]
    stopwords: frozenset[str] = frozenset()


def _content_terms(tokens: Iterable[str], stopwords: frozenset[str]) -> list[str]:
    """Lowercase, drop stopwords and tokens with no alphanumeric character."""
    out = []
    for tok in tokens:
        low = tok.casefold()
        if low in stopwords or not any(c.isalnum() for c in low):
            continue
        out.append(low)
    return out


def build_index(
    segments: Sequence[Sequence[str]], stopwords: frozenset[str] = frozenset()
) -> TermIndex:
    """Build term statistics over tokenized segments (positional ids)."""
    if not segments:
        raise InvalidInput("cannot build an index over an empty corpus")
    vocabulary: dict[str, int] = {}
    doc_freq: Counter[str] = Counter()
    doc_term_freqs: list[dict[int, int]] = []
    doc_lens: list[int] = []
    for tokens in segments:
        terms = _content_terms(tokens, stopwords)
        counts = Counter(terms)
        for term in counts:
            if term not in vocabulary:
                vocabulary[term] = len(vocabulary)
            doc_freq[term] += 1
        doc_term_freqs.append({vocabulary[t]: c for t, c in counts.items()})
        doc_lens.append(len(terms))
    return TermIndex(
        vocabulary=vocabulary,
        doc_count=len(segments),
        doc_freq=dict(doc_freq),
        avg_doc_len=sum(doc_lens) / len(doc_lens),
        doc_term_freqs=tuple(doc_term_freqs),
        doc_lens=tuple(doc_lens),
        stopwords=stopwords,
    )


def tfidf_vector(segment: Sequence[str], idx: TermIndex) -> SparseVector:
    """TF-IDF weights for a segment; terms outside the vocabulary are ignored."""
    counts = Counter(_content_terms(segment, idx.stopwords))
    vec: SparseVector = {}
    n = idx.doc_count
    for term, tf in counts.items():
        term_id = idx.vocabulary.get(term)
        if term_id is None:
            continue
        df = idx.doc_freq[term]
        weight = tf * (math.log((n + 1) / (df + 1)) + 1.0)
        if weight != 0.0:
            vec[term_id] = weight
    return vec


def _norm(v: Mapping[int, float]) -> float:
    return math.sqrt(sum(v[k] * v[k] for k in sorted(v)))


def cosine(
    v: Mapping[int, float] | Sequence[float], w: Mapping[int, float] | Sequence[float]
) -> float:
    """Cosine similarity v.w / (|v||w|); raises ZeroVector on a zero operand.

    Summation runs in sorted key order so the result is reproducible
    regardless of how the operands were assembled.
    """
    if not isinstance(v, Mapping):
        v = {i: x for i, x in enumerate(v) if x != 0.0}
    if not isinstance(w, Mapping):
        w = {i: x for i, x in enumerate(w) if x != 0.0}
    nv, nw = _norm(v), _norm(w)
    if nv == 0.0 or nw == 0.0:
        raise ZeroVector("cosine undefined for zero-norm vector")
    dot = sum(v[k] * w[k] for k in sorted(v.keys() & w.keys()))
    return dot / (nv * nw)


def bm25_score(
    query: Sequence[str],
    segment_id: int,
    idx: TermIndex,
    k1: float = 1.2,
    b: float = 0.75,
) -> float:
    """Okapi BM25 score of a tokenized query against one indexed segment."""
    if k1 <= 0:
        raise InvalidInput(f"k1 must be > 0, got {k1}")
    if not 0 <= b <= 1:
        raise InvalidInput(f"b must be in [0, 1], got {b}")
    if not 0 <= segment_id < idx.doc_count:
        raise IndexError(f"segment id {segment_id} out of range 0..{idx.doc_count - 1}")
    tf_map = idx.doc_term_freqs[segment_id]
    length = idx.doc_lens[segment_id]
    n = idx.doc_count
    score = 0.0
    for term in _content_terms(query, idx.stopwords):
        term_id = idx.vocabulary.get(term)
        if term_id is None or term_id not in tf_map:
            continue
        df = idx.doc_freq[term]
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        tf = tf_map[term_id]
        score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * length / idx.avg_doc_len))
    return score


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vectors: dict[str, tuple[float, ...]] = field(default_factory=dict)

    def __contains__(self, segment_id: str) -> bool:
        return segment_id in self.vectors

    def vector(self, segment_id: str) -> tuple[float, ...]:
        return self.vectors[segment_id]


def load_embeddings(stream: str | TextIO) -> EmbeddingTable:
    """Parse an embedding file: header ``dim=<d>``, then ``<id>\\t<d floats>``."""
    text = stream.read() if hasattr(stream, "read") else stream
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("dim="):
        raise InvalidInput("embedding file must start with a 'dim=<d>' header")
    try:
        dim = int(lines[0][4:].strip())
    except ValueError:
        raise InvalidInput(f"bad dimension header: {lines[0]!r}")
    if dim < 1:
        raise InvalidInput(f"dimension must be >= 1, got {dim}")
    vectors: dict[str, tuple[float, ...]] = {}
    for line in lines[1:]:
        fields = line.split()
        segment_id, values = fields[0], fields[1:]
        if segment_id in vectors:
            raise DuplicateId(f"duplicate embedding id {segment_id!r}")
        if len(values) != dim:
            raise DimensionMismatch(segment_id)
        try:
            vectors[segment_id] = tuple(float(x) for x in values)
        except ValueError:
            raise InvalidInput(f"non-numeric embedding value for {segment_id!r}")
    return EmbeddingTable(dim=dim, vectors=vectors)


def load_embeddings_file(path: str | Path) -> EmbeddingTable:
    return load_embeddings(Path(path).read_text(encoding="utf-8"))
