"""Question answering over a regulation: span relevance, ranking, answers.

Relevance of a context span is the *maximum* scorer output over its
sentences, never the average: a span whose first sentence matches strongly
stays relevant even when its remaining sentences do not.

Scorers and extractors are pluggable. The built-ins are purely lexical
(BM25 saturated into [0, 1]); externally computed scores and answers enter
through tab-separated files keyed by a stable question hash.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .corpus import ContextSpan, Document, Sentence
from .errors import (
    AnswerUnavailable,
    InvalidInput,
    MissingScore,
    ScorerContractViolation,
)
from .resources import default_stopwords
from .vectorize import bm25_score, build_index


def question_hash(text: str) -> str:
    """Stable 12-hex-digit key for a question (case/whitespace insensitive)."""
    normalized = re.sub(r"\s+", " ", text.strip().casefold())
    return hashlib.sha256(normalized.encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class Question:
    text: str
    tokens: tuple[str, ...]  # lowercased content words, stopwords removed

    @property
    def hash(self) -> str:
        return question_hash(self.text)


def make_question(text: str, stopwords: frozenset[str] | None = None) -> Question:
    if not text.strip():
        raise InvalidInput("question text is empty")
    if stopwords is None:
        stopwords = default_stopwords()
    words = re.findall(r"\w+", text.casefold())
    return Question(text=text, tokens=tuple(w for w in words if w not in stopwords))


class SentenceScorer(Protocol):
    """Deterministic scorer mapping (question, sentence) into [0, 1]."""

    def score(self, question: Question, sentence: Sentence) -> float: ...


class Bm25SentenceScorer:
    """Lexical baseline: BM25 over the document's sentences, mapped to [0, 1).

    The saturation s / (s + 1) keeps the scorer inside the unit-interval
    contract while preserving the BM25 ranking order.
    """

    def __init__(self, doc: Document, k1: float = 1.2, b: float = 0.75):
        self._positions = {s.sent_id: i for i, s in enumerate(doc.sentences)}
        self._index = build_index([s.content_terms() for s in doc.sentences])
        self._k1 = k1
        self._b = b

    def score(self, question: Question, sentence: Sentence) -> float:
        raw = bm25_score(
            list(question.tokens), self._positions[sentence.sent_id], self._index, self._k1, self._b
        )
        return raw / (raw + 1.0)


class FileScorer:
    """Scores precomputed elsewhere: lines ``<question_hash>\\t<sent_id>\\t<score>``."""

    def __init__(self, text: str):
        self._scores: dict[tuple[str, int], float] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise InvalidInput(f"score file line {lineno}: expected 3 fields")
            self._scores[(fields[0], int(fields[1]))] = float(fields[2])

    @classmethod
    def from_path(cls, path: str | Path) -> "FileScorer":
        return cls(Path(path).read_text(encoding="utf-8"))

    def score(self, question: Question, sentence: Sentence) -> float:
        key = (question.hash, sentence.sent_id)
        if key not in self._scores:
            raise MissingScore(
                f"no score for question {key[0]} / sentence {key[1]} in score file"
            )
        return self._scores[key]


@dataclass(frozen=True)
class RankedSpan:
    span_id: str
    relevance: float
    best_sentence_id: int


@dataclass(frozen=True)
class Answer:
    span_id: str
    text: str
    char_range: tuple[int, int]  # within span_text() of the span
    confidence: float


def _checked_score(scorer: SentenceScorer, q: Question, sentence: Sentence) -> float:
    value = scorer.score(q, sentence)
    if not 0.0 <= value <= 1.0:
        raise ScorerContractViolation(
            f"scorer returned {value!r} for sentence {sentence.sent_id}; must be in [0, 1]"
        )
    return value


def span_relevance(
    q: Question, span: ContextSpan, doc: Document, scorer: SentenceScorer
) -> tuple[float, int]:
    """(max sentence score, id of the earliest maximizing sentence)."""
    if not span.sentence_ids:
        raise InvalidInput(f"span {span.span_id} has no sentences")
    best_score = -1.0
    best_id = span.sentence_ids[0]
    for sent_id in span.sentence_ids:
        value = _checked_score(scorer, q, doc.sentence(sent_id))
        if value > best_score:
            best_score, best_id = value, sent_id
    return best_score, best_id


def top_k_spans(
    q: Question,
    spans: list[ContextSpan],
    doc: Document,
    k: int,
    scorer: SentenceScorer,
) -> list[RankedSpan]:
    """Top-K spans by relevance, document order breaking ties."""
    if k < 1:
        raise InvalidInput(f"K must be >= 1, got {k}")
    ranked = []
    for position, span in enumerate(spans):
        relevance, best_id = span_relevance(q, span, doc, scorer)
        ranked.append((position, RankedSpan(span.span_id, relevance, best_id)))
    ranked.sort(key=lambda pair: (-pair[1].relevance, pair[0]))
    return [r for _, r in ranked[:k]]


def all_zero_relevance(ranked: list[RankedSpan]) -> bool:
    """True when no span scored above zero (results need a caveat, not silence)."""
    return bool(ranked) and all(r.relevance == 0.0 for r in ranked)


def span_text(doc: Document, span: ContextSpan) -> str:
    """Canonical text of a span: sentence texts joined by single spaces.

    Answer character ranges are defined against this string.
    """
    return " ".join(doc.sentence(i).text for i in span.sentence_ids)


class AnswerExtractor(Protocol):
    def extract(self, q: Question, span: ContextSpan, doc: Document) -> Answer: ...


class BaselineExtractor:
    """Return the best-scoring sentence of the span as the answer."""

    def __init__(self, scorer: SentenceScorer):
        self._scorer = scorer

    def extract(self, q: Question, span: ContextSpan, doc: Document) -> Answer:
        if not span.sentence_ids:
            raise AnswerUnavailable(f"span {span.span_id} is empty")
        relevance, best_id = span_relevance(q, span, doc, self._scorer)
        full = span_text(doc, span)
        sentence = doc.sentence(best_id)
        start = full.index(sentence.text)
        return Answer(
            span_id=span.span_id,
            text=sentence.text,
            char_range=(start, start + len(sentence.text)),
            confidence=relevance,
        )


class FileExtractor:
    """Answers precomputed elsewhere:
    lines ``<question_hash>\\t<span_id>\\t<char_start>\\t<char_end>\\t<confidence>``."""

    def __init__(self, text: str):
        self._rows: dict[tuple[str, str], tuple[int, int, float]] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise InvalidInput(f"answer file line {lineno}: expected 5 fields")
            self._rows[(fields[0], fields[1])] = (
                int(fields[2]),
                int(fields[3]),
                float(fields[4]),
            )

    @classmethod
    def from_path(cls, path: str | Path) -> "FileExtractor":
        return cls(Path(path).read_text(encoding="utf-8"))

    def extract(self, q: Question, span: ContextSpan, doc: Document) -> Answer:
        if not span.sentence_ids:
            raise AnswerUnavailable(f"span {span.span_id} is empty")
        key = (q.hash, span.span_id)
        if key not in self._rows:
            raise AnswerUnavailable(
                f"no answer for question {key[0]} / span {key[1]} in answer file"
            )
        start, end, confidence = self._rows[key]
        full = span_text(doc, span)
        return Answer(
            span_id=span.span_id,
            text=full[start:end],
            char_range=(start, end),
            confidence=confidence,
        )


def extract_answer(
    q: Question, span: ContextSpan, doc: Document, extractor: AnswerExtractor
) -> Answer:
    return extractor.extract(q, span, doc)
