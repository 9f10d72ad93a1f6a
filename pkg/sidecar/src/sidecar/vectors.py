"""Deterministic embeddings, relevance scores and extractive answers.

``builtin-hash`` embeds a text as an L2-normalized signed bag of hashed
tokens: equal texts always map to equal vectors, no model weights needed.
``builtin-lexical`` scores a sentence by the fraction of the question's
content terms it contains (inherently within [0, 1]). ``builtin-extractive``
returns the best-scoring sentence of a span, clipped to the answer window.
"""

from __future__ import annotations

import hashlib

from .textproc import content_terms, split_sentences, tokenize


def embed_text(text: str, dim: int = 64) -> list[float]:
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    accumulator = [0.0] * dim
    for token in tokenize(text):
        low = token.casefold()
        if not any(c.isalnum() for c in low):
            continue
        digest = hashlib.sha256(low.encode("utf-8")).digest()
        bucket = int.from_bytes(digest[:4], "big") % dim
        sign = 1.0 if digest[4] % 2 == 0 else -1.0
        accumulator[bucket] += sign
    norm = sum(x * x for x in accumulator) ** 0.5
    if norm > 0:
        accumulator = [x / norm for x in accumulator]
    return [round(x, 6) for x in accumulator]


def score_sentence(question: str, sentence: str) -> float:
    """Fraction of question content terms present in the sentence."""
    q_terms = set(content_terms(question))
    if not q_terms:
        return 0.0
    s_terms = set(content_terms(sentence))
    value = len(q_terms & s_terms) / len(q_terms)
    return min(1.0, max(0.0, value))


def extract_answer(
    question: str, span_text: str, max_answer_chars: int = 512
) -> tuple[int, int, float]:
    """(char_start, char_end, confidence) of the best sentence in the span.

    The range never leaves the span and never exceeds the answer window.
    """
    spans = split_sentences(span_text) or [(0, len(span_text))]
    best = None
    for start, end in spans:
        value = score_sentence(question, span_text[start:end])
        if best is None or value > best[2]:
            best = (start, end, value)
    start, end, value = best
    end = min(end, start + max_answer_chars, len(span_text))
    return start, end, round(value, 6)
