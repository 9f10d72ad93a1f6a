"""Document model: articles, sentences, tokens, context spans, cross references.

A regulation or policy enters as UTF-8 plain text plus a small key/value
metadata mapping (``doc_id`` required). Lines matching ``Article <n>`` open a
new article; blank lines separate paragraphs. Sentences and tokens carry
character offsets back into the source text so the original can always be
reconstructed — legal text is never silently dropped or rewritten.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidInput, MissingMetadata
from .resources import default_abbreviations, default_stopwords

DEFAULT_TOKEN_BUDGET = 512

_ARTICLE_MARKER = re.compile(r"^\s*Article\s+([0-9A-Za-z]+)\s*$")
_TERMINATORS = frozenset(".?!")
# Characters peeled off chunk edges as standalone tokens.
_EDGE_PUNCT = frozenset(".,;:!?()[]{}\"'`«»…“”‘’—–-/")
_XREF = re.compile(
    r"\bArticles?\s+\d+(?:(?:\s*,\s*|\s+and\s+|\s+or\s+)\d+)*", re.IGNORECASE
)
_XREF_NUM = re.compile(r"\d+")


@dataclass(frozen=True)
class Token:
    surface: str
    lower: str
    char_offset: int  # relative to the owning sentence text
    is_stopword: bool

    @property
    def is_word(self) -> bool:
        return any(c.isalnum() for c in self.surface)


@dataclass(frozen=True)
class Sentence:
    sent_id: int
    article_id: str
    text: str
    tokens: tuple[Token, ...]
    char_offset: int  # offset of text in the source document

    def content_terms(self) -> list[str]:
        """Lowercased word tokens with stopwords removed."""
        return [t.lower for t in self.tokens if t.is_word and not t.is_stopword]


@dataclass(frozen=True)
class Article:
    article_id: str
    paragraphs: tuple[str, ...]
    sentences: tuple[Sentence, ...]


@dataclass(frozen=True)
class CrossReference:
    source_sentence: int
    target: str
    char_offset: int  # document-level offset of the referenced number


@dataclass(frozen=True)
class ContextSpan:
    span_id: str
    article_id: str
    sentence_ids: tuple[int, ...]
    token_count: int
    oversized: bool = False


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    articles: tuple[Article, ...]
    cross_references: tuple[CrossReference, ...] = ()
    source_text: str = ""

    @property
    def sentences(self) -> tuple[Sentence, ...]:
        return tuple(s for a in self.articles for s in a.sentences)

    def sentence(self, sent_id: int) -> Sentence:
        for s in self.sentences:
            if s.sent_id == sent_id:
                return s
        raise IndexError(f"no sentence with id {sent_id}")


def split_sentences(
    text: str, abbreviations: frozenset[str] | None = None
) -> list[tuple[int, int]]:
    """Return (start, end) spans of sentences in ``text``.

    A sentence ends at a terminator (. ? !) followed by whitespace and a
    capital letter or digit, unless the terminator closes a known
    abbreviation. Spans exclude surrounding whitespace; the gaps between
    consecutive spans are whitespace only, so the original text can be
    reassembled from offsets.
    """
    if abbreviations is None:
        abbreviations = default_abbreviations()
    spans: list[tuple[int, int]] = []
    n = len(text)
    start = 0
    i = 0
    while i < n:
        c = text[i]
        if c in _TERMINATORS:
            j = i + 1
            while j < n and text[j].isspace():
                j = j + 1
            boundary = j > i + 1 and j < n and (text[j].isupper() or text[j].isdigit())
            if boundary and c == ".":
                # Word containing this period, scanned back to whitespace.
                k = i
                while k > 0 and not text[k - 1].isspace():
                    k = k - 1
                if text[k : i + 1].lower() in abbreviations:
                    boundary = False
            if boundary:
                spans.append((start, i + 1))
                start = j
                i = j
                continue
        i = i + 1
    tail = text[start:].strip()
    if tail:
        first = start + text[start:].index(tail[0])
        spans.append((first, first + len(tail)))
    # Trim leading whitespace from each span.
    trimmed = []
    for s, e in spans:
        while s < e and text[s].isspace():
            s = s + 1
        while e > s and text[e - 1].isspace():
            e = e - 1
        if e > s:
            trimmed.append((s, e))
    return trimmed


def tokenize(
    sentence_text: str, stopwords: frozenset[str] | None = None
) -> list[Token]:
    """Split a sentence into tokens, detaching edge punctuation.

    Whitespace-delimited chunks keep internal punctuation ("e.g" in "e.g.",
    hyphenated words), while leading/trailing punctuation marks become
    their own tokens. Every non-whitespace character lands in exactly one
    token; offsets are relative to ``sentence_text``.
    """
    if stopwords is None:
        stopwords = default_stopwords()
    tokens: list[Token] = []

    def emit(surface: str, offset: int) -> None:
        lower = surface.casefold()
        tokens.append(Token(surface, lower, offset, lower in stopwords))

    for m in re.finditer(r"\S+", sentence_text):
        chunk, offset = m.group(), m.start()
        while chunk and chunk[0] in _EDGE_PUNCT:
            emit(chunk[0], offset)
            chunk, offset = chunk[1:], offset + 1
        trailing: list[tuple[str, int]] = []
        while chunk and chunk[-1] in _EDGE_PUNCT:
            trailing.append((chunk[-1], offset + len(chunk) - 1))
            chunk = chunk[:-1]
        if chunk:
            emit(chunk, offset)
        for surface, off in reversed(trailing):
            emit(surface, off)
    return tokens


def _split_paragraphs(block: str, base: int) -> list[tuple[int, str]]:
    """Return (offset, text) per paragraph, split on blank lines."""
    paragraphs = []
    for m in re.finditer(r"[^\n]+(?:\n(?!\s*\n)[^\n]*)*", block):
        text = m.group()
        if text.strip():
            paragraphs.append((base + m.start(), text))
    return paragraphs


def load_document(
    raw_text: str,
    metadata: dict,
    stopwords: frozenset[str] | None = None,
    abbreviations: frozenset[str] | None = None,
) -> Document:
    """Build a Document from raw text and a metadata mapping.

    ``metadata`` must contain ``doc_id``; ``title`` is optional. Lines of
    the form ``Article <n>`` open a new article; text before the first
    marker becomes article "0". Without markers the whole text is one
    article "1".
    """
    if not raw_text or not raw_text.strip():
        raise InvalidInput("document text is empty")
    if not metadata or not str(metadata.get("doc_id", "")).strip():
        raise MissingMetadata("metadata must provide a non-empty doc_id")
    if stopwords is None:
        stopwords = default_stopwords()
    if abbreviations is None:
        abbreviations = default_abbreviations()

    # Carve the text into article blocks by marker lines.
    blocks: list[tuple[str, int, str]] = []  # (article_id, offset, block text)
    current_id: str | None = None
    current_start = 0
    pos = 0
    for line in raw_text.splitlines(keepends=True):
        m = _ARTICLE_MARKER.match(line.rstrip("\n"))
        if m:
            if pos > current_start:
                blocks.append((current_id or "0", current_start, raw_text[current_start:pos]))
            current_id = m.group(1)
            current_start = pos + len(line)
        pos += len(line)
    blocks.append(
        (current_id if current_id is not None else "1", current_start, raw_text[current_start:])
    )
    blocks = [(aid, off, text) for aid, off, text in blocks if text.strip()]
    if not blocks:
        raise InvalidInput("document contains no article text")
    seen_ids = set()
    for aid, _, _ in blocks:
        if aid in seen_ids:
            raise InvalidInput(f"duplicate article id {aid!r}")
        seen_ids.add(aid)

    articles: list[Article] = []
    sent_id = 0
    for article_id, block_offset, block in blocks:
        paragraphs: list[str] = []
        sentences: list[Sentence] = []
        for para_offset, para_text in _split_paragraphs(block, block_offset):
            paragraphs.append(para_text)
            for s, e in split_sentences(para_text, abbreviations):
                text = para_text[s:e]
                sentences.append(
                    Sentence(
                        sent_id=sent_id,
                        article_id=article_id,
                        text=text,
                        tokens=tuple(tokenize(text, stopwords)),
                        char_offset=para_offset + s,
                    )
                )
                sent_id += 1
        articles.append(Article(article_id, tuple(paragraphs), tuple(sentences)))

    doc = Document(
        doc_id=str(metadata["doc_id"]),
        title=str(metadata.get("title", "")),
        articles=tuple(articles),
        source_text=raw_text,
    )
    return Document(
        doc_id=doc.doc_id,
        title=doc.title,
        articles=doc.articles,
        cross_references=tuple(detect_cross_references(doc)),
        source_text=raw_text,
    )


def detect_cross_references(doc: Document) -> list[CrossReference]:
    """Find ``Article <n>`` style references inside sentence text.

    ``Articles 12 and 13`` expands to one reference per number. Offsets are
    document-level offsets of each number. Resolution of targets is out of
    scope; this is a lexical scan.
    """
    refs: list[CrossReference] = []
    for sent in doc.sentences:
        for m in _XREF.finditer(sent.text):
            plural = m.group().lower().startswith("articles")
            for num in _XREF_NUM.finditer(m.group()):
                refs.append(
                    CrossReference(
                        source_sentence=sent.sent_id,
                        target=f"Article {num.group()}",
                        char_offset=sent.char_offset + m.start() + num.start(),
                    )
                )
                if not plural:
                    break
    return refs


def partition_spans(doc: Document, budget: int = DEFAULT_TOKEN_BUDGET) -> list[ContextSpan]:
    """Partition a document into context spans under a token budget.

    An article that fits (strictly fewer tokens than ``budget``) becomes a
    single span; otherwise consecutive sentences are packed greedily in
    order. A lone sentence at or over budget is kept whole and flagged
    ``oversized`` rather than truncated.
    """
    if budget < 1:
        raise InvalidInput(f"token budget must be >= 1, got {budget}")
    spans: list[ContextSpan] = []
    for article in doc.articles:
        if not article.sentences:
            continue
        counts = [len(s.tokens) for s in article.sentences]
        groups: list[list[int]] = []
        current: list[int] = []
        current_count = 0
        for sent, count in zip(article.sentences, counts):
            if current and current_count + count >= budget:
                groups.append(current)
                current, current_count = [], 0
            current.append(sent.sent_id)
            current_count += count
        if current:
            groups.append(current)
        by_id = {s.sent_id: len(s.tokens) for s in article.sentences}
        for k, group in enumerate(groups):
            token_count = sum(by_id[i] for i in group)
            spans.append(
                ContextSpan(
                    span_id=f"{article.article_id}.{k}",
                    article_id=article.article_id,
                    sentence_ids=tuple(group),
                    token_count=token_count,
                    oversized=token_count >= budget,
                )
            )
    return spans


# ---------------------------------------------------------------------------
# Bundle serialization (the on-disk document format consumed by the CLI).


def bundle_to_dict(doc: Document, spans: list[ContextSpan], budget: int) -> dict:
    return {
        "doc_id": doc.doc_id,
        "title": doc.title,
        "token_budget": budget,
        "articles": [
            {
                "article_id": a.article_id,
                "paragraphs": list(a.paragraphs),
                "sentence_ids": [s.sent_id for s in a.sentences],
            }
            for a in doc.articles
        ],
        "sentences": [
            {
                "sent_id": s.sent_id,
                "article_id": s.article_id,
                "text": s.text,
                "char_offset": s.char_offset,
                "tokens": [
                    {
                        "surface": t.surface,
                        "lower": t.lower,
                        "char_offset": t.char_offset,
                        "is_stopword": t.is_stopword,
                    }
                    for t in s.tokens
                ],
            }
            for s in doc.sentences
        ],
        "spans": [
            {
                "span_id": sp.span_id,
                "article_id": sp.article_id,
                "sentence_ids": list(sp.sentence_ids),
                "token_count": sp.token_count,
                "oversized": sp.oversized,
            }
            for sp in spans
        ],
        "cross_references": [
            {
                "source_sentence": r.source_sentence,
                "target": r.target,
                "char_offset": r.char_offset,
            }
            for r in doc.cross_references
        ],
        "source_text": doc.source_text,
    }


def bundle_from_dict(data: dict) -> tuple[Document, list[ContextSpan], int]:
    sentences = {}
    for s in data["sentences"]:
        sentences[s["sent_id"]] = Sentence(
            sent_id=s["sent_id"],
            article_id=s["article_id"],
            text=s["text"],
            tokens=tuple(
                Token(t["surface"], t["lower"], t["char_offset"], t["is_stopword"])
                for t in s["tokens"]
            ),
            char_offset=s["char_offset"],
        )
    articles = tuple(
        Article(
            article_id=a["article_id"],
            paragraphs=tuple(a["paragraphs"]),
            sentences=tuple(sentences[i] for i in a["sentence_ids"]),
        )
        for a in data["articles"]
    )
    doc = Document(
        doc_id=data["doc_id"],
        title=data.get("title", ""),
        articles=articles,
        cross_references=tuple(
            CrossReference(r["source_sentence"], r["target"], r["char_offset"])
            for r in data.get("cross_references", [])
        ),
        source_text=data.get("source_text", ""),
    )
    spans = [
        ContextSpan(
            span_id=sp["span_id"],
            article_id=sp["article_id"],
            sentence_ids=tuple(sp["sentence_ids"]),
            token_count=sp["token_count"],
            oversized=sp["oversized"],
        )
        for sp in data.get("spans", [])
    ]
    return doc, spans, data.get("token_budget", DEFAULT_TOKEN_BUDGET)


def save_bundle(path: str | Path, doc: Document, spans: list[ContextSpan], budget: int) -> None:
    payload = json.dumps(bundle_to_dict(doc, spans, budget), ensure_ascii=False, indent=2)
    Path(path).write_text(payload + "\n", encoding="utf-8")


def load_bundle(path: str | Path) -> tuple[Document, list[ContextSpan], int]:
    return bundle_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def load_metadata_file(path: str | Path) -> dict:
    """Parse a ``key: value`` metadata file ('#' comments allowed)."""
    meta: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise InvalidInput(f"metadata line without ':': {line!r}")
        key, _, value = line.partition(":")
        meta[key.strip()] = value.strip()
    return meta
