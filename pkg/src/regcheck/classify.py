"""Multi-label concept classification of text segments.

Three prediction routes, combined per concept by a configurable policy:

  keyword   label fires when any associated keyword phrase occurs as a
            contiguous lemma subsequence of the segment
  centroid  label fires when the cosine between the segment's TF-IDF
            vector and the concept's mean training vector is strictly
            above the threshold
  external  predictions computed by an outside model, ingested from a
            TSV file (never trained here)

The default chain per concept is external -> centroid -> keyword; an
explicit ``method`` on the concept pins one route.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, TextIO

from .errors import InvalidInput, UnknownConcept, UntrainableConcept
from .srl import contains_marker
from .vectorize import SparseVector, TermIndex, cosine, tfidf_vector

logger = logging.getLogger(__name__)

METHODS = ("auto", "keyword", "centroid", "ml")


@dataclass(frozen=True)
class Concept:
    concept_id: str
    parent: str | None = None
    keywords: tuple[tuple[str, ...], ...] = ()
    method: str = "auto"


@dataclass(frozen=True)
class ConceptModel:
    concepts: tuple[Concept, ...]

    def __post_init__(self):
        seen = set()
        for c in self.concepts:
            if c.concept_id in seen:
                raise InvalidInput(f"duplicate concept id {c.concept_id!r}")
            seen.add(c.concept_id)
        for c in self.concepts:
            if c.parent is not None and c.parent not in seen:
                raise UnknownConcept(f"parent {c.parent!r} of {c.concept_id!r} is not declared")
        for c in self.concepts:
            if c.method not in METHODS:
                raise InvalidInput(f"unknown method {c.method!r} for {c.concept_id!r}")
            # Parent links must not loop.
            hops, cur = 0, c.parent
            while cur is not None:
                hops += 1
                if hops > len(self.concepts):
                    raise InvalidInput(f"cyclic parent links at {c.concept_id!r}")
                cur = self.get(cur).parent

    def get(self, concept_id: str) -> Concept:
        for c in self.concepts:
            if c.concept_id == concept_id:
                return c
        raise UnknownConcept(f"concept {concept_id!r} is not declared")

    @property
    def ids(self) -> set[str]:
        return {c.concept_id for c in self.concepts}

    def ancestors(self, concept_id: str) -> list[str]:
        chain = []
        cur = self.get(concept_id).parent
        while cur is not None:
            chain.append(cur)
            cur = self.get(cur).parent
        return chain


def load_concept_model(stream: str | TextIO) -> ConceptModel:
    """Parse a concept-model JSON list: {id, parent?, keywords?, method?}."""
    text = stream.read() if hasattr(stream, "read") else stream
    data = json.loads(text)
    if not isinstance(data, list) or not data:
        raise InvalidInput("concept model must be a non-empty JSON list")
    concepts = []
    for item in data:
        keywords = tuple(
            tuple(str(kw).strip().lower().split()) for kw in item.get("keywords", [])
        )
        concepts.append(
            Concept(
                concept_id=str(item["id"]),
                parent=item.get("parent"),
                keywords=tuple(k for k in keywords if k),
                method=str(item.get("method", "auto")),
            )
        )
    return ConceptModel(concepts=tuple(concepts))


def load_concept_model_file(path: str | Path) -> ConceptModel:
    return load_concept_model(Path(path).read_text(encoding="utf-8"))


def keyword_predict(segment_lemmas: Sequence[str], model: ConceptModel) -> set[str]:
    """Concepts whose keyword phrases occur in the segment (set semantics)."""
    labels = set()
    for concept in model.concepts:
        if any(contains_marker(segment_lemmas, kw) for kw in concept.keywords):
            labels.add(concept.concept_id)
    return labels


@dataclass(frozen=True)
class CentroidModel:
    centroids: dict[str, SparseVector]
    threshold: float
    index: TermIndex

    def trained(self, concept_id: str) -> bool:
        return concept_id in self.centroids


def centroid_train(
    labeled_segments: Sequence[tuple[Sequence[str], set[str]]],
    idx: TermIndex,
    threshold: float = 0.5,
) -> CentroidModel:
    """Mean TF-IDF vector per concept over its positive training segments."""
    if not 0.0 <= threshold <= 1.0:
        raise InvalidInput(f"centroid threshold must be in [0, 1], got {threshold}")
    groups: dict[str, list[SparseVector]] = {}
    for tokens, concept_ids in labeled_segments:
        vec = tfidf_vector(tokens, idx)
        for cid in concept_ids:
            groups.setdefault(cid, []).append(vec)
    centroids: dict[str, SparseVector] = {}
    for cid, vectors in groups.items():
        summed: dict[int, float] = {}
        for vec in vectors:
            for term_id, weight in vec.items():
                summed[term_id] = summed.get(term_id, 0.0) + weight
        centroid = {t: w / len(vectors) for t, w in summed.items() if w != 0.0}
        if not centroid:
            raise UntrainableConcept(cid)
        centroids[cid] = centroid
    return CentroidModel(centroids=centroids, threshold=threshold, index=idx)


def centroid_predict(
    segment_tokens: Sequence[str],
    cm: CentroidModel,
    diagnostics: list[str] | None = None,
) -> set[str]:
    """Concepts whose centroid similarity is strictly above the threshold."""
    vec = tfidf_vector(segment_tokens, cm.index)
    if not vec:
        message = "segment has a zero vector; centroid prediction skipped"
        logger.warning(message)
        if diagnostics is not None:
            diagnostics.append(message)
        return set()
    labels = set()
    for cid, centroid in cm.centroids.items():
        if cosine(vec, centroid) > cm.threshold:
            labels.add(cid)
    return labels


@dataclass(frozen=True)
class PredictionSet:
    by_segment: dict[str, dict[str, float]] = field(default_factory=dict)

    def labels(self, segment_id: str) -> set[str]:
        return set(self.by_segment.get(segment_id, ()))

    @property
    def concepts_seen(self) -> set[str]:
        return {cid for labels in self.by_segment.values() for cid in labels}

    @property
    def segment_ids(self) -> set[str]:
        return set(self.by_segment)


def load_external_predictions(
    stream: str | TextIO, model: ConceptModel | None = None
) -> PredictionSet:
    """Parse ``<segment_id>\\t<concept_id>\\t<confidence>`` lines."""
    text = stream.read() if hasattr(stream, "read") else stream
    by_segment: dict[str, dict[str, float]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise InvalidInput(f"prediction line {lineno}: expected 3 fields")
        segment_id, concept_id, raw = fields
        if model is not None and concept_id not in model.ids:
            raise UnknownConcept(f"prediction line {lineno}: unknown concept {concept_id!r}")
        try:
            confidence = float(raw)
        except ValueError:
            raise InvalidInput(f"prediction line {lineno}: bad confidence {raw!r}")
        if not 0.0 <= confidence <= 1.0:
            raise InvalidInput(
                f"prediction line {lineno}: confidence {confidence} outside [0, 1]"
            )
        by_segment.setdefault(segment_id, {})[concept_id] = confidence
    return PredictionSet(by_segment=by_segment)


def load_predictions_file(path: str | Path, model: ConceptModel | None = None) -> PredictionSet:
    return load_external_predictions(Path(path).read_text(encoding="utf-8"), model)


def hybrid_predict(
    segment_id: str,
    segment_lemmas: Sequence[str],
    model: ConceptModel,
    cm: CentroidModel | None = None,
    external: PredictionSet | None = None,
    diagnostics: list[str] | None = None,
) -> set[str]:
    """Per-concept method dispatch; the union over concepts is the label set.

    ``method`` pins a route ("ml" requires external predictions, "centroid"
    a trained centroid); "auto" falls through external -> centroid ->
    keyword. A concept with no usable route is recorded as a diagnostic,
    never silently dropped.
    """
    labels: set[str] = set()
    external_concepts = external.concepts_seen if external is not None else set()
    keyword_hits: set[str] | None = None
    centroid_hits: set[str] | None = None

    def by_keyword(concept: Concept) -> bool:
        nonlocal keyword_hits
        if keyword_hits is None:
            keyword_hits = keyword_predict(segment_lemmas, model)
        return concept.concept_id in keyword_hits

    def by_centroid(concept: Concept) -> bool:
        nonlocal centroid_hits
        if centroid_hits is None:
            centroid_hits = centroid_predict(segment_lemmas, cm, diagnostics)
        return concept.concept_id in centroid_hits

    for concept in model.concepts:
        cid = concept.concept_id
        method = concept.method
        if method == "auto":
            if external is not None and cid in external_concepts:
                method = "ml"
            elif cm is not None and cm.trained(cid):
                method = "centroid"
            elif concept.keywords:
                method = "keyword"
            else:
                message = f"concept {cid!r} has no usable classification method"
                logger.warning(message)
                if diagnostics is not None:
                    diagnostics.append(message)
                continue
        if method == "ml":
            if external is None:
                message = f"concept {cid!r} requires external predictions; none supplied"
                logger.warning(message)
                if diagnostics is not None:
                    diagnostics.append(message)
                continue
            if cid in external.labels(segment_id):
                labels.add(cid)
        elif method == "centroid":
            if cm is None or not cm.trained(cid):
                message = f"concept {cid!r} requires a trained centroid; none supplied"
                logger.warning(message)
                if diagnostics is not None:
                    diagnostics.append(message)
                continue
            if by_centroid(concept):
                labels.add(cid)
        elif method == "keyword":
            if by_keyword(concept):
                labels.add(cid)
    return labels


def expand_with_ancestors(labels: set[str], model: ConceptModel) -> set[str]:
    """A predicted child concept also asserts its ancestors."""
    expanded = set(labels)
    for cid in labels:
        expanded.update(model.ancestors(cid))
    return expanded
