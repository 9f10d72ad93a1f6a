"""Compliance checking: relevance detection, role alignment, scoring, report.

The pipeline mirrors how an analyst would audit a policy against a list of
requirements:

  1. find the text segments relevant to each requirement (cosine similarity
     of their vectors at threshold theta, segments outer / requirements
     inner);
  2. for each relevant pair, align the semantic roles of the requirement
     against those of the segment — roles present in the requirement but
     absent from the segment are MISSING, extra segment roles are NOT
     REQUIRED;
  3. match the text of shared roles (Jaccard overlap of stopword-filtered
     lemma sets after synonym/alias canonicalization, threshold tau_text);
  4. score the segment as matched-roles / requirement-roles and call it
     satisfying at tau_sat;
  5. a requirement no segment satisfies is Violated; template rules are
     evaluated over the aggregated concept predictions.

Every skipped comparison and fallback leaves a diagnostic in the report:
verdicts must be auditable, not just reproducible.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence, TextIO

from .annotations import AnnotatedSentence
from .classify import ConceptModel, PredictionSet, expand_with_ancestors
from .corpus import Document
from .criteria import (
    COMPLIANT,
    NOT_APPLICABLE,
    VIOLATED,
    LegalRequirement,
    RuleVerdict,
    TemplateRule,
    evaluate_rule,
)
from .errors import CrossReferenceError, InvalidInput, InvalidRequirement, ZeroVector
from .resources import default_stopwords
from .srl import MarkerLexicon, SemanticFrame, SemanticRole, extract_frame
from .vectorize import EmbeddingTable, build_index, cosine, tfidf_vector

logger = logging.getLogger(__name__)

SATISFIED = "Satisfied"


@dataclass(frozen=True)
class Segment:
    """A sentence-level unit of the checked document."""

    segment_id: str
    sent_id: int
    text: str
    tokens: tuple[str, ...]  # lowercased content terms for vectorizing
    frame: SemanticFrame


@dataclass(frozen=True)
class RelevantPair:
    req_id: str
    segment_id: str
    similarity: float


@dataclass(frozen=True)
class Alignment:
    missing: frozenset[str]
    not_required: frozenset[str]
    shared: frozenset[str]


@dataclass(frozen=True)
class SatisfactionResult:
    req_id: str
    segment_id: str
    matched_roles: tuple[str, ...]
    score: float
    satisfied: bool
    missing: tuple[str, ...] = ()
    not_required: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# Synonym lexicon and entity aliases.


class SynonymLexicon:
    """Symmetric synonym classes plus multi-word entity aliases.

    Lemmas connected through any chain of synonym lines share one class;
    the canonical form is the lexicographically smallest member, so
    canonicalization is idempotent by construction.
    """

    def __init__(
        self,
        groups: Sequence[Sequence[str]] = (),
        aliases: Mapping[str, str] | None = None,
    ):
        parent: dict[str, str] = {}

        def find(x: str) -> str:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for group in groups:
            members = [g.casefold() for g in group if g.strip()]
            for m in members:
                parent.setdefault(m, m)
            for m in members[1:]:
                ra, rb = find(members[0]), find(m)
                if ra != rb:
                    parent[rb] = ra
        components: dict[str, set[str]] = {}
        for member in parent:
            components.setdefault(find(member), set()).add(member)
        self._canonical: dict[str, str] = {}
        self._component: dict[str, frozenset[str]] = {}
        for members in components.values():
            canon = min(members)
            frozen = frozenset(members)
            for m in members:
                self._canonical[m] = canon
                self._component[m] = frozen
        self._aliases: dict[tuple[str, ...], tuple[str, ...]] = {}
        for phrase, target in (aliases or {}).items():
            key = tuple(phrase.casefold().split())
            if key:
                self._aliases[key] = tuple(target.casefold().split())

    def canonical(self, lemma: str) -> str:
        return self._canonical.get(lemma.casefold(), lemma.casefold())

    def synonyms(self, lemma: str) -> frozenset[str]:
        low = lemma.casefold()
        return self._component.get(low, frozenset({low})) - {low}

    def apply_aliases(self, tokens: Sequence[str]) -> list[str]:
        """Replace alias phrases (longest match first) with their targets."""
        if not self._aliases:
            return list(tokens)
        out: list[str] = []
        i = 0
        lengths = sorted({len(k) for k in self._aliases}, reverse=True)
        lowered = [t.casefold() for t in tokens]
        while i < len(lowered):
            replaced = False
            for n in lengths:
                key = tuple(lowered[i : i + n])
                if len(key) == n and key in self._aliases:
                    out.extend(self._aliases[key])
                    i += n
                    replaced = True
                    break
            if not replaced:
                out.append(lowered[i])
                i += 1
        return out


def load_synonyms(stream: str | TextIO, aliases: Mapping[str, str] | None = None) -> SynonymLexicon:
    """Parse ``lemma: syn1, syn2`` lines into a synonym lexicon."""
    text = stream.read() if hasattr(stream, "read") else stream
    groups: list[list[str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise InvalidInput(f"synonym line {lineno} without ':': {line!r}")
        head, _, rest = line.partition(":")
        group = [head.strip()] + [w.strip() for w in rest.split(",") if w.strip()]
        if len(group) < 2:
            raise InvalidInput(f"synonym line {lineno} needs at least one synonym")
        groups.append(group)
    return SynonymLexicon(groups=groups, aliases=aliases)


def load_aliases(stream: str | TextIO) -> dict[str, str]:
    """Parse ``surface form = canonical entity`` lines."""
    text = stream.read() if hasattr(stream, "read") else stream
    aliases: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidInput(f"alias line {lineno} without '=': {line!r}")
        surface, _, target = line.partition("=")
        if not surface.strip() or not target.strip():
            raise InvalidInput(f"alias line {lineno} is incomplete: {line!r}")
        aliases[surface.strip()] = target.strip()
    return aliases


def load_synonyms_file(path: str | Path, aliases: Mapping[str, str] | None = None) -> SynonymLexicon:
    return load_synonyms(Path(path).read_text(encoding="utf-8"), aliases)


def load_aliases_file(path: str | Path) -> dict[str, str]:
    return load_aliases(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Relevance detection.

Vector = Mapping[int, float] | Sequence[float]
Vectorizer = Callable[[object], "Vector | None"]


def detect_relevance(
    segments: Sequence[Segment],
    requirements: Sequence[LegalRequirement],
    theta: float,
    vectorizer: Vectorizer,
    diagnostics: list[str] | None = None,
) -> list[RelevantPair]:
    """All (requirement, segment) pairs with cosine similarity >= theta.

    Iterates segments outer, requirements inner; output order is
    (segment position, requirement position). Items whose vector is zero
    or unavailable are skipped with a diagnostic.
    """
    if not 0.0 <= theta <= 1.0:
        raise InvalidInput(f"theta must be in [0, 1], got {theta}")

    def note(message: str) -> None:
        logger.warning(message)
        if diagnostics is not None:
            diagnostics.append(message)

    req_vectors: list[tuple[LegalRequirement, Vector | None]] = []
    for req in requirements:
        vec = vectorizer(req)
        if not vec:
            note(f"requirement {req.req_id!r} has a zero vector; its pairs are skipped")
            vec = None
        req_vectors.append((req, vec))

    pairs: list[RelevantPair] = []
    for segment in segments:
        seg_vec = vectorizer(segment)
        if not seg_vec:
            note(f"segment {segment.segment_id!r} has a zero vector; its pairs are skipped")
            continue
        for req, req_vec in req_vectors:
            if req_vec is None:
                continue
            try:
                similarity = cosine(seg_vec, req_vec)
            except ZeroVector:
                note(f"zero vector for pair ({req.req_id}, {segment.segment_id}); skipped")
                continue
            if similarity >= theta:
                pairs.append(RelevantPair(req.req_id, segment.segment_id, similarity))
    return pairs


def make_tfidf_vectorizer(
    segments: Sequence[Segment],
    requirements: Sequence[LegalRequirement],
    stopwords: frozenset[str] | None = None,
) -> Vectorizer:
    """TF-IDF vectorizer over the joint segment + requirement vocabulary."""
    if stopwords is None:
        stopwords = default_stopwords()
    req_tokens = {r.req_id: _text_terms(r.text, stopwords) for r in requirements}
    corpus = [list(s.tokens) for s in segments] + list(req_tokens.values())
    if not corpus:
        raise InvalidInput("nothing to vectorize")
    index = build_index(corpus, stopwords)

    def vectorize(item) -> Vector | None:
        if isinstance(item, Segment):
            return tfidf_vector(item.tokens, index)
        if isinstance(item, LegalRequirement):
            return tfidf_vector(req_tokens[item.req_id], index)
        raise InvalidInput(f"cannot vectorize {type(item).__name__}")

    return vectorize


def make_embedding_vectorizer(table: EmbeddingTable) -> Vectorizer:
    def vectorize(item) -> Vector | None:
        key = item.segment_id if isinstance(item, Segment) else item.req_id
        return table.vectors.get(key)

    return vectorize


def _text_terms(text: str, stopwords: frozenset[str]) -> list[str]:
    return [w for w in re.findall(r"\w+", text.casefold()) if w not in stopwords]


# ---------------------------------------------------------------------------
# Role alignment and text matching.


def align_roles(r_frame: SemanticFrame, t_frame: SemanticFrame) -> Alignment:
    """Label-level alignment of requirement roles against segment roles."""
    if not r_frame.roles:
        raise InvalidRequirement("requirement frame has no roles")
    r_labels = r_frame.labels
    t_labels = t_frame.labels
    return Alignment(
        missing=frozenset(r_labels - t_labels),
        not_required=frozenset(t_labels - r_labels),
        shared=frozenset(r_labels & t_labels),
    )


def _role_terms(
    role: SemanticRole, lex: SynonymLexicon, stopwords: frozenset[str]
) -> set[str]:
    tokens = list(role.lemmas) if role.lemmas else re.findall(r"\w+", role.text)
    tokens = lex.apply_aliases(tokens)
    return {
        lex.canonical(t)
        for t in tokens
        if t.casefold() not in stopwords and any(c.isalnum() for c in t)
    }


def match_role_text(
    span_r: SemanticRole,
    span_t: SemanticRole,
    lex: SynonymLexicon,
    tau_text: float,
    stopwords: frozenset[str] | None = None,
    diagnostics: list[str] | None = None,
) -> tuple[bool, float]:
    """Jaccard similarity of canonicalized role terms; matched at tau_text."""
    if span_r.label != span_t.label:
        raise InvalidInput(f"role labels differ: {span_r.label!r} vs {span_t.label!r}")
    if stopwords is None:
        stopwords = default_stopwords()
    terms_r = _role_terms(span_r, lex, stopwords)
    terms_t = _role_terms(span_t, lex, stopwords)
    if not terms_r or not terms_t:
        message = f"role {span_r.label!r}: empty term set after filtering; similarity 0"
        logger.warning(message)
        if diagnostics is not None:
            diagnostics.append(message)
        return False, 0.0
    sim = len(terms_r & terms_t) / len(terms_r | terms_t)
    return sim >= tau_text, sim


def score_segment(
    req: LegalRequirement,
    t_frame: SemanticFrame,
    lex: SynonymLexicon,
    tau_text: float = 0.5,
    tau_sat: float = 0.8,
    segment_id: str | None = None,
    stopwords: frozenset[str] | None = None,
    diagnostics: list[str] | None = None,
) -> SatisfactionResult:
    """How far a segment satisfies a requirement: matched roles / all roles."""
    if stopwords is None:
        stopwords = default_stopwords()
    alignment = align_roles(req.frame, t_frame)
    matched: list[str] = []
    for label in sorted(alignment.shared):
        hit = False
        for role_r in req.frame.roles_with(label):
            for role_t in t_frame.roles_with(label):
                ok, _ = match_role_text(role_r, role_t, lex, tau_text, stopwords, diagnostics)
                if ok:
                    hit = True
                    break
            if hit:
                break
        if hit:
            matched.append(label)
    total = len(req.frame.labels)
    score = len(matched) / total
    return SatisfactionResult(
        req_id=req.req_id,
        segment_id=segment_id if segment_id is not None else f"s{t_frame.sentence_id}",
        matched_roles=tuple(matched),
        score=score,
        satisfied=score >= tau_sat,
        missing=tuple(sorted(alignment.missing)),
        not_required=tuple(sorted(alignment.not_required)),
    )


# ---------------------------------------------------------------------------
# Report assembly.


@dataclass(frozen=True)
class ComplianceConfig:
    theta: float = 0.5
    tau_text: float = 0.5
    tau_sat: float = 0.8
    centroid_threshold: float = 0.5
    gate_on_relevance: bool = True
    per_segment_rules: bool = False

    def __post_init__(self):
        for name in ("theta", "tau_text", "tau_sat", "centroid_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidInput(f"{name} must be in [0, 1], got {value}")

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "tau_text": self.tau_text,
            "tau_sat": self.tau_sat,
            "centroid_threshold": self.centroid_threshold,
            "gate_on_relevance": self.gate_on_relevance,
            "per_segment_rules": self.per_segment_rules,
        }


@dataclass(frozen=True)
class RequirementResult:
    req_id: str
    status: str  # Satisfied | Violated
    evidence: str
    best: SatisfactionResult | None = None
    best_similarity: float | None = None
    segment_text: str = ""


@dataclass(frozen=True)
class ComplianceReport:
    doc_id: str
    config: ComplianceConfig
    requirement_results: tuple[RequirementResult, ...]
    rule_verdicts: tuple[RuleVerdict, ...]
    diagnostics: tuple[str, ...] = ()
    generated_at: str | None = None
    input_digest: str = ""

    @property
    def violation_count(self) -> int:
        return sum(1 for r in self.requirement_results if r.status == VIOLATED) + sum(
            1 for v in self.rule_verdicts if v.status == VIOLATED
        )

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "generated_at": self.generated_at,
            "input_digest": self.input_digest,
            "config": self.config.to_dict(),
            "requirements": [
                {
                    "req_id": r.req_id,
                    "status": r.status,
                    "evidence": r.evidence,
                    "best": None
                    if r.best is None
                    else {
                        "segment_id": r.best.segment_id,
                        "similarity": self.best_similarity_of(r),
                        "score": round(r.best.score, 6),
                        "satisfied": r.best.satisfied,
                        "matched_roles": list(r.best.matched_roles),
                        "missing": list(r.best.missing),
                        "not_required": list(r.best.not_required),
                        "segment_text": r.segment_text,
                    },
                }
                for r in self.requirement_results
            ],
            "rules": [
                {
                    "rule_id": v.rule_id,
                    "status": v.status,
                    "missing_atoms": list(v.missing_atoms),
                }
                for v in self.rule_verdicts
            ],
            "diagnostics": list(self.diagnostics),
        }

    @staticmethod
    def best_similarity_of(r: RequirementResult) -> float | None:
        return None if r.best_similarity is None else round(r.best_similarity, 6)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n"


def analyze_segments(
    doc: Document,
    annotated: Sequence[AnnotatedSentence] = (),
    gold_frames: Mapping[str, SemanticFrame] | None = None,
    marker_lexicon: MarkerLexicon | None = None,
    diagnostics: list[str] | None = None,
) -> list[Segment]:
    """Turn document sentences into segments with semantic frames.

    Gold frames override extraction; sentences with neither an annotation
    nor a gold frame get an empty frame plus a diagnostic.
    """
    by_sent = {a.sent_id: a for a in annotated}
    gold = dict(gold_frames or {})
    known = {f"s{s.sent_id}" for s in doc.sentences}
    unknown = sorted(set(gold) - known)
    if unknown:
        raise CrossReferenceError(f"gold frames reference unknown segments: {unknown}")
    segments: list[Segment] = []
    for sentence in doc.sentences:
        segment_id = f"s{sentence.sent_id}"
        if segment_id in gold:
            frame = gold[segment_id]
        elif sentence.sent_id in by_sent:
            frame = extract_frame(by_sent[sentence.sent_id], marker_lexicon)
            if diagnostics is not None:
                diagnostics.extend(
                    f"segment {segment_id}: {d}" for d in frame.diagnostics
                )
        else:
            message = f"segment {segment_id}: no annotation or gold frame; roles empty"
            logger.warning(message)
            if diagnostics is not None:
                diagnostics.append(message)
            frame = SemanticFrame(sentence_id=sentence.sent_id)
        segments.append(
            Segment(
                segment_id=segment_id,
                sent_id=sentence.sent_id,
                text=sentence.text,
                tokens=tuple(sentence.content_terms()),
                frame=frame,
            )
        )
    return segments


def check_compliance(
    doc: Document,
    segments: Sequence[Segment],
    requirements: Sequence[LegalRequirement],
    rules: Sequence[TemplateRule] = (),
    predictions: PredictionSet | None = None,
    config: ComplianceConfig | None = None,
    synonyms: SynonymLexicon | None = None,
    concept_model: ConceptModel | None = None,
    embeddings: EmbeddingTable | None = None,
    stopwords: frozenset[str] | None = None,
    generated_at: str | None = None,
    input_digest: str = "",
) -> ComplianceReport:
    """Run the full pipeline and assemble an auditable report."""
    if config is None:
        config = ComplianceConfig()
    if synonyms is None:
        synonyms = SynonymLexicon()
    if stopwords is None:
        stopwords = default_stopwords()
    diagnostics: list[str] = []

    segment_ids = {s.segment_id for s in segments}
    if predictions is not None:
        stray = sorted(predictions.segment_ids - segment_ids)
        if stray:
            raise CrossReferenceError(f"predictions reference unknown segments: {stray}")

    if embeddings is not None:
        needed = segment_ids | {r.req_id for r in requirements}
        absent = sorted(needed - set(embeddings.vectors))
        if absent:
            raise CrossReferenceError(f"embedding table lacks vectors for: {absent}")
        vectorizer = make_embedding_vectorizer(embeddings)
    else:
        vectorizer = make_tfidf_vectorizer(segments, requirements, stopwords)

    if config.gate_on_relevance:
        pairs = detect_relevance(segments, requirements, config.theta, vectorizer, diagnostics)
    else:
        pairs = _all_pairs(segments, requirements, vectorizer, diagnostics)

    seg_by_id = {s.segment_id: s for s in segments}
    seg_position = {s.segment_id: i for i, s in enumerate(segments)}
    by_req: dict[str, list[RelevantPair]] = {}
    for pair in pairs:
        by_req.setdefault(pair.req_id, []).append(pair)

    requirement_results: list[RequirementResult] = []
    for req in sorted(requirements, key=lambda r: r.req_id):
        req_pairs = by_req.get(req.req_id, [])
        best: SatisfactionResult | None = None
        best_pair: RelevantPair | None = None
        for pair in sorted(req_pairs, key=lambda p: seg_position[p.segment_id]):
            segment = seg_by_id[pair.segment_id]
            result = score_segment(
                req,
                segment.frame,
                synonyms,
                config.tau_text,
                config.tau_sat,
                segment_id=segment.segment_id,
                stopwords=stopwords,
                diagnostics=diagnostics,
            )
            if best is None or result.score > best.score:
                best, best_pair = result, pair
        if best is None:
            requirement_results.append(
                RequirementResult(
                    req_id=req.req_id,
                    status=VIOLATED,
                    evidence="no relevant segment",
                )
            )
        else:
            status = SATISFIED if best.satisfied else VIOLATED
            evidence = (
                f"best segment {best.segment_id} matched "
                f"{len(best.matched_roles)}/{len(req.frame.labels)} roles"
            )
            requirement_results.append(
                RequirementResult(
                    req_id=req.req_id,
                    status=status,
                    evidence=evidence,
                    best=best,
                    best_similarity=best_pair.similarity,
                    segment_text=seg_by_id[best.segment_id].text,
                )
            )

    rule_verdicts = _evaluate_rules(rules, segments, predictions, concept_model, config)

    return ComplianceReport(
        doc_id=doc.doc_id,
        config=config,
        requirement_results=tuple(requirement_results),
        rule_verdicts=tuple(rule_verdicts),
        diagnostics=tuple(diagnostics),
        generated_at=generated_at,
        input_digest=input_digest,
    )


def _all_pairs(
    segments: Sequence[Segment],
    requirements: Sequence[LegalRequirement],
    vectorizer: Vectorizer,
    diagnostics: list[str],
) -> list[RelevantPair]:
    """Ungated mode: every pair is scored; unknown similarity becomes 0.0."""
    pairs = []
    for segment in segments:
        seg_vec = vectorizer(segment)
        for req in requirements:
            req_vec = vectorizer(req)
            similarity = None
            if seg_vec and req_vec:
                try:
                    similarity = cosine(seg_vec, req_vec)
                except ZeroVector:
                    similarity = None
            if similarity is None:
                similarity = 0.0
                diagnostics.append(
                    f"pair ({req.req_id}, {segment.segment_id}): zero vector, similarity set to 0"
                )
            pairs.append(RelevantPair(req.req_id, segment.segment_id, similarity))
    return pairs


def _evaluate_rules(
    rules: Sequence[TemplateRule],
    segments: Sequence[Segment],
    predictions: PredictionSet | None,
    concept_model: ConceptModel | None,
    config: ComplianceConfig,
) -> list[RuleVerdict]:
    if not rules:
        return []
    prediction_set = predictions if predictions is not None else PredictionSet()

    def facts_for(segment_ids: Sequence[str]) -> frozenset[str]:
        facts: set[str] = set()
        for sid in segment_ids:
            facts |= prediction_set.labels(sid)
        if concept_model is not None:
            facts = expand_with_ancestors(facts, concept_model)
        return frozenset(facts)

    if not config.per_segment_rules:
        facts = facts_for([s.segment_id for s in segments])
        return [evaluate_rule(rule, facts) for rule in rules]

    # Per-segment mode: a rule is Violated if any segment violates it,
    # Compliant if at least one segment triggered it and none violated.
    verdicts = []
    for rule in rules:
        missing: list[str] = []
        statuses = []
        for segment in segments:
            verdict = evaluate_rule(rule, facts_for([segment.segment_id]))
            statuses.append(verdict.status)
            for atom in verdict.missing_atoms:
                if atom not in missing:
                    missing.append(atom)
        if VIOLATED in statuses:
            verdicts.append(RuleVerdict(rule.rule_id, VIOLATED, tuple(missing)))
        elif COMPLIANT in statuses:
            verdicts.append(RuleVerdict(rule.rule_id, COMPLIANT))
        else:
            verdicts.append(RuleVerdict(rule.rule_id, NOT_APPLICABLE))
    return verdicts
