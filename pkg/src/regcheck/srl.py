"""Rule-based extraction of legal semantic roles from dependency parses.

One frame per sentence, anchored on the main verb:

  action      the root verb plus its auxiliaries ("shall notify")
  actor       the noun phrase holding the subject of the root verb
  object      the noun phrase holding the direct object, or a
              preposition-headed dependent when nothing else claims it
  beneficiary the noun phrase under a beneficiary-marker preposition
              (default markers: "to", "for") attached to the root verb
  condition   a PP/ADVP/subordinate-clause dependent containing a
              condition marker ("if", "once", "in case of", ...)
  constraint  same shape as condition but with a constraint marker
              ("without", "in accordance with", "according to", "unless")

Markers are matched as contiguous lemma sequences, case-insensitively.
When a phrase carries both kinds of markers, the majority kind wins and
ties go to condition. Open labels (e.g. "reason") are accepted when
ingesting gold frames but are never extracted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

from .annotations import AnnotatedSentence, AnnotationEntry, Phrase, find_root_verb, phrase_of
from .errors import InvalidInput, NoRootVerb
from .resources import default_marker_text

ACTION = "action"
ACTOR = "actor"
OBJECT = "object"
CONDITION = "condition"
CONSTRAINT = "constraint"
BENEFICIARY = "beneficiary"
CORE_LABELS = frozenset({ACTION, ACTOR, OBJECT, CONDITION, CONSTRAINT, BENEFICIARY})

_AUX_DEPRELS = frozenset({"aux", "aux:pass", "auxpass"})
_SUBJECT_DEPRELS = frozenset({"nsubj", "nsubj:pass", "nsubjpass", "csubj", "csubj:pass"})
_OBJECT_DEPRELS = frozenset({"obj", "dobj"})
_CLAUSE_DEPRELS = frozenset({"advcl", "acl", "acl:relcl"})
_NOMINAL_TAGS = frozenset({"NOUN", "PROPN", "PRON"})


@dataclass(frozen=True)
class SemanticRole:
    label: str
    token_range: tuple[int, ...]  # sentence token indices, ascending
    text: str
    head_lemma: str = ""
    lemmas: tuple[str, ...] = ()


@dataclass(frozen=True)
class SemanticFrame:
    sentence_id: int
    roles: tuple[SemanticRole, ...] = ()
    diagnostics: tuple[str, ...] = ()

    @property
    def labels(self) -> set[str]:
        return {r.label for r in self.roles}

    def roles_with(self, label: str) -> list[SemanticRole]:
        return [r for r in self.roles if r.label == label]


@dataclass(frozen=True)
class MarkerLexicon:
    condition_markers: tuple[tuple[str, ...], ...]
    constraint_markers: tuple[tuple[str, ...], ...]
    beneficiary_markers: tuple[tuple[str, ...], ...]


def _parse_marker_block(text: str) -> dict[str, list[tuple[str, ...]]]:
    table: dict[str, list[tuple[str, ...]]] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise InvalidInput(f"marker line without ':': {line!r}")
        role, _, items = line.partition(":")
        markers = table.setdefault(role.strip().lower(), [])
        for item in items.split(","):
            words = tuple(item.strip().lower().split())
            if words and words not in markers:
                markers.append(words)
    return table


def load_marker_lexicon(stream: str | TextIO) -> MarkerLexicon:
    """Parse a marker file (``role: marker, marker...`` lines)."""
    text = stream.read() if hasattr(stream, "read") else stream
    table = _parse_marker_block(text)
    lexicon = MarkerLexicon(
        condition_markers=tuple(table.get(CONDITION, ())),
        constraint_markers=tuple(table.get(CONSTRAINT, ())),
        beneficiary_markers=tuple(table.get(BENEFICIARY, ())),
    )
    if not (
        lexicon.condition_markers and lexicon.constraint_markers and lexicon.beneficiary_markers
    ):
        raise InvalidInput("marker lexicon must define condition, constraint and beneficiary markers")
    return lexicon


def load_marker_file(path: str | Path) -> MarkerLexicon:
    return load_marker_lexicon(Path(path).read_text(encoding="utf-8"))


def default_marker_lexicon() -> MarkerLexicon:
    return load_marker_lexicon(default_marker_text())


def contains_marker(lemmas: Iterable[str], marker: tuple[str, ...]) -> bool:
    """True when ``marker`` occurs as a contiguous subsequence of ``lemmas``."""
    seq = [l.casefold() for l in lemmas]
    m = len(marker)
    return m > 0 and any(tuple(seq[i : i + m]) == marker for i in range(len(seq) - m + 1))


def _role_from_phrase(s: AnnotatedSentence, label: str, phrase: Phrase) -> SemanticRole:
    lo, hi = phrase.token_range
    indices = tuple(range(lo, hi + 1))
    return SemanticRole(
        label=label,
        token_range=indices,
        text=phrase.text,
        head_lemma=s.entry(phrase.head_index).lemma,
        lemmas=tuple(s.entry(i).lemma for i in indices),
    )


def _noun_child(s: AnnotatedSentence, entry: AnnotationEntry) -> AnnotationEntry | None:
    for child in s.children(entry.index):
        if child.upos in _NOMINAL_TAGS:
            return child
    return None


def extract_frame(s: AnnotatedSentence, lex: MarkerLexicon | None = None) -> SemanticFrame:
    """Apply the extraction rules to one annotated sentence.

    A sentence without any verb yields an empty frame carrying a
    diagnostic instead of raising, so document-scale extraction can report
    every sentence.
    """
    if lex is None:
        lex = default_marker_lexicon()
    try:
        root_idx = find_root_verb(s)
    except NoRootVerb as exc:
        return SemanticFrame(sentence_id=s.sent_id, diagnostics=(str(exc),))

    roles: list[SemanticRole] = []
    claimed: set[int] = set()
    root = s.entry(root_idx)

    # Action: the root verb and its auxiliaries, in sentence order.
    action_indices = sorted(
        [root_idx] + [c.index for c in s.children(root_idx) if c.deprel in _AUX_DEPRELS]
    )
    roles.append(
        SemanticRole(
            label=ACTION,
            token_range=tuple(action_indices),
            text=" ".join(s.entry(i).form for i in action_indices),
            head_lemma=root.lemma,
            lemmas=tuple(s.entry(i).lemma for i in action_indices),
        )
    )
    claimed.update(action_indices)

    def claim(role: SemanticRole) -> None:
        roles.append(role)
        claimed.update(role.token_range)

    # Actor: noun phrase of the subject.
    subjects = [c for c in s.children(root_idx) if c.deprel in _SUBJECT_DEPRELS]
    if subjects:
        claim(_role_from_phrase(s, ACTOR, phrase_of(s, subjects[0].index)))

    # Beneficiary: NP under a beneficiary-marker preposition on the action.
    prepositions = [c for c in s.children(root_idx) if c.upos == "ADP"]
    beneficiary_prep: AnnotationEntry | None = None
    for prep in prepositions:
        if any(contains_marker([prep.lemma], m) for m in lex.beneficiary_markers):
            noun = _noun_child(s, prep)
            if noun is not None:
                beneficiary_prep = prep
                claim(_role_from_phrase(s, BENEFICIARY, phrase_of(s, noun.index)))
                claimed.add(prep.index)
                break

    # Object: direct object NP, else the first unclaimed preposition-headed
    # dependent when no beneficiary marker fired.
    objects = [c for c in s.children(root_idx) if c.deprel in _OBJECT_DEPRELS]
    if objects:
        claim(_role_from_phrase(s, OBJECT, phrase_of(s, objects[0].index)))
    elif beneficiary_prep is None:
        for prep in prepositions:
            phrase = phrase_of(s, prep.index)
            lemmas = [s.entry(i).lemma for i in range(phrase.token_range[0], phrase.token_range[1] + 1)]
            if any(contains_marker(lemmas, m) for m in lex.condition_markers):
                continue
            if any(contains_marker(lemmas, m) for m in lex.constraint_markers):
                continue
            if claimed & set(range(phrase.token_range[0], phrase.token_range[1] + 1)):
                continue
            claim(_role_from_phrase(s, OBJECT, phrase))
            break

    # Condition / constraint: marker-bearing PP, ADVP or subordinate clause.
    for child in s.children(root_idx):
        if child.index in claimed or child.upos == "PUNCT":
            continue
        phrase = phrase_of(s, child.index)
        if claimed & set(range(phrase.token_range[0], phrase.token_range[1] + 1)):
            continue
        if phrase.label not in ("PP", "ADVP") and child.deprel not in _CLAUSE_DEPRELS:
            continue
        lemmas = [s.entry(i).lemma for i in range(phrase.token_range[0], phrase.token_range[1] + 1)]
        condition_hits = sum(1 for m in lex.condition_markers if contains_marker(lemmas, m))
        constraint_hits = sum(1 for m in lex.constraint_markers if contains_marker(lemmas, m))
        if condition_hits == 0 and constraint_hits == 0:
            continue
        label = CONSTRAINT if constraint_hits > condition_hits else CONDITION
        claim(_role_from_phrase(s, label, phrase))

    return SemanticFrame(sentence_id=s.sent_id, roles=tuple(roles))


# ---------------------------------------------------------------------------
# Gold-frame ingestion: JSON lists of {label, text, token_range}.


def frame_from_roles(sentence_id: int, roles: list[dict]) -> SemanticFrame:
    parsed = []
    for role in roles:
        label = str(role["label"]).strip().lower()
        if not label:
            raise InvalidInput("gold role with empty label")
        token_range = tuple(role.get("token_range", ()))
        parsed.append(
            SemanticRole(
                label=label,
                token_range=token_range,
                text=str(role.get("text", "")),
                head_lemma=str(role.get("head_lemma", "")),
                lemmas=tuple(role.get("lemmas", ())),
            )
        )
    return SemanticFrame(sentence_id=sentence_id, roles=tuple(parsed))


def load_gold_frames(path: str | Path) -> dict[str, SemanticFrame]:
    """Load gold frames for segments: JSON ``{segment_id: [role, ...]}``."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise InvalidInput("gold frame file must be a JSON object keyed by segment id")
    frames: dict[str, SemanticFrame] = {}
    for segment_id, roles in data.items():
        sent_id = int(segment_id[1:]) if segment_id.startswith("s") else -1
        frames[segment_id] = frame_from_roles(sent_id, roles)
    return frames
