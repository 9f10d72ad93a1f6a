"""Shallow deterministic English annotator (model id ``builtin-en``).

Produces 10-column dependency annotations without any downloaded model:
lexicon + suffix POS tagging, rule-table lemmatization, and a cascade of
attachment heuristics that always yields a single-rooted acyclic tree with
contiguous indices. It is intentionally shallow — attachment choices inside
long clauses are approximate — but its output is stable and always parses
cleanly downstream. Use a full toolkit model (``stanza:en``) where
linguistic fidelity matters more than zero-dependency determinism.
"""

from __future__ import annotations

from dataclasses import dataclass

from .textproc import split_sentences, tokenize

_DETERMINERS = frozenset(
    "the a an this that these those any all each every no such its his her their our your".split()
)
_PREPOSITIONS = frozenset(
    """of in on at by for with from into under over about within without after
    before during between among upon through against concerning regarding""".split()
)
_AUXILIARIES = frozenset(
    "shall will would should can could may might must is are was were am be been being has have had do does did having".split()
)
_PRONOUNS = frozenset("it he she they we you i them him us me who whom itself".split())
_CCONJ = frozenset("and or but nor".split())
_SCONJ = frozenset("if unless because although whereas once since".split())
_ADVERBS = frozenset(
    "not very also always never however thus therefore later now here there where when why how feasible".split()
)
_ADJECTIVES = frozenset(
    """personal undue supervisory competent unlikely natural necessary
    appropriate relevant lawful clear plain right new other further
    additional technical organisational organizational aware early late""".split()
)
_VERB_LEMMAS = frozenset(
    """notify inform assist ensure provide describe communicate accompany make
    take collect store delete erase update rectify restrict transfer obtain
    identify document report result become act apply require process protect
    implement maintain review assess establish submit retain share disclose
    conduct facilitate close handle use""".split()
)
_IRREGULAR_LEMMAS = {
    "is": "be", "are": "be", "was": "be", "were": "be", "been": "be",
    "being": "be", "am": "be", "has": "have", "had": "have", "having": "have",
    "does": "do", "did": "do", "done": "do", "made": "make", "taken": "take",
    "took": "take", "given": "give", "gave": "give", "became": "become",
    "children": "child", "data": "data", "media": "media", "person": "person",
    "persons": "person", "hours": "hour", "days": "day",
}
_ING_LEMMAS = {
    "ensuring": "ensure", "making": "make", "processing": "processing",
    "facilitating": "facilitate", "conducting": "conduct", "closing": "close",
    "using": "use", "storing": "store", "sharing": "share", "handling": "handle",
}

_NOMINAL = ("NOUN", "PROPN", "PRON")


@dataclass
class Word:
    index: int
    form: str
    lemma: str
    upos: str
    head: int = 0
    deprel: str = "dep"


def lemmatize(form: str, upos: str) -> str:
    low = form.casefold()
    if low in _IRREGULAR_LEMMAS:
        return _IRREGULAR_LEMMAS[low]
    if low in _ING_LEMMAS:
        return _ING_LEMMAS[low]
    if upos in ("PUNCT", "NUM"):
        return low
    if upos == "VERB":
        if low.endswith("ies") and len(low) > 4:
            return low[:-3] + "y"
        if low.endswith("ied") and len(low) > 4:
            return low[:-3] + "y"
        if low.endswith("ing") and len(low) > 5:
            stem = low[:-3]
            return stem[:-1] if len(stem) > 2 and stem[-1] == stem[-2] else stem
        if low.endswith("ed") and len(low) > 4:
            stem = low[:-2]
            return stem[:-1] if len(stem) > 2 and stem[-1] == stem[-2] else stem
        if low.endswith("es") and len(low) > 4 and low[-3] in "sxzh":
            return low[:-2]
        if low.endswith("s") and not low.endswith(("ss", "us", "is")):
            return low[:-1]
        return low
    if upos in ("NOUN", "PROPN"):
        if low.endswith("ies") and len(low) > 4:
            return low[:-3] + "y"
        if low.endswith("es") and len(low) > 4 and low[-3] in "sxzh":
            return low[:-2]
        if low.endswith("s") and not low.endswith(("ss", "us", "is")):
            return low[:-1]
    return low


def _looks_verbal(low: str) -> bool:
    if low in _VERB_LEMMAS:
        return True
    if low.endswith(("ify", "ise", "ize")):
        return True
    for suffix in ("s", "ed", "ing", "ies", "ied"):
        if low.endswith(suffix):
            stem_try = lemmatize(low, "VERB")
            if stem_try in _VERB_LEMMAS:
                return True
    return False


def tag(tokens: list[str]) -> list[str]:
    tags: list[str] = []
    for i, token in enumerate(tokens):
        low = token.casefold()
        if not any(c.isalnum() for c in token):
            tags.append("PUNCT")
        elif token.replace(".", "").replace(",", "").isdigit():
            tags.append("NUM")
        elif low in _AUXILIARIES:
            tags.append("AUX")
        elif low in _DETERMINERS:
            tags.append("DET")
        elif low == "to":
            nxt = tokens[i + 1].casefold() if i + 1 < len(tokens) else ""
            tags.append("PART" if _looks_verbal(nxt) and nxt not in _DETERMINERS else "ADP")
        elif low in _PREPOSITIONS:
            tags.append("ADP")
        elif low in _PRONOUNS:
            tags.append("PRON")
        elif low in _CCONJ:
            tags.append("CCONJ")
        elif low in _SCONJ:
            tags.append("SCONJ")
        elif low in _ADVERBS or (low.endswith("ly") and len(low) > 3):
            tags.append("ADV")
        elif low in _ADJECTIVES:
            tags.append("ADJ")
        elif _looks_verbal(low):
            tags.append("VERB")
        elif i > 0 and token[0].isupper():
            tags.append("PROPN")
        else:
            tags.append("NOUN")
    return tags


def _choose_root(words: list[Word]) -> int:
    """First plain verb not buried in a prepositional gerund phrase."""
    for w in words:
        if w.upos != "VERB":
            continue
        window = words[max(0, w.index - 3) : w.index - 1]
        if any(prev.upos == "ADP" for prev in window):
            continue
        return w.index
    for w in words:
        if w.upos == "AUX":
            return w.index
    for w in reversed(words):
        if w.upos != "PUNCT":
            return w.index
    return words[-1].index


def parse_sentence(text: str) -> list[Word]:
    """Tag, lemmatize and attach one sentence; the result is always a tree."""
    tokens = tokenize(text)
    if not tokens:
        return []
    tags = tag(tokens)
    words = [
        Word(index=i + 1, form=form, lemma="", upos=upos)
        for i, (form, upos) in enumerate(zip(tokens, tags))
    ]
    root = _choose_root(words)
    words[root - 1].head = 0
    words[root - 1].deprel = "root"
    if words[root - 1].upos not in ("VERB", "AUX"):
        words[root - 1].upos = "NOUN" if words[root - 1].upos == "PUNCT" else words[root - 1].upos

    def next_noun_after(i: int) -> int | None:
        for w in words[i:]:
            if w.upos in _NOMINAL:
                return w.index
            if w.upos == "PUNCT":
                break
        return None

    # Noun-chunk heads: the last nominal of each maximal nominal run.
    chunk_head: dict[int, int] = {}
    i = 0
    while i < len(words):
        if words[i].upos in _NOMINAL + ("DET", "ADJ", "NUM"):
            j = i
            last_nominal = None
            while j < len(words) and words[j].upos in _NOMINAL + ("DET", "ADJ", "NUM"):
                if words[j].upos in _NOMINAL:
                    last_nominal = words[j].index
                j += 1
            if last_nominal is not None:
                for k in range(i, j):
                    chunk_head[words[k].index] = last_nominal
            i = j
        else:
            i += 1

    subject_taken = False
    object_taken = False
    for w in words:
        if w.index == root:
            continue
        low = w.form.casefold()
        head_of_chunk = chunk_head.get(w.index)
        if w.upos == "PUNCT":
            w.head, w.deprel = root, "punct"
        elif w.upos == "AUX":
            verb = next(
                (v.index for v in words[w.index :] if v.upos == "VERB"), root
            )
            w.head, w.deprel = verb, "aux"
        elif w.upos in ("DET", "ADJ", "NUM") and head_of_chunk and head_of_chunk != w.index:
            rel = {"DET": "det", "ADJ": "amod", "NUM": "nummod"}[w.upos]
            w.head, w.deprel = head_of_chunk, rel
        elif w.upos in _NOMINAL and head_of_chunk and head_of_chunk != w.index:
            w.head, w.deprel = head_of_chunk, "compound"
        elif w.upos in _NOMINAL:
            prev = words[w.index - 2] if w.index >= 2 else None
            prev2 = words[w.index - 3] if w.index >= 3 else None
            attached_prep = None
            for candidate in (prev, prev2):
                if candidate is not None and candidate.upos == "ADP":
                    attached_prep = candidate.index
                elif candidate is not None and candidate.upos not in ("DET", "ADJ", "NUM"):
                    break
            if attached_prep is not None:
                w.head, w.deprel = attached_prep, "pobj"
            elif w.index < root and not subject_taken:
                w.head, w.deprel = root, "nsubj"
                subject_taken = True
            elif w.index > root and not object_taken:
                w.head, w.deprel = root, "dobj"
                object_taken = True
            else:
                w.head, w.deprel = root, "dep"
        elif w.upos == "ADP":
            prev_noun = None
            for v in reversed(words[root : w.index - 1]):
                if v.upos in _NOMINAL:
                    prev_noun = v.index
                    break
                if v.upos == "PUNCT":
                    break
            w.head = prev_noun if prev_noun is not None else root
            w.deprel = "prep"
        elif w.upos == "VERB":
            prev = words[w.index - 2] if w.index >= 2 else None
            if prev is not None and prev.upos == "ADP":
                w.head, w.deprel = prev.index, "pcomp"
            elif prev is not None and prev.upos == "PART":
                w.head, w.deprel = root, "advcl"
            else:
                w.head, w.deprel = root, "conj" if w.index > root else "advcl"
        elif w.upos == "PART":
            nxt = words[w.index] if w.index < len(words) else None
            if low == "to" and nxt is not None and nxt.upos == "VERB":
                w.head, w.deprel = nxt.index, "mark"
            else:
                w.head, w.deprel = root, "neg" if low == "not" else "dep"
        elif w.upos == "SCONJ":
            verb_after = next((v.index for v in words[w.index :] if v.upos == "VERB"), root)
            w.head, w.deprel = verb_after, "mark"
        elif w.upos == "CCONJ":
            w.head, w.deprel = root, "cc"
        elif w.upos == "ADV":
            w.head, w.deprel = root, "advmod"
        else:
            w.head, w.deprel = root, "dep"

    _repair_tree(words, root)
    for w in words:
        w.lemma = lemmatize(w.form, w.upos)
    return words


def _repair_tree(words: list[Word], root: int) -> None:
    """Reattach anything whose head chain does not reach the root."""
    n = len(words)
    for w in words:
        if w.index != root and (w.head == w.index or not 0 <= w.head <= n):
            w.head, w.deprel = root, "dep"
    for w in words:
        seen = set()
        cur = w.index
        ok = True
        while cur != 0:
            if cur in seen:
                ok = False
                break
            seen.add(cur)
            cur = words[cur - 1].head
        if not ok:
            w.head, w.deprel = root, "dep"
    roots = [w for w in words if w.head == 0]
    for extra in roots:
        if extra.index != root:
            extra.head, extra.deprel = root, "dep"


def annotate_text(text: str) -> str:
    """Full text to 10-column annotation blocks, one per sentence."""
    blocks = []
    for sent_id, (start, end) in enumerate(split_sentences(text)):
        sentence = text[start:end]
        words = parse_sentence(sentence)
        if not words:
            continue
        lines = [f"# sent_id = {sent_id}", f"# text = {sentence}"]
        for w in words:
            lines.append(
                f"{w.index}\t{w.form}\t{w.lemma}\t{w.upos}\t_\t_\t{w.head}\t{w.deprel}\t_\t_"
            )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")
