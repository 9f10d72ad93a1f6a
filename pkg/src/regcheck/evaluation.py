"""Scoring predicted violations against gold annotations.

Positives are violations: a true positive is a correctly detected
violation, a false negative a missed one. Precision and recall with an
empty denominator report ``None`` ("undefined" in TSV output) rather than
a misleading perfect score.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

from .errors import InvalidInput

UNDEFINED = "undefined"


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn) < 0:
            raise InvalidInput("confusion counts must be non-negative")


def confusion(gold: Iterable[str], predicted: Iterable[str]) -> Confusion:
    gold_set, predicted_set = set(gold), set(predicted)
    return Confusion(
        tp=len(gold_set & predicted_set),
        fp=len(predicted_set - gold_set),
        fn=len(gold_set - predicted_set),
    )


def precision_recall(c: Confusion) -> tuple[float | None, float | None]:
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp > 0 else None
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn > 0 else None
    return precision, recall


def load_gold(stream: str | TextIO) -> dict[str, set[str]]:
    """Parse gold violations: ``<doc_id>\\t<requirement_or_rule_id>`` lines."""
    text = stream.read() if hasattr(stream, "read") else stream
    gold: dict[str, set[str]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise InvalidInput(f"gold line {lineno}: expected 2 tab-separated fields")
        gold.setdefault(fields[0], set()).add(fields[1])
    return gold


def load_gold_file(path: str | Path) -> dict[str, set[str]]:
    return load_gold(Path(path).read_text(encoding="utf-8"))


def _fmt(value: float | None) -> str:
    return UNDEFINED if value is None else f"{value:.4f}"


def evaluation_table(per_doc: dict[str, Confusion]) -> str:
    """Render a TSV: one row per document plus micro-averaged totals."""
    lines = ["doc_id\ttp\tfp\tfn\tprecision\trecall"]
    total = Confusion(
        tp=sum(c.tp for c in per_doc.values()),
        fp=sum(c.fp for c in per_doc.values()),
        fn=sum(c.fn for c in per_doc.values()),
    )
    for doc_id in sorted(per_doc):
        c = per_doc[doc_id]
        p, r = precision_recall(c)
        lines.append(f"{doc_id}\t{c.tp}\t{c.fp}\t{c.fn}\t{_fmt(p)}\t{_fmt(r)}")
    p, r = precision_recall(total)
    lines.append(f"TOTAL\t{total.tp}\t{total.fp}\t{total.fn}\t{_fmt(p)}\t{_fmt(r)}")
    return "\n".join(lines) + "\n"
