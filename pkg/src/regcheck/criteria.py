"""Legal requirements and executable IF/THEN compliance rules.

A requirement is natural-language text with a gold semantic-role
decomposition. A template rule is ``IF <precondition> THEN <atoms>`` where
the precondition is a boolean expression over concept atoms (AND, OR, NOT,
parentheses) and the postcondition lists the atoms that must hold whenever
the precondition does. Facts are evaluated closed-world: an absent atom is
false.

Verdicts are three-valued. An unmet precondition is NotApplicable — not a
breach — which keeps "the rule never triggered" distinct from "the rule
triggered and was satisfied".
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

from .classify import ConceptModel
from .errors import DuplicateId, InvalidInput, InvalidRequirement, ParseError, UnknownConcept
from .srl import SemanticFrame, frame_from_roles

COMPLIANT = "Compliant"
VIOLATED = "Violated"
NOT_APPLICABLE = "NotApplicable"


@dataclass(frozen=True)
class LegalRequirement:
    req_id: str
    text: str
    frame: SemanticFrame
    source_ref: str = ""


def load_requirements(stream: str | TextIO) -> list[LegalRequirement]:
    """Parse requirement JSON: [{req_id, text, source_ref?, frame: [roles]}]."""
    text = stream.read() if hasattr(stream, "read") else stream
    data = json.loads(text)
    if not isinstance(data, list):
        raise InvalidInput("requirements file must be a JSON list")
    requirements: list[LegalRequirement] = []
    seen: set[str] = set()
    for item in data:
        req_id = str(item.get("req_id", "")).strip()
        if not req_id:
            raise InvalidRequirement("requirement without req_id")
        if req_id in seen:
            raise DuplicateId(f"duplicate requirement id {req_id!r}")
        seen.add(req_id)
        frame = frame_from_roles(-1, item.get("frame", []))
        if not frame.roles:
            raise InvalidRequirement(f"requirement {req_id!r} has an empty frame")
        requirements.append(
            LegalRequirement(
                req_id=req_id,
                text=str(item.get("text", "")),
                frame=frame,
                source_ref=str(item.get("source_ref", "")),
            )
        )
    return requirements


def load_requirements_file(path: str | Path) -> list[LegalRequirement]:
    return load_requirements(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Boolean expressions over concept atoms.


class Expr:
    def evaluate(self, facts: frozenset[str] | set[str]) -> bool:
        raise NotImplementedError

    def atoms(self) -> set[str]:
        raise NotImplementedError

    def negation_free(self) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class Atom(Expr):
    name: str

    def evaluate(self, facts):
        return self.name in facts

    def atoms(self):
        return {self.name}

    def negation_free(self):
        return True

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr

    def evaluate(self, facts):
        return not self.operand.evaluate(facts)

    def atoms(self):
        return self.operand.atoms()

    def negation_free(self):
        return False

    def __str__(self):
        return f"NOT {self.operand}"


@dataclass(frozen=True)
class And(Expr):
    operands: tuple[Expr, ...]

    def evaluate(self, facts):
        return all(op.evaluate(facts) for op in self.operands)

    def atoms(self):
        return set().union(*(op.atoms() for op in self.operands))

    def negation_free(self):
        return all(op.negation_free() for op in self.operands)

    def __str__(self):
        return "(" + " AND ".join(str(op) for op in self.operands) + ")"


@dataclass(frozen=True)
class Or(Expr):
    operands: tuple[Expr, ...]

    def evaluate(self, facts):
        return any(op.evaluate(facts) for op in self.operands)

    def atoms(self):
        return set().union(*(op.atoms() for op in self.operands))

    def negation_free(self):
        return all(op.negation_free() for op in self.operands)

    def __str__(self):
        return "(" + " OR ".join(str(op) for op in self.operands) + ")"


_TOKEN = re.compile(r"\s*(\(|\)|,|[A-Za-z_][A-Za-z0-9_.]*)")
_KEYWORDS = {"IF", "THEN", "AND", "OR", "NOT"}


class _Tokens:
    def __init__(self, text: str, line: int):
        self.line = line
        self.items: list[tuple[str, int]] = []  # (token, column)
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                if text[pos:].strip():
                    column = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
                    raise ParseError(f"unexpected character {text[pos:].strip()[0]!r}", line, column)
                break
            self.items.append((m.group(1), m.start(1) + 1))
            pos = m.end()
        self.pos = 0

    def peek(self) -> str | None:
        return self.items[self.pos][0] if self.pos < len(self.items) else None

    def column(self) -> int:
        if self.pos < len(self.items):
            return self.items[self.pos][1]
        return self.items[-1][1] + len(self.items[-1][0]) if self.items else 1

    def next(self) -> str:
        token = self.peek()
        if token is None:
            raise ParseError("unexpected end of rule", self.line, self.column())
        self.pos += 1
        return token

    def keyword(self, token: str | None) -> str | None:
        return token.upper() if token is not None and token.upper() in _KEYWORDS else None


def _parse_expr(tokens: _Tokens) -> Expr:
    return _parse_or(tokens)


def _parse_or(tokens: _Tokens) -> Expr:
    operands = [_parse_and(tokens)]
    while tokens.keyword(tokens.peek()) == "OR":
        tokens.next()
        operands.append(_parse_and(tokens))
    return operands[0] if len(operands) == 1 else Or(tuple(operands))


def _parse_and(tokens: _Tokens) -> Expr:
    operands = [_parse_unary(tokens)]
    while tokens.keyword(tokens.peek()) == "AND":
        tokens.next()
        operands.append(_parse_unary(tokens))
    return operands[0] if len(operands) == 1 else And(tuple(operands))


def _parse_unary(tokens: _Tokens) -> Expr:
    token = tokens.peek()
    if token is None:
        raise ParseError("expected an atom", tokens.line, tokens.column())
    if tokens.keyword(token) == "NOT":
        tokens.next()
        return Not(_parse_unary(tokens))
    if token == "(":
        tokens.next()
        inner = _parse_expr(tokens)
        if tokens.peek() != ")":
            raise ParseError("expected ')'", tokens.line, tokens.column())
        tokens.next()
        return inner
    if token in (")", ",") or tokens.keyword(token):
        raise ParseError(f"expected an atom, found {token!r}", tokens.line, tokens.column())
    tokens.next()
    return Atom(token)


@dataclass(frozen=True)
class TemplateRule:
    rule_id: str
    precondition: Expr
    postcondition: tuple[str, ...]
    source: str = ""


@dataclass(frozen=True)
class RuleVerdict:
    rule_id: str
    status: str  # Compliant | Violated | NotApplicable
    missing_atoms: tuple[str, ...] = ()


def parse_rule(text: str, line: int = 1, rule_id: str | None = None) -> TemplateRule:
    """Parse one ``[id:] IF <expr> THEN <atoms>`` rule."""
    body = text
    if rule_id is None:
        head, sep, rest = text.partition(":")
        candidate = head.strip()
        if sep and re.fullmatch(r"[A-Za-z0-9_.\-]+", candidate) and candidate.upper() not in _KEYWORDS:
            rule_id, body = candidate, rest
    tokens = _Tokens(body, line)
    if tokens.keyword(tokens.peek()) != "IF":
        raise ParseError("rule must start with IF", line, tokens.column())
    tokens.next()
    if tokens.keyword(tokens.peek()) == "THEN":
        raise ParseError("empty precondition", line, tokens.column())
    precondition = _parse_expr(tokens)
    if tokens.keyword(tokens.peek()) != "THEN":
        raise ParseError("expected THEN", line, tokens.column())
    tokens.next()
    atoms: list[str] = []
    while tokens.peek() is not None:
        token = tokens.next()
        if token == ",":
            continue
        if tokens.keyword(token) == "AND":
            continue
        if tokens.keyword(token) or token in ("(", ")"):
            raise ParseError(f"expected an atom, found {token!r}", line, tokens.column())
        atoms.append(token)
    if not atoms:
        raise ParseError("postcondition must list at least one atom", line, tokens.column())
    return TemplateRule(
        rule_id=rule_id if rule_id is not None else f"rule-{line}",
        precondition=precondition,
        postcondition=tuple(atoms),
        source=text.strip(),
    )


def load_rules(
    stream: str | TextIO, concepts: ConceptModel | None = None
) -> list[TemplateRule]:
    """Parse a rule file: one rule per line, '#' comments.

    With a concept model supplied, every atom must name a declared concept
    (strict mode).
    """
    text = stream.read() if hasattr(stream, "read") else stream
    rules: list[TemplateRule] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rule = parse_rule(line, lineno)
        if rule.rule_id in seen:
            raise DuplicateId(f"duplicate rule id {rule.rule_id!r}")
        seen.add(rule.rule_id)
        if concepts is not None:
            for atom in sorted(rule.precondition.atoms() | set(rule.postcondition)):
                if atom not in concepts.ids:
                    raise UnknownConcept(f"rule {rule.rule_id!r}: unknown atom {atom!r}")
        rules.append(rule)
    return rules


def load_rules_file(path: str | Path, concepts: ConceptModel | None = None) -> list[TemplateRule]:
    return load_rules(Path(path).read_text(encoding="utf-8"), concepts)


def evaluate_rule(rule: TemplateRule, facts: Iterable[str]) -> RuleVerdict:
    """Three-valued evaluation of one rule against a fact set."""
    fact_set = frozenset(facts)
    if not rule.precondition.evaluate(fact_set):
        return RuleVerdict(rule_id=rule.rule_id, status=NOT_APPLICABLE)
    missing = tuple(a for a in rule.postcondition if a not in fact_set)
    if missing:
        return RuleVerdict(rule_id=rule.rule_id, status=VIOLATED, missing_atoms=missing)
    return RuleVerdict(rule_id=rule.rule_id, status=COMPLIANT)
