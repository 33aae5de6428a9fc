"""Core vocabulary of the reasoning engine: literals, rules, preferences, theories.

A theory is a triple (facts, rules, preferences). Facts are ground literals,
rules are instances of six fixed templates (two universally quantified, one
existentially quantified, three ground), and preferences are ordered pairs of
rule ids used to settle conflicts between rules with opposing heads.

Everything here is immutable after construction and safe to share across
threads or worker processes.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace

# Reserved token for the single bound variable a rule may carry. Never a
# legal entity name.
VARIABLE = "?x"

# Placeholder object for unary statements ("the dog is a nurse") and for
# knowledge-phrase literals whose whole content lives in the predicate slot.
NO_OBJECT = "-"


class Label(str, enum.Enum):
    PROVED = "proved"
    DISPROVED = "disproved"
    UNKNOWN = "unknown"

    def __str__(self) -> str:  # pragma: no cover - repr convenience
        return self.value


class Quantifier(str, enum.Enum):
    NONE = "none"
    FORALL = "forall"
    EXISTS = "exists"


@dataclass(frozen=True, order=True)
class Literal:
    """A signed triple (subject, predicate, object).

    Subject/object positions hold entity names, the VARIABLE token, or
    NO_OBJECT. A knowledge-phrase literal puts the full out-of-vocabulary
    phrase in the predicate slot and NO_OBJECT in the object slot.
    """

    subject: str
    predicate: str
    obj: str = NO_OBJECT
    positive: bool = True

    def negate(self) -> "Literal":
        return replace(self, positive=not self.positive)

    @property
    def atom(self) -> tuple[str, str, str]:
        """The unsigned triple identifying this statement."""
        return (self.subject, self.predicate, self.obj)

    def is_ground(self) -> bool:
        return VARIABLE not in (self.subject, self.obj)

    def substitute(self, entity: str) -> "Literal":
        """Bind the variable (wherever it occurs) to a concrete entity."""
        subj = entity if self.subject == VARIABLE else self.subject
        obj = entity if self.obj == VARIABLE else self.obj
        return Literal(subj, self.predicate, obj, self.positive)

    def __str__(self) -> str:
        return literal_to_str(self)


@dataclass(frozen=True)
class Rule:
    """One rule instance. ``template`` is the template number (1..6).

    Template shapes, with X the bound variable:
      1  forall X: (X, p1, e1) => (X, p2, e2)
      2  forall X: (X, p1, e1) & (X, p2, e2) => (X, p3, e3)
      3  (e1, p1, e2) => (e2, p2, e3)
      4  (e1, p1, e2) & (e3, p2, e2) => (e2, p3, e4)
      5  (e1, phrase) => (e1, p2, e2)   with an out-of-vocabulary phrase body
      6  exists X: (X, p1, e1) => (e2, p2, e3)
    """

    id: str
    template: int
    body: tuple[Literal, ...]
    head: Literal
    quantifier: Quantifier = Quantifier.NONE

    @property
    def ordinal(self) -> int:
        return int(self.id.removeprefix("Rule"))

    def __str__(self) -> str:
        return rule_to_str(self)


Preference = tuple[str, str]  # (winning rule id, losing rule id)


@dataclass(frozen=True)
class Theory:
    facts: tuple[Literal, ...]
    rules: tuple[Rule, ...]
    preferences: tuple[Preference, ...] = ()

    def rule_by_id(self, rid: str) -> Rule:
        for r in self.rules:
            if r.id == rid:
                return r
        raise KeyError(rid)

    def entities(self) -> list[str]:
        """All entity names mentioned, in first-appearance order."""
        seen: dict[str, None] = {}
        for lit in self.all_literals():
            for term in (lit.subject, lit.obj):
                if term not in (VARIABLE, NO_OBJECT):
                    seen.setdefault(term, None)
        return list(seen)

    def all_literals(self):
        for f in self.facts:
            yield f
        for r in self.rules:
            yield from r.body
            yield r.head


@dataclass(frozen=True)
class Question:
    literal: Literal


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, message: str) -> None:
        self.violations.append(Violation(kind, message))

    def __str__(self) -> str:
        if self.ok:
            return "well-formed"
        return "\n".join(f"[{v.kind}] {v.message}" for v in self.violations)


_BODY_ARITY = {1: 1, 2: 2, 3: 1, 4: 2, 5: 1, 6: 1}
_QUANTIFIER_FOR = {
    1: Quantifier.FORALL,
    2: Quantifier.FORALL,
    3: Quantifier.NONE,
    4: Quantifier.NONE,
    5: Quantifier.NONE,
    6: Quantifier.EXISTS,
}


def validate_theory(theory: Theory) -> ValidationReport:
    """Structural well-formedness check. Violations are report entries,
    never exceptions; an empty report means the theory is well-formed."""
    report = ValidationReport()

    fact_set = set(theory.facts)
    for f in theory.facts:
        if not f.is_ground():
            report.add("nonground-fact", f"fact {f} contains a variable")
        if f.negate() in fact_set and f.positive:
            report.add("contradictory-facts", f"facts contain both {f} and its negation")

    seen_ids: set[str] = set()
    for r in theory.rules:
        if r.id in seen_ids:
            report.add("duplicate-rule-id", f"rule id {r.id} appears more than once")
        seen_ids.add(r.id)
        _check_template(r, report)

    known = {r.id for r in theory.rules}
    seen_pairs: set[Preference] = set()
    for winner, loser in theory.preferences:
        if winner == loser:
            report.add("self-preference", f"{winner} cannot be preferred over itself")
        for rid in (winner, loser):
            if rid not in known:
                report.add("dangling-preference", f"preference references unknown rule {rid}")
        if (winner, loser) in seen_pairs:
            report.add("duplicate-preference", f"preference {winner} > {loser} repeated")
        if (loser, winner) in seen_pairs:
            report.add("symmetric-preference",
                       f"both {winner} > {loser} and {loser} > {winner} are stated")
        seen_pairs.add((winner, loser))

    return report


def _check_template(r: Rule, report: ValidationReport) -> None:
    def bad(msg: str) -> None:
        report.add("malformed-template", f"{r.id}: {msg}")

    if r.template not in _BODY_ARITY:
        bad(f"unknown template number {r.template}")
        return
    if len(r.body) != _BODY_ARITY[r.template]:
        bad(f"template {r.template} needs {_BODY_ARITY[r.template]} body literal(s), got {len(r.body)}")
        return
    if r.quantifier != _QUANTIFIER_FOR[r.template]:
        bad(f"template {r.template} requires quantifier {_QUANTIFIER_FOR[r.template].value}")

    if r.template in (1, 2):
        if any(b.subject != VARIABLE for b in r.body) or r.head.subject != VARIABLE:
            bad("universal rule must bind the variable as every subject")
        if any(b.obj == VARIABLE for b in r.body) or r.head.obj == VARIABLE:
            bad("universal rule must not bind the variable in object position")
    elif r.template == 6:
        if r.body[0].subject != VARIABLE or r.body[0].obj == VARIABLE:
            bad("existential rule binds the variable as the body subject only")
        if not r.head.is_ground():
            bad("existential rule head must be ground")
    else:
        if not r.head.is_ground() or any(not b.is_ground() for b in r.body):
            bad("ground template contains a variable")
        if r.template == 3 and r.body[0].obj != r.head.subject:
            bad("template 3 head subject must equal the body object")
        if r.template == 4 and any(b.obj != r.head.subject for b in r.body):
            bad("template 4 body literals must share the head subject as object")
        if r.template == 5:
            if r.body[0].subject != r.head.subject:
                bad("template 5 body and head must share their subject")
            if r.body[0].obj != NO_OBJECT:
                bad("template 5 body must be a phrase literal")


# ---------------------------------------------------------------------------
# Canonical text form, parse(serialize(x)) == x
# ---------------------------------------------------------------------------

_LIT_RE = re.compile(r"^(!?)\(([^,()]+), ([^,()]+), ([^,()]+)\)$")


def literal_to_str(lit: Literal) -> str:
    sign = "" if lit.positive else "!"
    return f"{sign}({lit.subject}, {lit.predicate}, {lit.obj})"


def literal_from_str(text: str) -> Literal:
    m = _LIT_RE.match(text.strip())
    if not m:
        raise ValueError(f"not a literal: {text!r}")
    neg, subj, pred, obj = m.groups()
    return Literal(subj, pred, obj, positive=not neg)


def rule_to_str(rule: Rule) -> str:
    prefix = ""
    if rule.quantifier == Quantifier.FORALL:
        prefix = "forall X: "
    elif rule.quantifier == Quantifier.EXISTS:
        prefix = "exists X: "
    body = " & ".join(literal_to_str(b) for b in rule.body)
    return f"{prefix}{body} -> {literal_to_str(rule.head)}"


def rule_from_str(rid: str, text: str) -> Rule:
    """Rebuild a rule from its canonical text. The template number is
    inferred from the structure, which is unambiguous for every rule this
    package emits (phrase bodies mark template 5)."""
    text = text.strip()
    quantifier = Quantifier.NONE
    if text.startswith("forall X: "):
        quantifier, text = Quantifier.FORALL, text[len("forall X: "):]
    elif text.startswith("exists X: "):
        quantifier, text = Quantifier.EXISTS, text[len("exists X: "):]
    lhs, arrow, rhs = text.partition(" -> ")
    if not arrow:
        raise ValueError(f"not a rule: {text!r}")
    body = tuple(literal_from_str(part) for part in lhs.split(" & "))
    head = literal_from_str(rhs)
    if quantifier == Quantifier.FORALL:
        template = 1 if len(body) == 1 else 2
    elif quantifier == Quantifier.EXISTS:
        template = 6
    elif len(body) == 2:
        template = 4
    elif body[0].obj == NO_OBJECT and head.obj != NO_OBJECT:
        template = 5
    else:
        template = 3
    return Rule(rid, template, body, head, quantifier)


def theory_to_dict(theory: Theory) -> dict:
    return {
        "facts": [literal_to_str(f) for f in theory.facts],
        "rules": [{"id": r.id, "logic": rule_to_str(r)} for r in theory.rules],
        "preferences": [{"winner": w, "loser": l} for w, l in theory.preferences],
    }


def theory_from_dict(data: dict) -> Theory:
    facts = tuple(literal_from_str(f) for f in data["facts"])
    rules = tuple(rule_from_str(r["id"], r["logic"]) for r in data["rules"])
    prefs = tuple((p["winner"], p["loser"]) for p in data["preferences"])
    return Theory(facts, rules, prefs)
