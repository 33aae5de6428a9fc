"""Defeasible entailment with proof extraction.

Evaluation is exact forward chaining over a stratification of the ground
atoms. Within a stratum, an atom's sign is settled by team defeat: a side
is derived iff at least one of its rules fires and every opposing rule
whose body is established is outranked by some firing rule of this side.
Input facts always beat rule conclusions. When both sides of an active
conflict survive the check, or neither does, nothing is derived for that
atom (ambiguity blocking) - generated theories never reach that state, but
hand-written ones may.

Two kinds of conflict resolution are recorded on a derived atom:

* Type1 - the prevailing rule outranks the opposing rule, so the opposing
  body never needs to be examined.
* Type2 - the opposing rule outranks the prevailing one but cannot fire
  because some body literal of it is underivable; that missing literal is
  recorded so proofs can point at it.

Resolutions are stored prevailing-rule first. For Type1 this matches the
stated preference pair; for Type2 the stated preference is the reverse.

``brute_force_entail`` re-derives labels by memoized backward chaining over
its own naive grounding; it shares nothing with the forward path except the
phrase oracle and exists purely as a cross-check for tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .knowledge import KnowledgeOracle, UnknownForeignPhrase
from .logic import (
    Label,
    Literal,
    Quantifier,
    Rule,
    Theory,
    validate_theory,
)

Atom = tuple[str, str, str]

TYPE1 = "Type1"
TYPE2 = "Type2"


class SolverError(Exception):
    pass


class InvalidTheoryError(SolverError):
    pass


class CyclicTheoryError(SolverError):
    def __init__(self, cycle: Sequence[Atom]):
        self.cycle = tuple(cycle)
        pretty = " -> ".join("(%s, %s, %s)" % a for a in self.cycle)
        super().__init__(f"dependency cycle: {pretty}")


class UnresolvedForeignLiteral(SolverError):
    pass


class TooLargeError(SolverError):
    pass


# ---------------------------------------------------------------------------
# Grounding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroundRule:
    rid: str
    ordinal: int
    template: int
    body: tuple[Literal, ...]
    head: Literal
    witness: Optional[str] = None      # entity chosen for an existential body
    satisfiable: bool = True           # False when a phrase body is false/unknown
    bridge: Optional[Literal] = None   # original phrase body of a template-5 rule


@dataclass(frozen=True)
class Grounding:
    rules: tuple[GroundRule, ...]
    universe: tuple[str, ...]


def ground(theory: Theory, oracle: Optional[KnowledgeOracle] = None) -> Grounding:
    """Instantiate quantified rules over the theory's entities and resolve
    phrase bodies through the knowledge oracle."""
    oracle = oracle or KnowledgeOracle()
    universe = tuple(theory.entities())
    out: list[GroundRule] = []
    for rule in theory.rules:
        ordinal = rule.ordinal
        if rule.quantifier == Quantifier.FORALL:
            for e in universe:
                out.append(GroundRule(
                    rule.id, ordinal, rule.template,
                    tuple(b.substitute(e) for b in rule.body),
                    rule.head.substitute(e)))
        elif rule.quantifier == Quantifier.EXISTS:
            for e in universe:
                out.append(GroundRule(
                    rule.id, ordinal, rule.template,
                    (rule.body[0].substitute(e),), rule.head, witness=e))
        elif rule.template == 5:
            bridge = rule.body[0]
            try:
                verdict = oracle.evaluate(bridge, theory.facts)
            except UnknownForeignPhrase as exc:
                raise UnresolvedForeignLiteral(
                    f"{rule.id}: cannot judge phrase body {bridge}") from exc
            out.append(GroundRule(rule.id, ordinal, 5, (), rule.head,
                                  satisfiable=bool(verdict), bridge=bridge))
        else:
            out.append(GroundRule(rule.id, ordinal, rule.template,
                                  rule.body, rule.head))
    return Grounding(tuple(out), universe)


# ---------------------------------------------------------------------------
# Stratification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Strata:
    levels: tuple[tuple[Atom, ...], ...]
    depth_of: dict[Atom, int]


def stratify(grounding: Grounding, facts: Sequence[Literal]) -> Strata:
    """Layer ground atoms by longest rule-dependency chain, ignoring sign.
    Raises CyclicTheoryError naming one cycle if the graph is cyclic."""
    heads: dict[Atom, list[GroundRule]] = {}
    atoms: dict[Atom, None] = {}
    for f in facts:
        atoms.setdefault(f.atom, None)
    for gr in grounding.rules:
        atoms.setdefault(gr.head.atom, None)
        if not gr.satisfiable:
            continue
        heads.setdefault(gr.head.atom, []).append(gr)
        for b in gr.body:
            atoms.setdefault(b.atom, None)

    depth: dict[Atom, int] = {}
    WHITE, GRAY, BLACK = 0, 1, 2
    state: dict[Atom, int] = {}

    def visit(atom: Atom, trail: list[Atom]) -> int:
        mark = state.get(atom, WHITE)
        if mark == BLACK:
            return depth[atom]
        if mark == GRAY:
            cycle = trail[trail.index(atom):] + [atom]
            raise CyclicTheoryError(cycle)
        state[atom] = GRAY
        trail.append(atom)
        d = 0
        for gr in heads.get(atom, ()):  # noqa: B909 - heads is fixed here
            for b in gr.body:
                d = max(d, visit(b.atom, trail) + 1)
        trail.pop()
        state[atom] = BLACK
        depth[atom] = d
        return d

    for atom in atoms:
        visit(atom, [])

    by_level: dict[int, list[Atom]] = {}
    for atom, d in depth.items():
        by_level.setdefault(d, []).append(atom)
    levels = tuple(tuple(sorted(by_level[d])) for d in sorted(by_level))
    return Strata(levels, depth)


# ---------------------------------------------------------------------------
# Forward evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Resolution:
    winner: str            # rule whose conclusion stands
    loser: str             # opposing rule that was dismissed
    kind: str              # TYPE1 or TYPE2
    missing: Optional[Literal] = None   # underivable body literal (Type2)
    # established body of a loser that actually fired; its derivation is part
    # of what makes the conflict active, so proofs must cover it
    loser_premises: tuple[Literal, ...] = ()


@dataclass(frozen=True)
class ProofStep:
    rule_id: str
    premises: tuple[Literal, ...]
    conclusion: Literal
    witness: Optional[str] = None


@dataclass(frozen=True)
class Proof:
    steps: tuple[ProofStep, ...]
    resolutions: tuple[Resolution, ...]
    final: Label


@dataclass(frozen=True)
class EntailmentResult:
    label: Label
    proof: Optional[Proof]
    derived: frozenset[Literal]


@dataclass(frozen=True)
class ConflictIssue:
    atom: Atom
    rule_a: str
    rule_b: str
    reason: str


@dataclass
class ConsistencyReport:
    issues: list[ConflictIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues


@dataclass
class _Derivation:
    rule: Optional[GroundRule]          # None for input facts
    resolutions: tuple[Resolution, ...] = ()


class _Evaluation:
    def __init__(self, theory: Theory, oracle: Optional[KnowledgeOracle]):
        report = validate_theory(theory)
        if not report.ok:
            raise InvalidTheoryError(str(report))
        self.theory = theory
        self.grounding = ground(theory, oracle)
        self.strata = stratify(self.grounding, theory.facts)
        self.facts = set(theory.facts)
        self.prefs = set(theory.preferences)
        self.derived: dict[Literal, _Derivation] = {}
        self.issues: list[ConflictIssue] = []
        self.rules_by_id = {r.id: r for r in theory.rules}

        by_head: dict[Literal, list[GroundRule]] = {}
        for gr in self.grounding.rules:
            by_head.setdefault(gr.head, []).append(gr)
        self._by_head = by_head
        self._run()

    def _run(self) -> None:
        for level in self.strata.levels:
            for atom in level:
                self._settle(atom)

    def _candidates(self, lit: Literal) -> list[GroundRule]:
        return [gr for gr in self._by_head.get(lit, ())
                if gr.satisfiable and all(b in self.derived for b in gr.body)]

    def _settle(self, atom: Atom) -> None:
        pos = Literal(*atom)
        neg = pos.negate()
        if pos in self.facts:
            self.derived[pos] = _Derivation(None)
            return
        if neg in self.facts:
            self.derived[neg] = _Derivation(None)
            return
        cand_pos = self._candidates(pos)
        cand_neg = self._candidates(neg)
        pos_wins = self._team_wins(cand_pos, cand_neg)
        neg_wins = self._team_wins(cand_neg, cand_pos)
        if pos_wins and not neg_wins:
            self._derive(pos, cand_pos, cand_neg, self._by_head.get(neg, ()))
        elif neg_wins and not pos_wins:
            self._derive(neg, cand_neg, cand_pos, self._by_head.get(pos, ()))
        elif cand_pos and cand_neg:
            reason = ("mutual team defeat" if pos_wins else "no ordering given")
            for a in cand_pos:
                for b in cand_neg:
                    if (a.rid, b.rid) not in self.prefs and (b.rid, a.rid) not in self.prefs:
                        self.issues.append(ConflictIssue(atom, a.rid, b.rid, reason))
            if pos_wins:  # preference cycle across the two teams
                self.issues.append(ConflictIssue(
                    atom, cand_pos[0].rid, cand_neg[0].rid, reason))

    def _team_wins(self, mine: list[GroundRule], opposing: list[GroundRule]) -> bool:
        if not mine:
            return False
        return all(
            any((w.rid, loser.rid) in self.prefs for w in mine)
            for loser in opposing)

    def _derive(self, lit: Literal, firing: list[GroundRule],
                firing_opp: list[GroundRule],
                all_opp: Sequence[GroundRule]) -> None:
        step_rule = min(firing, key=lambda g: (g.ordinal, g.witness or ""))
        fired_by_id: dict[str, GroundRule] = {}
        for g in sorted(firing_opp, key=lambda g: (g.ordinal, g.witness or "")):
            fired_by_id.setdefault(g.rid, g)
        resolutions: list[Resolution] = []
        seen: set[str] = set()
        for opp in sorted(all_opp, key=lambda g: (g.ordinal, g.witness or "")):
            if opp.rid in seen:
                continue
            seen.add(opp.rid)
            beater = next((w.rid for w in sorted(firing, key=lambda g: g.ordinal)
                           if (w.rid, opp.rid) in self.prefs), None)
            if opp.rid in fired_by_id:
                # active conflict, settled by rank
                resolutions.append(Resolution(
                    beater or step_rule.rid, opp.rid, TYPE1,
                    loser_premises=fired_by_id[opp.rid].body))
            elif beater is not None:
                # rank alone dismisses the opposing rule; its body is moot
                resolutions.append(Resolution(beater, opp.rid, TYPE1))
            else:
                over = next((w.rid for w in sorted(firing, key=lambda g: g.ordinal)
                             if (opp.rid, w.rid) in self.prefs), None)
                if over is not None:
                    resolutions.append(Resolution(
                        over, opp.rid, TYPE2, self._missing_premise(opp)))
        self.derived[lit] = _Derivation(step_rule, tuple(resolutions))

    def _missing_premise(self, gr: GroundRule) -> Optional[Literal]:
        if gr.template == 5:
            return gr.bridge
        if gr.template == 6:
            return self.rules_by_id[gr.rid].body[0]  # keep the bound variable
        for b in gr.body:
            if b not in self.derived:
                return b
        return None

    # -- proof extraction ---------------------------------------------------

    def proof_for(self, target: Literal, label: Label) -> Proof:
        if target in self.facts:
            return Proof((), (), label)
        needed: dict[Literal, _Derivation] = {}
        stack = [target]
        while stack:
            lit = stack.pop()
            if lit in needed:
                continue
            deriv = self.derived[lit]
            if deriv.rule is None:
                continue
            needed[lit] = deriv
            for b in deriv.rule.body:
                stack.append(b)
            for res in deriv.resolutions:
                stack.extend(res.loser_premises)

        def sort_key(item: tuple[Literal, _Derivation]):
            lit, deriv = item
            assert deriv.rule is not None
            return (self.strata.depth_of[lit.atom], deriv.rule.ordinal,
                    deriv.rule.witness or "")

        steps: list[ProofStep] = []
        resolutions: list[Resolution] = []
        seen_pairs: set[tuple[str, str]] = set()
        for lit, deriv in sorted(needed.items(), key=sort_key):
            gr = deriv.rule
            assert gr is not None
            premises = gr.body if gr.body else ((gr.bridge,) if gr.bridge else ())
            steps.append(ProofStep(gr.rid, premises, lit, gr.witness))
            for res in deriv.resolutions:
                if (res.winner, res.loser) not in seen_pairs:
                    seen_pairs.add((res.winner, res.loser))
                    resolutions.append(res)
        return Proof(tuple(steps), tuple(resolutions), label)


def entail(theory: Theory, question: Literal,
           oracle: Optional[KnowledgeOracle] = None) -> EntailmentResult:
    """Label a question against a theory and extract a deterministic proof."""
    if not question.is_ground():
        raise InvalidTheoryError(f"question must be ground, got {question}")
    ev = _Evaluation(theory, oracle)
    if question in ev.derived:
        label, target = Label.PROVED, question
    elif question.negate() in ev.derived:
        label, target = Label.DISPROVED, question.negate()
    else:
        return EntailmentResult(Label.UNKNOWN, None, frozenset(ev.derived))
    return EntailmentResult(label, ev.proof_for(target, label), frozenset(ev.derived))


def check_defeasible_consistency(theory: Theory,
                                 oracle: Optional[KnowledgeOracle] = None) -> ConsistencyReport:
    """Report every active conflict the preferences cannot settle."""
    ev = _Evaluation(theory, oracle)
    return ConsistencyReport(list(ev.issues))


# ---------------------------------------------------------------------------
# Brute-force oracle (tests only)
# ---------------------------------------------------------------------------

def brute_force_entail(theory: Theory, question: Literal,
                       oracle: Optional[KnowledgeOracle] = None,
                       max_atoms: int = 24) -> Label:
    """Independent label computation by memoized backward chaining over a
    naive grounding. Only meant for small theories; raises TooLargeError
    beyond ``max_atoms`` ground atoms."""
    oracle = oracle or KnowledgeOracle()
    entities: dict[str, None] = {}
    for lit in theory.all_literals():
        for term in (lit.subject, lit.obj):
            if term not in ("?x", "-"):
                entities.setdefault(term, None)
    universe = list(entities)

    bodies_heads: list[tuple[str, tuple[Literal, ...], Literal]] = []
    for rule in theory.rules:
        if rule.quantifier in (Quantifier.FORALL, Quantifier.EXISTS):
            for e in universe:
                bodies_heads.append((
                    rule.id,
                    tuple(b.substitute(e) for b in rule.body),
                    rule.head.substitute(e)))
        elif rule.template == 5:
            try:
                verdict = oracle.evaluate(rule.body[0], theory.facts)
            except UnknownForeignPhrase as exc:
                raise UnresolvedForeignLiteral(str(exc)) from exc
            if verdict:
                bodies_heads.append((rule.id, (), rule.head))
        else:
            bodies_heads.append((rule.id, rule.body, rule.head))

    atoms: set[Atom] = {f.atom for f in theory.facts}
    for _, body, head in bodies_heads:
        atoms.add(head.atom)
        atoms.update(b.atom for b in body)
    if len(atoms) > max_atoms:
        raise TooLargeError(f"{len(atoms)} ground atoms exceed the bound {max_atoms}")

    facts = set(theory.facts)
    prefs = set(theory.preferences)
    memo: dict[Atom, tuple[bool, bool]] = {}
    visiting: set[Atom] = set()

    def true(lit: Literal) -> bool:
        pos, neg = value(lit.atom)
        return pos if lit.positive else neg

    def value(atom: Atom) -> tuple[bool, bool]:
        if atom in memo:
            return memo[atom]
        if atom in visiting:
            raise CyclicTheoryError([atom])
        visiting.add(atom)
        pos_lit = Literal(*atom)
        neg_lit = pos_lit.negate()
        if pos_lit in facts:
            result = (True, False)
        elif neg_lit in facts:
            result = (False, True)
        else:
            sup = [(rid, body) for rid, body, head in bodies_heads if head == pos_lit]
            opp = [(rid, body) for rid, body, head in bodies_heads if head == neg_lit]
            firing_sup = [rid for rid, body in sup if all(true(b) for b in body)]
            firing_opp = [rid for rid, body in opp if all(true(b) for b in body)]

            def team(firing: list[str], against: list[str]) -> bool:
                return bool(firing) and all(
                    any((w, l) in prefs for w in firing) for l in against)

            p = team(firing_sup, firing_opp)
            n = team(firing_opp, firing_sup)
            result = (p and not n, n and not p)
        visiting.discard(atom)
        memo[atom] = result
        return result

    if true(question):
        return Label.PROVED
    if true(question.negate()):
        return Label.DISPROVED
    return Label.UNKNOWN
