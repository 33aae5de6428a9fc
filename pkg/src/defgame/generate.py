"""Backward theory generation with conflict injection.

An example starts from a sampled question literal and grows a supporting
rule chain backwards for the requested number of hops: each step samples a
rule template, matches its head to the current goal, and recurses into the
fresh sub-questions of its body. With probability p_conf a step also plants
an opposing rule for the negated goal; the conflict-type coin then decides
whether the supporting rule simply outranks it (its sub-questions are
recursed for a random subset) or is outranked but safe because one opposing
premise is withheld and can never be derived.

Every entity is drawn from a shuffled pool and never reused, so branches
stay independent and generated theories are acyclic and conflict-clean by
construction. Labels are produced by construction (proved), by negating the
question (disproved), or by perturbing the theory until the solver reports
unknown.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .knowledge import (
    KnowledgeLink,
    KnowledgeOracle,
    KnowledgeTables,
    get_tables,
    sample_knowledge_link,
)
from .logic import NO_OBJECT, VARIABLE, Label, Literal, Quantifier, Rule, Theory, validate_theory
from .render import assemble_text, render_proof, sentence_for_fact, sentence_for_rule
from .rng import coin, make_rng, pick, shuffled
from .solver import Proof, SolverError, entail
from .vocab import Vocabulary, get_vocabulary


class PoolExhausted(RuntimeError):
    pass


class PerturbationBudgetExhausted(RuntimeError):
    pass


class RoundTripError(RuntimeError):
    """A generated example failed to re-solve to its target label."""


@dataclass(frozen=True)
class GenParams:
    depth: int
    p_conf: float = 0.5
    p_conf_type1: float = 0.5
    p_miss_info: float = 0.5
    distractors_per_step: int = 0
    force_conflict_at_root: bool = False
    vocab_split: str = "train"

    def __post_init__(self):
        for name in ("p_conf", "p_conf_type1", "p_miss_info"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be within [0, 1], got {v}")
        if self.depth < 0 or self.distractors_per_step < 0:
            raise ValueError("depth and distractor count must be non-negative")


class EntityPool:
    """Hands out each entity at most once, in a seeded shuffle order."""

    def __init__(self, entities, rng: np.random.Generator):
        self._items = shuffled(rng, entities)
        self._pos = 0

    @property
    def remaining(self) -> int:
        return len(self._items) - self._pos

    def draw(self) -> str:
        if self._pos >= len(self._items):
            raise PoolExhausted("entity pool exhausted")
        item = self._items[self._pos]
        self._pos += 1
        return item


def sample_question(pool: EntityPool, vocab: Vocabulary, split: str,
                    rng: np.random.Generator) -> Literal:
    if pool.remaining < 2:
        raise PoolExhausted("need two fresh entities for a question")
    subject = pool.draw()
    obj = pool.draw()
    predicate = pick(rng, vocab.predicates(split))
    return Literal(subject, predicate, obj, positive=coin(rng, 0.5))


# in-vocabulary templates a goal can be expanded with; template 5 is chosen
# separately through the missing-information coin
_LOGIC_TEMPLATES = (1, 2, 3, 4, 6)


@dataclass
class _Builder:
    vocab: Vocabulary
    tables: KnowledgeTables
    params: GenParams
    pool: EntityPool
    rng: np.random.Generator
    facts: list[Literal] = field(default_factory=list)
    rules: list[Rule] = field(default_factory=list)
    prefs: list[tuple[str, str]] = field(default_factory=list)
    links: list[KnowledgeLink] = field(default_factory=list)
    used_knowledge: set[tuple[str, str]] = field(default_factory=set)
    goal_signs: dict[tuple[str, str], set[bool]] = field(default_factory=dict)
    skeleton: list[dict] = field(default_factory=list)
    steps: int = 0
    conflicts_type1: int = 0
    conflicts_type2: int = 0

    def _next_id(self) -> str:
        return f"Rule{len(self.rules) + 1}"

    def _predicate(self) -> str:
        return pick(self.rng, self.vocab.predicates(self.params.vocab_split))

    def _sign(self) -> bool:
        return coin(self.rng, 0.5)

    def _register_goal(self, goal: Literal) -> None:
        self.goal_signs.setdefault((goal.predicate, goal.obj), set()).add(goal.positive)

    def _subq_predicate(self, obj: str, positive: bool) -> str:
        """A predicate for a fresh sub-question on the given object whose
        sign cannot collide with an earlier goal: unplanned opposing-head
        pairs would turn the conflict knob into noise."""
        for _ in range(30):
            pred = self._predicate()
            taken = self.goal_signs.get((pred, obj))
            if not taken or (not positive) not in taken:
                return pred
        raise PoolExhausted("no conflict-free predicate available")

    def add_fact(self, lit: Literal) -> None:
        if lit not in self.facts:
            self.facts.append(lit)

    # -- rule construction ---------------------------------------------------

    def _make_logic_rule(self, head: Literal, template: int) -> tuple[Rule, list[Literal]]:
        """Instantiate a template with the given head; returns the rule and
        the sub-questions whose derivation makes it fire for the goal."""
        rid = self._next_id()
        s = head.subject

        def fresh_body(obj: str) -> Literal:
            sign = self._sign()
            return Literal(VARIABLE, self._subq_predicate(obj, sign), obj, sign)

        def ground_body(obj: str) -> Literal:
            sign = self._sign()
            return Literal(self.pool.draw(), self._subq_predicate(obj, sign), obj, sign)

        if template == 1:
            body = (fresh_body(self.pool.draw()),)
            rule_head = Literal(VARIABLE, head.predicate, head.obj, head.positive)
            rule = Rule(rid, 1, body, rule_head, Quantifier.FORALL)
            subqs = [body[0].substitute(s)]
        elif template == 2:
            body = (fresh_body(self.pool.draw()), fresh_body(self.pool.draw()))
            rule_head = Literal(VARIABLE, head.predicate, head.obj, head.positive)
            rule = Rule(rid, 2, body, rule_head, Quantifier.FORALL)
            subqs = [b.substitute(s) for b in body]
        elif template == 3:
            body = (ground_body(s),)
            rule = Rule(rid, 3, body, head)
            subqs = [body[0]]
        elif template == 4:
            first = ground_body(s)
            self._register_goal(first)   # the sibling shares this object
            body = (first, ground_body(s))
            rule = Rule(rid, 4, body, head)
            subqs = list(body)
        elif template == 6:
            body = (fresh_body(self.pool.draw()),)
            rule = Rule(rid, 6, body, head, Quantifier.EXISTS)
            subqs = [body[0].substitute(self.pool.draw())]
        else:
            raise ValueError(f"not a logic template: {template}")
        self.rules.append(rule)
        for sq in subqs:
            self._register_goal(sq)
        return rule, subqs

    def _make_knowledge_rule(self, head: Literal, holds: bool) -> Optional[Rule]:
        categories = [c for c in self.vocab.knowledge_categories(self.params.vocab_split)
                      if (head.subject, c) not in self.used_knowledge]
        if not categories:
            return None
        category = pick(self.rng, categories)
        link = sample_knowledge_link(category, holds, head.subject, self.rng,
                                     draw_partner=self.pool.draw, tables=self.tables)
        for entity in (link.subject, *link.partners):
            self.used_knowledge.add((entity, category))
        for fact in link.surface_facts:
            self.add_fact(fact)
        rule = Rule(self._next_id(), 5, (link.bridge,), head)
        self.rules.append(rule)
        self.links.append(link)
        return rule

    def _expand(self, goal: Literal, depth: int, holds: bool) -> tuple[Rule, list[Literal]]:
        """One rule whose head is the goal. At the last hop the missing
        information coin may swap in a knowledge rule; ``holds`` fixes its
        bridge truth (a supporting rule must fire, a withheld opposing rule
        must not)."""
        if depth == 1 and coin(self.rng, self.params.p_miss_info):
            rule = self._make_knowledge_rule(goal, holds)
            if rule is not None:
                return rule, []
        template = pick(self.rng, _LOGIC_TEMPLATES)
        return self._make_logic_rule(goal, template)

    # -- the generation recursion ---------------------------------------------

    def generate(self, goal: Literal, depth: int, root: bool = False) -> None:
        self._register_goal(goal)
        if depth == 0:
            self.add_fact(goal)
            return
        self.steps += 1
        rule, subqs = self._expand(goal, depth, holds=True)
        recurse = list(subqs)
        entry = {"rule": rule.id, "depth": depth, "conflict": None}
        p = 1.0 if (root and self.params.force_conflict_at_root) else self.params.p_conf
        if coin(self.rng, p):
            self._register_goal(goal.negate())
            type1 = coin(self.rng, self.params.p_conf_type1)
            if type1:
                opp, opp_subqs = self._expand(goal.negate(), depth, holds=self._sign())
                self.prefs.append((rule.id, opp.id))
                self.conflicts_type1 += 1
                kept = [sq for sq in opp_subqs if coin(self.rng, 0.5)]
            else:
                opp, opp_subqs = self._expand(goal.negate(), depth, holds=False)
                self.prefs.append((opp.id, rule.id))
                self.conflicts_type2 += 1
                kept = list(opp_subqs)
                if kept:
                    kept.pop(int(self.rng.integers(len(kept))))
            recurse.extend(kept)
            entry["conflict"] = {"rule": opp.id, "kind": "Type1" if type1 else "Type2"}
        self.skeleton.append(entry)
        for sq in recurse:
            self.generate(sq, depth - 1)

    # -- distractors -----------------------------------------------------------

    def _distractor_parts(self) -> tuple[list[Literal], Optional[Rule]]:
        if coin(self.rng, 0.25):
            categories = self.vocab.knowledge_categories(self.params.vocab_split)
            subject = self.pool.draw()
            open_cats = [c for c in categories if (subject, c) not in self.used_knowledge]
            if open_cats:
                category = pick(self.rng, open_cats)
                link = sample_knowledge_link(category, coin(self.rng, 0.5), subject,
                                             self.rng, draw_partner=self.pool.draw,
                                             tables=self.tables)
                for entity in (link.subject, *link.partners):
                    self.used_knowledge.add((entity, category))
                self.links.append(link)
                return list(link.surface_facts), None
        base = Literal(self.pool.draw(), self._predicate(), self.pool.draw(), self._sign())
        if not coin(self.rng, 0.4):
            return [base], None
        if coin(self.rng, 0.5):
            rule = Rule(self._next_id(), 3,
                        (base,),
                        Literal(base.obj, self._predicate(), self.pool.draw(), self._sign()))
        else:
            rule = Rule(self._next_id(), 1,
                        (Literal(VARIABLE, base.predicate, base.obj, base.positive),),
                        Literal(VARIABLE, self._predicate(), self.pool.draw(), self._sign()),
                        Quantifier.FORALL)
        return [base], rule


def generate_theory(question: Literal, depth: int, params: GenParams,
                    pool: EntityPool, rng: np.random.Generator,
                    vocab: Optional[Vocabulary] = None,
                    tables: Optional[KnowledgeTables] = None,
                    ) -> tuple[tuple[Literal, ...], tuple[Rule, ...],
                               tuple[tuple[str, str], ...], list[dict]]:
    """Run the backward generation alone: returns (facts, rules,
    preferences, skeleton), where the skeleton records per step the chain
    rule, its depth, and any injected conflict."""
    builder = _Builder(vocab or get_vocabulary(), tables or get_tables(),
                       params, pool, rng)
    builder.generate(question, depth, root=True)
    return (tuple(builder.facts), tuple(builder.rules), tuple(builder.prefs),
            builder.skeleton)


def add_distractors(builder: _Builder, theory: Theory, question: Literal,
                    oracle: KnowledgeOracle) -> tuple[Theory, int]:
    """Insert inert facts (and sometimes rules) that never join the proof.
    Each candidate is re-verified to leave the label unchanged; rejected
    candidates are resampled a few times, then skipped."""
    wanted = builder.params.distractors_per_step * builder.steps
    if wanted == 0:
        return theory, 0
    label = entail(theory, question, oracle).label
    added = 0
    for _ in range(wanted):
        for _attempt in range(10):
            try:
                facts, rule = builder._distractor_parts()
            except (PoolExhausted, IndexError):
                return theory, added
            candidate = Theory(
                theory.facts + tuple(f for f in facts if f not in theory.facts),
                theory.rules + ((rule,) if rule else ()),
                theory.preferences)
            try:
                if entail(candidate, question, oracle).label == label:
                    theory = candidate
                    added += len(facts) + (1 if rule else 0)
                    break
            except SolverError:
                continue
        # a failed distractor is skipped; the realized count reflects it
    return theory, added


# ---------------------------------------------------------------------------
# Finalization helpers
# ---------------------------------------------------------------------------

def _renumber(theory: Theory, rng: np.random.Generator) -> Theory:
    """Shuffle the rule list and reassign ordinal ids so surface position
    carries no signal about which rules are load-bearing; facts are shuffled
    for the same reason."""
    order = shuffled(rng, theory.rules)
    mapping = {rule.id: f"Rule{i + 1}" for i, rule in enumerate(order)}
    rules = tuple(dataclasses.replace(rule, id=mapping[rule.id]) for rule in order)
    prefs = sorted(((mapping[w], mapping[l]) for w, l in theory.preferences),
                   key=lambda p: (int(p[0].removeprefix("Rule")),
                                  int(p[1].removeprefix("Rule"))))
    facts = tuple(shuffled(rng, theory.facts))
    return Theory(facts, rules, tuple(prefs))


_PERTURBATION_OPS = ("predicate", "sign", "replace-fact", "flip-preference")


def _head_instances(head: Literal, entities: list[str]) -> list[Literal]:
    if head.subject == VARIABLE:
        return [head.substitute(e) for e in entities]
    return [head]


def _would_oppose(theory: Theory, rule_index: int, new_head: Literal) -> bool:
    entities = theory.entities()
    flipped = {lit.negate() for lit in _head_instances(new_head, entities)}
    for k, other in enumerate(theory.rules):
        if k == rule_index:
            continue
        if any(inst in flipped for inst in _head_instances(other.head, entities)):
            return True
    return False


def _perturb_once(theory: Theory, vocab: Vocabulary, split: str,
                  rng: np.random.Generator) -> Optional[Theory]:
    """Apply one random local edit; returns None when the drawn edit is not
    applicable so the caller can redraw."""
    op = pick(rng, _PERTURBATION_OPS)
    plain_fact_idx = [i for i, f in enumerate(theory.facts) if f.obj != NO_OBJECT]

    if op == "predicate":
        targets = []
        for i in plain_fact_idx:
            targets.append(("fact", i, None))
        for i, rule in enumerate(theory.rules):
            for j, b in enumerate(rule.body):
                if b.obj != NO_OBJECT:
                    targets.append(("body", i, j))
            targets.append(("head", i, None))
        if not targets:
            return None
        kind, i, j = pick(rng, targets)
        new_pred = pick(rng, [p for p in vocab.predicates(split)])
        if kind == "fact":
            lit = theory.facts[i]
            if new_pred == lit.predicate:
                return None
            facts = list(theory.facts)
            facts[i] = dataclasses.replace(lit, predicate=new_pred)
            return Theory(tuple(facts), theory.rules, theory.preferences)
        rules = list(theory.rules)
        rule = rules[i]
        if kind == "head":
            if new_pred == rule.head.predicate:
                return None
            new_head = dataclasses.replace(rule.head, predicate=new_pred)
            if _would_oppose(theory, i, new_head):
                return None
            rules[i] = dataclasses.replace(rule, head=new_head)
        else:
            body = list(rule.body)
            if new_pred == body[j].predicate:
                return None
            body[j] = dataclasses.replace(body[j], predicate=new_pred)
            rules[i] = dataclasses.replace(rule, body=tuple(body))
        return Theory(theory.facts, tuple(rules), theory.preferences)

    if op == "sign":
        targets = [("fact", i, None) for i in plain_fact_idx]
        for i, rule in enumerate(theory.rules):
            for j, b in enumerate(rule.body):
                if b.obj != NO_OBJECT:
                    targets.append(("body", i, j))
            if rule.head.obj != NO_OBJECT:
                targets.append(("head", i, None))
        if not targets:
            return None
        kind, i, j = pick(rng, targets)
        if kind == "fact":
            facts = list(theory.facts)
            flipped = facts[i].negate()
            if flipped in theory.facts:
                return None
            facts[i] = flipped
            return Theory(tuple(facts), theory.rules, theory.preferences)
        rules = list(theory.rules)
        rule = rules[i]
        if kind == "head":
            flipped_head = rule.head.negate()
            # never manufacture a brand-new opposing-head pair: conflict
            # incidence must stay a generation-time knob
            if _would_oppose(theory, i, flipped_head):
                return None
            rules[i] = dataclasses.replace(rule, head=flipped_head)
        else:
            body = list(rule.body)
            body[j] = body[j].negate()
            rules[i] = dataclasses.replace(rule, body=tuple(body))
        return Theory(theory.facts, tuple(rules), theory.preferences)

    if op == "replace-fact":
        if not theory.facts:
            return None
        entities = theory.entities()
        if len(entities) < 2:
            return None
        i = int(rng.integers(len(theory.facts)))
        subject = pick(rng, entities)
        obj = pick(rng, [e for e in entities if e != subject])
        new_fact = Literal(subject, pick(rng, vocab.predicates(split)), obj,
                           coin(rng, 0.5))
        facts = list(theory.facts)
        if new_fact in facts or new_fact.negate() in facts:
            return None
        facts[i] = new_fact
        return Theory(tuple(facts), theory.rules, theory.preferences)

    if not theory.preferences:
        return None
    i = int(rng.integers(len(theory.preferences)))
    prefs = list(theory.preferences)
    winner, loser = prefs[i]
    prefs[i] = (loser, winner)
    return Theory(theory.facts, theory.rules, tuple(prefs))


def perturb_to_unknown(theory: Theory, question: Literal, vocab: Vocabulary,
                       split: str, rng: np.random.Generator,
                       oracle: KnowledgeOracle, budget: int = 200) -> tuple[Theory, int]:
    """Mutate the theory until the question can no longer be settled either
    way. Edits accumulate; ill-formed or unsolvable intermediate theories
    are rolled back and do not count as progress."""
    if entail(theory, question, oracle).label == Label.UNKNOWN:
        raise ValueError("theory already labels the question unknown")
    current = theory
    edits = 0
    for _ in range(budget):
        candidate = _perturb_once(current, vocab, split, rng)
        if candidate is None or not validate_theory(candidate).ok:
            continue
        try:
            label = entail(candidate, question, oracle).label
        except SolverError:
            continue
        current = candidate
        edits += 1
        if label == Label.UNKNOWN:
            return current, edits
    raise PerturbationBudgetExhausted(f"no unknown label within {budget} attempts")


# ---------------------------------------------------------------------------
# Whole examples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Example:
    id: str
    theory: Theory
    question: Literal
    label: Label
    proof: Optional[Proof]
    text: str
    proof_text: str
    fact_texts: tuple[str, ...]
    rule_texts: tuple[str, ...]
    metadata: dict
    stats: dict


def generate_example(params: GenParams, target_label: Label, seed: int,
                     example_id: Optional[str] = None,
                     vocab: Optional[Vocabulary] = None,
                     tables: Optional[KnowledgeTables] = None,
                     binary: bool = False) -> Example:
    """One dataset row: theory, question, label, gold proof, rendered text.
    Fully determined by (params, target_label, seed)."""
    vocab = vocab or get_vocabulary()
    tables = tables or get_tables()
    oracle = KnowledgeOracle(tables)
    rng = make_rng(seed)
    split = params.vocab_split

    pool = EntityPool(vocab.entities(split), rng)
    base_question = sample_question(pool, vocab, split, rng)
    builder = _Builder(vocab, tables, params, pool, rng)
    builder.generate(base_question, params.depth, root=True)

    theory = Theory(tuple(builder.facts), tuple(builder.rules), tuple(builder.prefs))
    theory, distractor_count = add_distractors(builder, theory, base_question, oracle)
    theory = _renumber(theory, rng)

    first = entail(theory, base_question, oracle)
    if first.label != Label.PROVED:
        raise RoundTripError(f"construction yielded {first.label}, expected proved")

    perturbations = 0
    if target_label == Label.PROVED:
        question, result = base_question, first
    elif target_label == Label.DISPROVED:
        question = base_question.negate()
        result = entail(theory, question, oracle)
    else:
        theory, perturbations = perturb_to_unknown(
            theory, base_question, vocab, split, rng, oracle)
        question = base_question
        result = entail(theory, question, oracle)
    if result.label != target_label:
        raise RoundTripError(f"solved to {result.label}, expected {target_label}")

    render_rng = make_rng(seed, "render")
    fact_texts = tuple(sentence_for_fact(f) for f in theory.facts)
    rule_texts = tuple(sentence_for_rule(r, vocab, split, render_rng)
                       for r in theory.rules)
    text = assemble_text(theory, question, fact_texts, rule_texts, binary)
    proof_text = render_proof(result.proof, theory, question)

    categories = sorted({link.category for link in builder.links})
    metadata = {
        "depth": params.depth,
        "p_conf": params.p_conf,
        "p_conf_type1": params.p_conf_type1,
        "p_miss_info": params.p_miss_info,
        "distractors": distractor_count,
        "seed": seed,
        "knowledge_categories": categories,
    }
    stats = {
        "gen_steps": builder.steps,
        "conflicts_type1": builder.conflicts_type1,
        "conflicts_type2": builder.conflicts_type2,
        "perturbations": perturbations,
        "skeleton": builder.skeleton,
        "split": split,
    }
    return Example(example_id or f"ex-{seed:016x}", theory, question, result.label,
                   result.proof, text, proof_text, fact_texts, rule_texts,
                   metadata, stats)
