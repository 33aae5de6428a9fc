"""Shared test utilities: hand-built theories and a random-theory sampler
for cross-checking the solver against the brute-force path."""

from __future__ import annotations

from defgame.logic import VARIABLE, Literal, Quantifier, Rule, Theory
from defgame.rng import coin, make_rng, pick


def tweety_theory() -> tuple[Theory, Literal]:
    penguin = Literal(VARIABLE, "is a penguin")
    bird = Literal(VARIABLE, "is a bird")
    fly = Literal(VARIABLE, "fly")
    theory = Theory(
        facts=(Literal("tweety", "is a penguin"),),
        rules=(
            Rule("Rule1", 1, (penguin,), bird, Quantifier.FORALL),
            Rule("Rule2", 1, (bird,), fly, Quantifier.FORALL),
            Rule("Rule3", 1, (penguin,), fly.negate(), Quantifier.FORALL),
        ),
        preferences=(("Rule3", "Rule2"),),
    )
    return theory, Literal("tweety", "fly")


_ENTITIES = ("ada", "bob", "cem", "dot", "eli")
_PREDICATES = ("p", "q", "r", "s")


def random_small_theory(seed: int) -> tuple[Theory, Literal]:
    """A random theory built from template-conforming shapes. May be cyclic
    or carry unresolved conflicts on purpose; callers skip solver errors."""
    rng = make_rng("random-theory", seed)
    entities = list(_ENTITIES[: int(rng.integers(2, 5))])

    def literal() -> Literal:
        return Literal(pick(rng, entities), pick(rng, _PREDICATES),
                       pick(rng, entities), coin(rng, 0.75))

    def fresh_rule(rid: str, head: Literal | None = None) -> Rule:
        if head is None:
            template = pick(rng, (1, 2, 3, 4, 6))
        elif head.subject == VARIABLE:
            template = pick(rng, (1, 2))
        else:
            template = pick(rng, (3, 4, 6))
        if template == 1:
            body = (Literal(VARIABLE, pick(rng, _PREDICATES), pick(rng, entities),
                            coin(rng, 0.75)),)
            head = head or Literal(VARIABLE, pick(rng, _PREDICATES),
                                   pick(rng, entities), coin(rng, 0.6))
            return Rule(rid, 1, body, head, Quantifier.FORALL)
        if template == 2:
            body = tuple(Literal(VARIABLE, pick(rng, _PREDICATES), pick(rng, entities),
                                 coin(rng, 0.75)) for _ in range(2))
            head = head or Literal(VARIABLE, pick(rng, _PREDICATES),
                                   pick(rng, entities), coin(rng, 0.6))
            return Rule(rid, 2, body, head, Quantifier.FORALL)
        if template == 3:
            head = head or literal()
            body = (Literal(pick(rng, entities), pick(rng, _PREDICATES),
                            head.subject, coin(rng, 0.75)),)
            return Rule(rid, 3, body, head)
        if template == 4:
            head = head or literal()
            body = tuple(Literal(pick(rng, entities), pick(rng, _PREDICATES),
                                 head.subject, coin(rng, 0.75)) for _ in range(2))
            return Rule(rid, 4, body, head)
        body = (Literal(VARIABLE, pick(rng, _PREDICATES), pick(rng, entities),
                        coin(rng, 0.75)),)
        return Rule(rid, 6, body, head or literal(), Quantifier.EXISTS)

    rules: list[Rule] = []
    for _ in range(int(rng.integers(1, 5))):
        rules.append(fresh_rule(f"Rule{len(rules) + 1}"))

    prefs: list[tuple[str, str]] = []
    if coin(rng, 0.6):
        # plant a genuine opposing-head pair, usually with an ordering,
        # so conflict handling gets exercised in both orientations
        target = pick(rng, rules)
        opposing = fresh_rule(f"Rule{len(rules) + 1}", head=target.head.negate())
        rules.append(opposing)
        if coin(rng, 0.8):
            pair = ((target.id, opposing.id) if coin(rng, 0.5)
                    else (opposing.id, target.id))
            prefs.append(pair)

    facts: list[Literal] = []
    for _ in range(int(rng.integers(1, 5))):
        lit = literal()
        if lit not in facts and lit.negate() not in facts:
            facts.append(lit)

    if len(rules) >= 2:
        for _ in range(int(rng.integers(0, 3))):
            a, b = pick(rng, rules).id, pick(rng, rules).id
            if a != b and (a, b) not in prefs and (b, a) not in prefs:
                prefs.append((a, b))

    question = literal()
    return Theory(tuple(facts), tuple(rules), tuple(prefs)), question
