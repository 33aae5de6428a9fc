"""Natural-language rendering of theories, questions, and proofs.

Rendered problems follow a fixed layout: a game preamble, one sentence per
fact, the numbered rule list, preference sentences, and the question with a
closing answer request. Rule bodies and heads are spliced into the split's
sentence patterns; preference and proof sentences use one fixed wording so
the scoring harness can read rule ids and conflict pairs back out verbatim.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .logic import NO_OBJECT, VARIABLE, Label, Literal, Rule, Theory
from .rng import pick
from .solver import TYPE2, Proof
from .vocab import Vocabulary

PREAMBLE = ("A few players are playing a boardgame. The current state of the game "
            "is as follows.")
RULES_HEADER = "The rules of the game are as follows."
PREFERENCE_SENTENCE = "{winner} is preferred over {loser}."
ANSWER_REQUEST = ("Please state your conclusion as proved, disproved, or unknown, "
                  "together with the reasoning behind it.")
ANSWER_REQUEST_BINARY = ("Please state your conclusion as proved or disproved, "
                         "together with the reasoning behind it.")


class MissingTemplate(KeyError):
    pass


class DanglingRuleId(KeyError):
    pass


_ES_ENDINGS = ("s", "x", "z", "ch", "sh")
_IRREGULAR = {"have": "has", "do": "does", "go": "goes", "be": "is"}


def third_person(verb_phrase: str) -> str:
    """Inflect the leading verb of a predicate for a singular subject."""
    first, _, rest = verb_phrase.partition(" ")
    if first in _IRREGULAR:
        first = _IRREGULAR[first]
    elif first.endswith("y") and len(first) > 1 and first[-2] not in "aeiou":
        first = first[:-1] + "ies"
    elif first.endswith(_ES_ENDINGS):
        first = first + "es"
    else:
        first = first + "s"
    return f"{first} {rest}" if rest else first


def verb_phrase(lit: Literal, inflected: bool = True) -> str:
    """Sign-aware verb phrase of a literal, without its subject.

    Phrase literals (no object) are authored pre-inflected and pass through
    verbatim; triple literals get "the <object>" appended.
    """
    if lit.obj == NO_OBJECT:
        core = lit.predicate
        return core if lit.positive else f"does not {core}"
    core = f"{lit.predicate} the {lit.obj}"
    if not lit.positive:
        return f"does not {core}" if inflected else f"not {core}"
    return f"{third_person(lit.predicate)} the {lit.obj}" if inflected else core


def clause(lit: Literal) -> str:
    """Full clause with subject, e.g. "the dog does not unite with the cat"."""
    if lit.subject == VARIABLE:
        return f"at least one animal {verb_phrase(lit)}"
    return f"the {lit.subject} {verb_phrase(lit)}"


def _cap(text: str) -> str:
    return text[0].upper() + text[1:]


def sentence_for_fact(lit: Literal) -> str:
    return _cap(clause(lit)) + "."


def sentence_for_rule(rule: Rule, vocab: Vocabulary, split: str,
                      rng: np.random.Generator) -> str:
    try:
        pattern = pick(rng, vocab.rule_patterns(rule.template, split))
    except KeyError as exc:
        raise MissingTemplate(str(exc)) from exc
    slots = {
        "bvp1": verb_phrase(rule.body[0]),
        "bcl1": clause(rule.body[0]),
        "bcl1up": _cap(clause(rule.body[0])),
        "bsubj": rule.body[0].subject,
        "hvp": verb_phrase(rule.head),
        "hvpb": verb_phrase(rule.head, inflected=False),
        "hcl": clause(rule.head),
        "hsubj": rule.head.subject,
    }
    if len(rule.body) > 1:
        slots["bvp2"] = verb_phrase(rule.body[1])
        slots["bcl2"] = clause(rule.body[1])
    return pattern.pattern.format(**slots)


def question_sentence(question: Literal, binary: bool = False) -> str:
    request = ANSWER_REQUEST_BINARY if binary else ANSWER_REQUEST
    return (f"Based on the game state and the rules and preferences, does it hold "
            f"that {clause(question)}? {request}")


def assemble_text(theory: Theory, question: Literal, fact_texts: Sequence[str],
                  rule_texts: Sequence[str], binary: bool = False) -> str:
    parts = [PREAMBLE]
    parts.extend(fact_texts)
    if theory.rules:
        parts.append(RULES_HEADER)
        for rule, sentence in zip(theory.rules, rule_texts):
            parts.append(f"{rule.id}: {sentence}")
    for winner, loser in theory.preferences:
        parts.append(PREFERENCE_SENTENCE.format(winner=winner, loser=loser))
    parts.append(question_sentence(question, binary))
    return " ".join(parts)


def render_text(theory: Theory, question: Literal, vocab: Vocabulary, split: str,
                rng: np.random.Generator, binary: bool = False) -> str:
    fact_texts = [sentence_for_fact(f) for f in theory.facts]
    rule_texts = [sentence_for_rule(r, vocab, split, rng) for r in theory.rules]
    return assemble_text(theory, question, fact_texts, rule_texts, binary)


def render_example(example, split: str, vocab: Optional[Vocabulary] = None,
                   binary: bool = False) -> str:
    """Re-render a generated example's problem text. Template choices are a
    pure function of the example's seed, so this reproduces the stored text
    byte for byte."""
    from .rng import make_rng
    from .vocab import get_vocabulary

    rng = make_rng(example.metadata["seed"], "render")
    return render_text(example.theory, example.question,
                       vocab or get_vocabulary(), split, rng, binary)


# ---------------------------------------------------------------------------
# Proofs
# ---------------------------------------------------------------------------

UNKNOWN_STUB = ("The provided information is not enough to prove or disprove the "
                "statement \"{q}\". The answer is unknown.")


def render_proof(proof: Optional[Proof], theory: Theory, question: Literal) -> str:
    """Chain-of-thought text for a solved example. Rule ids appear verbatim
    as RuleN in derivation and conflict sentences; anything else never
    mentions a rule id, so extraction from gold text is exact."""
    if proof is None or proof.final == Label.UNKNOWN:
        return UNKNOWN_STUB.format(q=clause(question))
    known = {r.id for r in theory.rules}
    sentences = []
    for step in proof.steps:
        if step.rule_id not in known:
            raise DanglingRuleId(step.rule_id)
        premises = " and ".join(clause(p) for p in step.premises)
        sentences.append(
            f"From {premises} and {step.rule_id}, we conclude that "
            f"{clause(step.conclusion)}.")
    for res in proof.resolutions:
        for rid in (res.winner, res.loser):
            if rid not in known:
                raise DanglingRuleId(rid)
        if res.kind == TYPE2:
            missing = clause(res.missing) if res.missing is not None else "its premise"
            sentences.append(
                f"{res.loser} is preferred over {res.winner}, but {res.loser} cannot "
                f"be applied because we cannot conclude that {missing}, so the "
                f"conclusion of {res.winner} stands.")
        else:
            sentences.append(
                f"{res.winner} is preferred over {res.loser}, so the conclusion of "
                f"{res.winner} stands.")
    sentences.append(f"So the statement \"{clause(question)}\" is {proof.final.value}.")
    sentences.append(f"The answer is {proof.final.value}.")
    return " ".join(sentences)
