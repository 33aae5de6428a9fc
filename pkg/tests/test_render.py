import pytest

from defgame.evaluate import extract_rules_from_text
from defgame.generate import GenParams, generate_example
from defgame.logic import NO_OBJECT, VARIABLE, Label, Literal, Quantifier, Rule, Theory
from defgame.render import (
    DanglingRuleId,
    clause,
    question_sentence,
    render_proof,
    sentence_for_fact,
    sentence_for_rule,
    third_person,
)
from defgame.rng import make_rng
from defgame.solver import entail
from defgame.vocab import get_vocabulary
from helpers import tweety_theory


def test_third_person_inflection():
    assert third_person("attack the green fields whose owner is") == \
        "attacks the green fields whose owner is"
    assert third_person("owe money to") == "owes money to"
    assert third_person("respect") == "respects"
    assert third_person("proceed to the spot that is right after the spot of") == \
        "proceeds to the spot that is right after the spot of"


def test_fact_sentences():
    assert sentence_for_fact(Literal("dog", "unite with", "cat")) == \
        "The dog unites with the cat."
    assert sentence_for_fact(Literal("dog", "unite with", "cat", False)) == \
        "The dog does not unite with the cat."
    assert sentence_for_fact(Literal("dog", "has 60 dollars", NO_OBJECT)) == \
        "The dog has 60 dollars."


def test_clause_renders_existential_subjects():
    lit = Literal(VARIABLE, "unite with", "cat")
    assert clause(lit) == "at least one animal unites with the cat"


def test_question_sentence_mentions_labels():
    q = Literal("dog", "unite with", "cat", False)
    text = question_sentence(q)
    assert "does it hold that the dog does not unite with the cat?" in text
    assert "unknown" in text
    assert "unknown" not in question_sentence(q, binary=True)


def test_rule_sentences_cover_every_template_and_split():
    vocab = get_vocabulary()
    body = Literal(VARIABLE, "unite with", "cat")
    ground_body = Literal("dog", "unite with", "cat")
    phrase_body = Literal("dog", "is more than a year old", NO_OBJECT)
    cases = [
        Rule("Rule1", 1, (body,), Literal(VARIABLE, "respect", "lion", False),
             Quantifier.FORALL),
        Rule("Rule2", 2, (body, Literal(VARIABLE, "wink at", "pig")),
             Literal(VARIABLE, "respect", "lion"), Quantifier.FORALL),
        Rule("Rule3", 3, (ground_body,), Literal("cat", "respect", "lion")),
        Rule("Rule4", 4, (ground_body, Literal("pig", "wink at", "cat")),
             Literal("cat", "respect", "lion")),
        Rule("Rule5", 5, (phrase_body,), Literal("dog", "respect", "lion")),
        Rule("Rule6", 6, (body,), Literal("dog", "respect", "lion"),
             Quantifier.EXISTS),
    ]
    for split in ("train", "test"):
        rng = make_rng("render-test", split)
        for rule in cases:
            for _ in range(6):  # cycle through the pattern choices
                sentence = sentence_for_rule(rule, vocab, split, rng)
                assert sentence.strip()
                assert "{" not in sentence and "}" not in sentence


def test_rule_sentence_deterministic_by_stream():
    vocab = get_vocabulary()
    rule = Rule("Rule1", 3, (Literal("dog", "unite with", "cat"),),
                Literal("cat", "respect", "lion"))
    a = sentence_for_rule(rule, vocab, "train", make_rng(5))
    b = sentence_for_rule(rule, vocab, "train", make_rng(5))
    assert a == b


def test_tweety_proof_text_names_rules_and_preference():
    theory, question = tweety_theory()
    result = entail(theory, question)
    text = render_proof(result.proof, theory, question)
    assert "Rule3 is preferred over Rule2" in text
    assert "does not fly" in text
    assert text.endswith("The answer is disproved.")
    rules, conflicts = extract_rules_from_text(text)
    assert rules == {"Rule1", "Rule3"}
    assert conflicts == {("Rule3", "Rule2")}


def test_unknown_proof_is_a_fixed_stub():
    theory, question = tweety_theory()
    text = render_proof(None, theory, question)
    assert text.startswith("The provided information is not enough")
    assert text.endswith("The answer is unknown.")


def test_render_proof_rejects_unknown_rule_ids():
    theory, question = tweety_theory()
    result = entail(theory, question)
    stripped = Theory(theory.facts, theory.rules[:1], ())
    with pytest.raises(DanglingRuleId):
        render_proof(result.proof, stripped, question)


def test_proof_text_round_trip_on_generated_examples():
    for seed in range(30):
        ex = generate_example(GenParams(depth=2, p_conf=0.8), Label.PROVED, seed=seed)
        rules, conflicts = extract_rules_from_text(ex.proof_text)
        gold_rules = {s.rule_id for s in ex.proof.steps}
        gold_conflicts = {(r.winner, r.loser) for r in ex.proof.resolutions}
        assert rules == gold_rules, seed
        assert conflicts == gold_conflicts, seed


def test_text_is_reproducible_for_same_seed():
    p = GenParams(depth=2, distractors_per_step=1)
    a = generate_example(p, Label.PROVED, seed=99)
    b = generate_example(p, Label.PROVED, seed=99)
    assert a.text == b.text and a.proof_text == b.proof_text


def test_longer_depth_produces_longer_text():
    short, long = [], []
    for seed in range(12):
        short.append(len(generate_example(GenParams(depth=1), Label.PROVED,
                                          seed=seed).text.split()))
        long.append(len(generate_example(GenParams(depth=3), Label.PROVED,
                                         seed=seed).text.split()))
    assert sum(long) / len(long) > sum(short) / len(short)


def test_preference_line_only_when_conflicts_exist():
    none = generate_example(GenParams(depth=1, p_conf=0.0), Label.PROVED, seed=3)
    some = generate_example(GenParams(depth=1, p_conf=1.0), Label.PROVED, seed=3)
    assert "is preferred over" not in none.text
    assert "is preferred over" in some.text


def test_render_example_reproduces_stored_text():
    from defgame.render import render_example
    p = GenParams(depth=2, distractors_per_step=1)
    ex = generate_example(p, Label.PROVED, seed=123)
    assert render_example(ex, "train") == ex.text


def test_missing_template_error():
    from defgame.render import MissingTemplate
    bogus = Rule("Rule1", 9, (Literal("dog", "unite with", "cat"),),
                 Literal("cat", "respect", "lion"))
    with pytest.raises(MissingTemplate):
        sentence_for_rule(bogus, get_vocabulary(), "train", make_rng(0))
