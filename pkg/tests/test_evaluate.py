import pytest

from defgame.evaluate import (
    DuplicateId,
    EmptyGold,
    UnknownId,
    annotation_sample,
    conflict_f1,
    extract_rules_from_text,
    rule_f1,
    score,
)
from defgame.pipeline import build_split, example_to_row, resolve_config
from defgame.rng import make_rng, pick


def gold_rows(n=9, name="main-d1"):
    cfg = resolve_config(name, {"train_size": str(n), "validation_size": "0",
                                "test_size": "0"})
    return [example_to_row(e) for e in build_split(cfg, "train")]


def self_predictions(rows):
    return [{"id": r["id"], "label": r["label"], "proof_text": r["proof_text"]}
            for r in rows]


# ---------------------------------------------------------------------------
# Extraction
# ---------------------------------------------------------------------------

def test_extract_from_empty_text():
    assert extract_rules_from_text("") == (set(), set())
    assert extract_rules_from_text(None) == (set(), set())


def test_extract_ignores_rule_restatements():
    text = ("Rule5: If something unites with the cat, then it respects the lion. "
            "From the dog unites with the cat and Rule2, we conclude that the dog "
            "respects the lion. The answer is proved.")
    rules, conflicts = extract_rules_from_text(text)
    assert rules == {"Rule2"}
    assert conflicts == set()


def test_extract_reads_both_conflict_kinds():
    type1 = "Rule3 is preferred over Rule2, so the conclusion of Rule3 stands."
    rules, conflicts = extract_rules_from_text(type1)
    assert conflicts == {("Rule3", "Rule2")} and not rules

    type2 = ("Rule4 is preferred over Rule1, but Rule4 cannot be applied because "
             "we cannot conclude that the pig winks at the cat, so the conclusion "
             "of Rule1 stands.")
    rules, conflicts = extract_rules_from_text(type2)
    assert conflicts == {("Rule1", "Rule4")} and not rules


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def test_rule_f1_examples():
    assert rule_f1({"Rule1", "Rule2"}, {"Rule1", "Rule3"}) == 0.5
    assert rule_f1({"Rule1"}, {"Rule1"}) == 1.0
    assert rule_f1(set(), {"Rule1"}) == 0.0
    with pytest.raises(EmptyGold):
        rule_f1({"Rule1"}, set())


def test_conflict_f1_examples():
    assert conflict_f1({("Rule3", "Rule2")}, {("Rule3", "Rule2")}) == 1.0
    assert conflict_f1({("Rule2", "Rule3")}, {("Rule3", "Rule2")}) == 0.0
    two = conflict_f1({("Rule3", "Rule2"), ("Rule5", "Rule4")}, {("Rule3", "Rule2")})
    assert abs(two - 2 / 3) < 1e-12


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------

def test_self_scoring_gold_is_perfect():
    rows = gold_rows(9)
    report = score(self_predictions(rows), rows)
    assert report.accuracy == 1.0
    assert report.rule_f1 == 1.0
    assert report.conflict_f1 in (1.0, None)
    assert sum(sum(r.values()) for r in report.confusion.values()) == 9


def test_constant_label_baseline_on_balanced_split():
    rows = gold_rows(9)
    preds = [{"id": r["id"], "label": "proved"} for r in rows]
    report = score(preds, rows)
    assert abs(report.accuracy - 1 / 3) < 1e-9
    assert report.rule_f1 is not None  # correct proved examples, empty proofs
    assert report.rule_f1 == 0.0


def test_score_is_order_invariant():
    rows = gold_rows(6)
    preds = self_predictions(rows)
    a = score(preds, rows)
    b = score(list(reversed(preds)), rows)
    assert a.to_dict() == b.to_dict()


def test_missing_predictions_count_as_wrong():
    rows = gold_rows(6)
    preds = self_predictions(rows)[:4]
    report = score(preds, rows)
    assert report.coverage["missing"] == 2
    assert report.accuracy == 4 / 6


def test_duplicate_and_unknown_ids_are_rejected():
    rows = gold_rows(3)
    preds = self_predictions(rows)
    with pytest.raises(DuplicateId):
        score(preds + [preds[0]], rows)
    with pytest.raises(UnknownId):
        score([{"id": "nope", "label": "proved"}], rows)


def test_unknown_gold_examples_are_excluded_from_proof_metrics():
    rows = gold_rows(9)
    report = score(self_predictions(rows), rows)
    unknowns = sum(1 for r in rows if r["label"] == "unknown")
    assert report.coverage["rule_f1_examples"] <= len(rows) - unknowns


def test_random_label_predictor_near_chance():
    rows = gold_rows(999)
    rng = make_rng("random-baseline")
    labels = ("proved", "disproved", "unknown")
    preds = [{"id": r["id"], "label": pick(rng, labels)} for r in rows]
    report = score(preds, rows)
    assert 0.28 <= report.accuracy <= 0.39  # 99% binomial interval around 1/3


def test_annotation_sample_is_deterministic():
    rows = gold_rows(6)
    preds = self_predictions(rows)
    a = annotation_sample(rows, preds, 3)
    b = annotation_sample(rows, preds, 3)
    assert a == b and len(a) == 3
    assert {"id", "gold_label", "predicted_label", "gold_proof_text",
            "predicted_proof_text"} == set(a[0])


def test_garbage_proof_text_degrades_to_partial_credit():
    rows = gold_rows(6)
    preds = [{"id": r["id"], "label": r["label"],
              "proof_text": "⚙️ Rule999!! lorem ipsum ((("} for r in rows]
    report = score(preds, rows)
    assert report.accuracy == 1.0
    assert report.rule_f1 == 0.0
    assert report.conflict_f1 in (0.0, None)


def test_binary_split_scores_with_two_label_confusion():
    rows = gold_rows(8, name="binary-d1")
    report = score(self_predictions(rows), rows)
    assert set(report.confusion) == {"proved", "disproved"}
    assert report.accuracy == 1.0 and report.conflict_f1 == 1.0
