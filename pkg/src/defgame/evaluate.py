"""Scoring of prediction files against gold splits.

Label accuracy is computed over every gold example. The two proof metrics
follow the convention that they are only meaningful when the model got the
label right and an actual proof exists: rule F1 compares the set of rules a
proof applies (not merely restates) against the gold proof's rule set, and
conflict F1 compares ordered (prevailing, dismissed) resolution pairs.
Proof content is read out of free text by a pattern extractor tuned to the
renderer's fixed sentence families; text outside those patterns simply
contributes nothing, so malformed proofs degrade to partial credit instead
of erroring.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .logic import Label

LABELS = ("proved", "disproved", "unknown")


class UnknownId(KeyError):
    pass


class DuplicateId(ValueError):
    pass


class EmptyGold(ValueError):
    pass


_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")
_CONFLICT = re.compile(r"\bRule(\d+) is preferred over Rule(\d+)\b")
_RULE_TOKEN = re.compile(r"\bRule(\d+)\b")
_RESTATEMENT = re.compile(r"^\s*Rule\d+\s*:")
_DERIVATION_MARKERS = ("conclude", "concludes", "according to rule", "by rule",
                       "using rule", "apply rule", "applying rule")


def extract_rules_from_text(proof_text: str) -> tuple[set[str], set[tuple[str, str]]]:
    """Recover (applied rule ids, ordered conflict pairs) from proof text.

    A sentence matching the preference-application family feeds the conflict
    set only; a "but RuleN cannot be applied" continuation marks the second
    rule of the pair as the prevailing one. Other sentences contribute rule
    ids only when they actually derive something; bare restatements of the
    rule list are ignored. Unparseable text yields empty sets.
    """
    rules: set[str] = set()
    conflicts: set[tuple[str, str]] = set()
    for sentence in _SENTENCE_SPLIT.split(proof_text or ""):
        matches = list(_CONFLICT.finditer(sentence))
        if matches:
            for m in matches:
                winner, loser = f"Rule{m.group(1)}", f"Rule{m.group(2)}"
                if re.search(rf"but {winner} cannot be applied", sentence):
                    conflicts.add((loser, winner))
                else:
                    conflicts.add((winner, loser))
            continue
        if _RESTATEMENT.match(sentence):
            continue
        low = sentence.lower()
        if any(marker in low for marker in _DERIVATION_MARKERS):
            rules.update(f"Rule{m.group(1)}" for m in _RULE_TOKEN.finditer(sentence))
    return rules, conflicts


def _f1(pred: set, gold: set) -> float:
    if not pred or not gold:
        return 0.0
    hit = len(pred & gold)
    if hit == 0:
        return 0.0
    precision = hit / len(pred)
    recall = hit / len(gold)
    return 2 * precision * recall / (precision + recall)


def rule_f1(pred_rules: Iterable[str], gold_rules: Iterable[str]) -> float:
    gold = set(gold_rules)
    if not gold:
        raise EmptyGold("gold rule set is empty")
    return _f1(set(pred_rules), gold)


def conflict_f1(pred_pairs: Iterable[tuple[str, str]],
                gold_pairs: Iterable[tuple[str, str]]) -> float:
    return _f1(set(pred_pairs), set(gold_pairs))


@dataclass
class ScoreReport:
    n: int
    accuracy: float
    confusion: dict
    rule_f1: Optional[float]
    conflict_f1: Optional[float]
    coverage: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "accuracy": round(self.accuracy, 6),
            "confusion": self.confusion,
            "rule_f1": None if self.rule_f1 is None else round(self.rule_f1, 6),
            "conflict_f1": None if self.conflict_f1 is None else round(self.conflict_f1, 6),
            "coverage": self.coverage,
        }


def gold_proof_sets(row: dict) -> tuple[set[str], set[tuple[str, str]]]:
    proof = row.get("proof")
    if not proof:
        return set(), set()
    rules = {s["rule"] for s in proof["steps"]}
    pairs = {(c["winner"], c["loser"]) for c in proof["conflicts"]}
    return rules, pairs


def score(predictions: Sequence[dict], gold_rows: Sequence[dict]) -> ScoreReport:
    """predictions: [{id, label, proof_text?}] - ids must be unique and
    resolve to gold examples; gold examples without a prediction count as
    wrong and are reported in coverage."""
    by_id: dict[str, dict] = {}
    for pred in predictions:
        pid = pred["id"]
        if pid in by_id:
            raise DuplicateId(pid)
        by_id[pid] = pred
    gold_ids = {row["id"] for row in gold_rows}
    for pid in by_id:
        if pid not in gold_ids:
            raise UnknownId(pid)

    labels = [lbl for lbl in LABELS
              if any(row["label"] == lbl for row in gold_rows)]
    confusion = {g: {p: 0 for p in labels + ["missing", "other"]} for g in labels}
    correct = 0
    rule_scores: list[float] = []
    conflict_scores: list[float] = []
    missing = 0
    proofs_seen = 0
    rule_eligible = conflict_eligible = 0

    for row in gold_rows:
        gold_label = row["label"]
        pred = by_id.get(row["id"])
        if pred is None:
            missing += 1
            confusion[gold_label]["missing"] += 1
            continue
        pred_label = pred.get("label")
        bucket = pred_label if pred_label in labels else "other"
        confusion[gold_label][bucket] += 1
        if pred_label != gold_label:
            continue
        correct += 1
        if gold_label == Label.UNKNOWN.value:
            continue
        gold_rules, gold_pairs = gold_proof_sets(row)
        pred_rules, pred_pairs = extract_rules_from_text(pred.get("proof_text") or "")
        if pred.get("proof_text"):
            proofs_seen += 1
        if gold_rules:
            rule_eligible += 1
            rule_scores.append(rule_f1(pred_rules, gold_rules))
        if gold_pairs:
            conflict_eligible += 1
            conflict_scores.append(conflict_f1(pred_pairs, gold_pairs))

    n = len(gold_rows)
    return ScoreReport(
        n=n,
        accuracy=correct / n if n else 0.0,
        confusion=confusion,
        rule_f1=sum(rule_scores) / len(rule_scores) if rule_scores else None,
        conflict_f1=(sum(conflict_scores) / len(conflict_scores)
                     if conflict_scores else None),
        coverage={
            "predicted": n - missing,
            "missing": missing,
            "proof_texts": proofs_seen,
            "rule_f1_examples": rule_eligible,
            "conflict_f1_examples": conflict_eligible,
        },
    )


def annotation_sample(gold_rows: Sequence[dict], predictions: Sequence[dict],
                      count: int, seed: int = 0) -> list[dict]:
    """Deterministic subsample for manual proof inspection: returns up to
    ``count`` (id, gold label, predicted label, proof texts) records."""
    from .rng import make_rng, shuffled

    by_id = {p["id"]: p for p in predictions}
    rng = make_rng(seed, "annotation")
    chosen = shuffled(rng, [row["id"] for row in gold_rows])[:count]
    gold_by_id = {row["id"]: row for row in gold_rows}
    out = []
    for pid in chosen:
        row = gold_by_id[pid]
        pred = by_id.get(pid, {})
        out.append({
            "id": pid,
            "gold_label": row["label"],
            "predicted_label": pred.get("label"),
            "gold_proof_text": row["proof_text"],
            "predicted_proof_text": pred.get("proof_text"),
        })
    return out
