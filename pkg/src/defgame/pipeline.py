"""Dataset variants: configuration, deterministic builds, JSONL emission.

A dataset is described by a flat key=value config (checked-in presets mirror
the standard experiment grid). Builds are deterministic: the per-example
seed is a hash of (dataset seed, split, index), failed generations retry on
a further-derived seed so split sizes never drift, and rows serialize with
a fixed field order so re-emission is byte-identical.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .generate import Example, GenParams, PerturbationBudgetExhausted, PoolExhausted, \
    RoundTripError, generate_example
from .knowledge import KnowledgeOracle
from .logic import Label, Literal, Theory, literal_from_str, literal_to_str, \
    rule_to_str, theory_from_dict
from .render import clause
from .rng import derive_key
from .solver import TYPE1, TYPE2, entail
from .vocab import SPLITS

MAX_RETRIES = 50
THREE_LABELS = (Label.PROVED, Label.DISPROVED, Label.UNKNOWN)
BINARY_LABELS = (Label.PROVED, Label.DISPROVED)


class ConfigError(ValueError):
    pass


class GenerationBudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class DatasetConfig:
    name: str
    depth: int
    seed: int
    p_conf: float = 0.5
    p_conf_type1: float = 0.5
    p_miss_info: float = 0.5
    distractors_per_step: int = 0
    binary: bool = False
    sizes: dict = field(default_factory=lambda: {"train": 1000, "validation": 500,
                                                 "test": 1000})

    @property
    def labels(self) -> tuple[Label, ...]:
        return BINARY_LABELS if self.binary else THREE_LABELS

    def gen_params(self, split: str) -> GenParams:
        return GenParams(
            depth=self.depth,
            p_conf=self.p_conf,
            p_conf_type1=self.p_conf_type1,
            p_miss_info=self.p_miss_info,
            distractors_per_step=self.distractors_per_step,
            force_conflict_at_root=self.binary,
            vocab_split=split,
        )

    def to_flat(self) -> dict:
        return {
            "name": self.name,
            "depth": self.depth,
            "seed": self.seed,
            "p_conf": self.p_conf,
            "p_conf_type1": self.p_conf_type1,
            "p_miss_info": self.p_miss_info,
            "distractors_per_step": self.distractors_per_step,
            "binary": self.binary,
            "train_size": self.sizes["train"],
            "validation_size": self.sizes["validation"],
            "test_size": self.sizes["test"],
        }


_CONFIG_KEYS = {
    "name": str,
    "depth": int,
    "seed": int,
    "p_conf": float,
    "p_conf_type1": float,
    "p_miss_info": float,
    "distractors_per_step": int,
    "binary": None,  # bool, parsed specially
    "train_size": int,
    "validation_size": int,
    "test_size": int,
}


def parse_config(text: str, overrides: Optional[dict[str, str]] = None) -> DatasetConfig:
    values: dict[str, str] = {}
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        key, eq, value = ln.partition("=")
        if not eq:
            raise ConfigError(f"expected key=value, got {ln!r}")
        values[key.strip()] = value.strip()
    values.update(overrides or {})

    for key in values:
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
    for required in ("name", "depth", "seed"):
        if required not in values:
            raise ConfigError(f"missing config key {required!r}")

    def get(key, default=None):
        if key not in values:
            return default
        if key == "binary":
            raw = values[key].lower()
            if raw not in ("true", "false", "0", "1"):
                raise ConfigError(f"binary must be true/false, got {values[key]!r}")
            return raw in ("true", "1")
        try:
            return _CONFIG_KEYS[key](values[key])
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {values[key]!r}") from exc

    return DatasetConfig(
        name=get("name"),
        depth=get("depth"),
        seed=get("seed"),
        p_conf=get("p_conf", 0.5),
        p_conf_type1=get("p_conf_type1", 0.5),
        p_miss_info=get("p_miss_info", 0.5),
        distractors_per_step=get("distractors_per_step", 0),
        binary=get("binary", False),
        sizes={"train": get("train_size", 1000),
               "validation": get("validation_size", 500),
               "test": get("test_size", 1000)},
    )


def load_config(path: Path, overrides: Optional[dict[str, str]] = None) -> DatasetConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"), overrides)


def preset_path(name: str) -> Path:
    from .knowledge import default_data_dir
    path = default_data_dir() / "presets" / f"{name}.cfg"
    if not path.exists():
        raise ConfigError(f"no preset named {name!r}")
    return path


def resolve_config(spec: str, overrides: Optional[dict[str, str]] = None) -> DatasetConfig:
    """Accepts a filesystem path, a bare preset name, or a preset-style
    path like presets/main-d1; the .cfg suffix is optional."""
    path = Path(spec)
    if not path.exists():
        name = path.name.removesuffix(".cfg")
        path = preset_path(name)
    return load_config(path, overrides)


# ---------------------------------------------------------------------------
# Building
# ---------------------------------------------------------------------------

def example_seed(cfg_seed: int, split: str, index: int, attempt: int = 0) -> int:
    if attempt == 0:
        return derive_key(cfg_seed, split, index) % 2**63
    return derive_key(cfg_seed, split, index, "retry", attempt) % 2**63


def _generate_indexed(cfg: DatasetConfig, split: str, index: int) -> Example:
    target = cfg.labels[index % len(cfg.labels)]
    params = cfg.gen_params(split)
    example_id = f"{cfg.name}-{split}-{index:05d}"
    last_error: Optional[Exception] = None
    for attempt in range(MAX_RETRIES):
        seed = example_seed(cfg.seed, split, index, attempt)
        try:
            return generate_example(params, target, seed, example_id=example_id,
                                    binary=cfg.binary)
        except (PoolExhausted, PerturbationBudgetExhausted, RoundTripError) as exc:
            last_error = exc
    raise GenerationBudgetError(
        f"{example_id}: no success in {MAX_RETRIES} attempts ({last_error})")


def _generate_star(args: tuple) -> Example:
    return _generate_indexed(*args)


def build_split(cfg: DatasetConfig, split: str, jobs: int = 1) -> list[Example]:
    size = cfg.sizes[split]
    tasks = [(cfg, split, i) for i in range(size)]
    if jobs <= 1:
        return [_generate_indexed(*t) for t in tasks]
    chunk = max(1, size // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_generate_star, tasks, chunksize=chunk))


def build_dataset(cfg: DatasetConfig, jobs: int = 1) -> dict[str, list[Example]]:
    return {split: build_split(cfg, split, jobs) for split in SPLITS}


# ---------------------------------------------------------------------------
# Rows and JSONL
# ---------------------------------------------------------------------------

def example_to_row(ex: Example) -> dict:
    proof = None
    if ex.proof is not None:
        proof = {
            "steps": [
                {"rule": s.rule_id,
                 "premises": [literal_to_str(p) for p in s.premises],
                 "conclusion": literal_to_str(s.conclusion)}
                for s in ex.proof.steps],
            "conflicts": [
                {"winner": r.winner, "loser": r.loser, "type": r.kind}
                for r in ex.proof.resolutions],
        }
    return {
        "id": ex.id,
        "text": ex.text,
        "question": {"text": clause(ex.question), "logic": literal_to_str(ex.question)},
        "label": ex.label.value,
        "proof_text": ex.proof_text,
        "theory": {
            "facts": [{"text": t, "logic": literal_to_str(f)}
                      for f, t in zip(ex.theory.facts, ex.fact_texts)],
            "rules": [{"id": r.id, "text": t, "logic": rule_to_str(r)}
                      for r, t in zip(ex.theory.rules, ex.rule_texts)],
            "preferences": [{"winner": w, "loser": l}
                            for w, l in ex.theory.preferences],
        },
        "proof": proof,
        "metadata": ex.metadata,
    }


def theory_from_row(row: dict) -> Theory:
    return theory_from_dict({
        "facts": [f["logic"] for f in row["theory"]["facts"]],
        "rules": row["theory"]["rules"],
        "preferences": row["theory"]["preferences"],
    })


def row_to_line(row: dict) -> str:
    return json.dumps(row, ensure_ascii=False, separators=(",", ":"))


def emit_jsonl(examples: Sequence[Example], path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ex in examples:
            fh.write(row_to_line(example_to_row(ex)))
            fh.write("\n")


def read_jsonl(path: Path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for ln in fh:
            ln = ln.strip()
            if ln:
                rows.append(json.loads(ln))
    return rows


# ---------------------------------------------------------------------------
# Re-verification (round-trip labels and proof replay)
# ---------------------------------------------------------------------------

def verify_row(row: dict, oracle: Optional[KnowledgeOracle] = None) -> list[str]:
    """Re-solve a serialized example and replay its stored proof. Returns a
    list of problems; empty means the row checks out."""
    problems: list[str] = []
    oracle = oracle or KnowledgeOracle()
    theory = theory_from_row(row)
    question = literal_from_str(row["question"]["logic"])
    result = entail(theory, question, oracle)
    if result.label.value != row["label"]:
        problems.append(f"label mismatch: stored {row['label']}, solved {result.label.value}")

    proof = row.get("proof")
    if row["label"] == Label.UNKNOWN.value:
        if proof is not None:
            problems.append("unknown example carries a proof")
        return problems
    if proof is None:
        problems.append("missing proof")
        return problems

    facts = set(theory.facts)
    prefs = set(theory.preferences)
    established = set(facts)
    rules_by_id = {r.id: r for r in theory.rules}
    last_conclusion: Optional[Literal] = None
    for i, step in enumerate(proof["steps"]):
        rid = step["rule"]
        premises = tuple(literal_from_str(p) for p in step["premises"])
        conclusion = literal_from_str(step["conclusion"])
        rule = rules_by_id.get(rid)
        if rule is None:
            problems.append(f"step {i} uses unknown rule {rid}")
            continue
        for p in premises:
            if p in established:
                continue
            if p.obj == "-" and rule.template == 5:
                if oracle.evaluate(p, theory.facts) is not True:
                    problems.append(f"step {i} phrase premise not supported: {p}")
            else:
                problems.append(f"step {i} premise not established: {p}")
        if not _is_instance_of(rule, premises, conclusion):
            problems.append(f"step {i} is not an application of {rid}")
        established.add(conclusion)
        last_conclusion = conclusion

    expected = question if row["label"] == Label.PROVED.value else question.negate()
    if proof["steps"]:
        if last_conclusion != expected:
            problems.append("final step does not conclude the question literal")
    elif expected not in facts:
        problems.append("empty proof but the target literal is not an input fact")

    for c in proof["conflicts"]:
        pair = (c["winner"], c["loser"])
        if c["type"] == TYPE1 and pair not in prefs:
            problems.append(f"Type1 resolution {pair} has no matching preference")
        if c["type"] == TYPE2 and (pair[1], pair[0]) not in prefs:
            problems.append(f"Type2 resolution {pair} has no reversed preference")
    return problems


def _is_instance_of(rule, premises: tuple[Literal, ...], conclusion: Literal) -> bool:
    from .logic import Quantifier
    if rule.template == 5:
        return conclusion == rule.head and premises == tuple(rule.body)
    if rule.quantifier == Quantifier.FORALL:
        if len(premises) != len(rule.body):
            return False
        subject = conclusion.subject
        return (rule.head.substitute(subject) == conclusion
                and tuple(b.substitute(subject) for b in rule.body) == premises)
    if rule.quantifier == Quantifier.EXISTS:
        if len(premises) != 1 or conclusion != rule.head:
            return False
        witness = premises[0].subject
        return rule.body[0].substitute(witness) == premises[0]
    return premises == tuple(rule.body) and conclusion == rule.head


# ---------------------------------------------------------------------------
# Stats
# ---------------------------------------------------------------------------

def proof_chain_depth(proof: Optional[dict]) -> int:
    if not proof or not proof["steps"]:
        return 0
    concluded = {s["conclusion"]: i for i, s in enumerate(proof["steps"])}
    memo: dict[int, int] = {}

    def depth(i: int) -> int:
        if i in memo:
            return memo[i]
        best = 0
        for p in proof["steps"][i]["premises"]:
            j = concluded.get(p)
            if j is not None and j != i:
                best = max(best, depth(j))
        memo[i] = best + 1
        return memo[i]

    return max(depth(i) for i in range(len(proof["steps"])))


def dataset_stats(rows: Sequence[dict]) -> dict:
    labels: dict[str, int] = {}
    categories: dict[str, int] = {}
    type1 = type2 = with_conflict = 0
    opposing = 0
    depths: list[int] = []
    distractors = 0
    tokens: list[int] = []
    for row in rows:
        labels[row["label"]] = labels.get(row["label"], 0) + 1
        for cat in row["metadata"]["knowledge_categories"]:
            categories[cat] = categories.get(cat, 0) + 1
        proof = row.get("proof")
        if proof:
            conflicts = proof["conflicts"]
            type1 += sum(1 for c in conflicts if c["type"] == TYPE1)
            type2 += sum(1 for c in conflicts if c["type"] == TYPE2)
            if conflicts:
                with_conflict += 1
            depths.append(proof_chain_depth(proof))
        if _has_opposing_rules(row):
            opposing += 1
        distractors += row["metadata"]["distractors"]
        tokens.append(len(row["text"].split()))
    n = len(rows)
    return {
        "n": n,
        "labels": dict(sorted(labels.items())),
        "proof_depth": {
            "mean": round(sum(depths) / len(depths), 4) if depths else 0.0,
            "max": max(depths, default=0),
        },
        "conflicts": {
            "type1_resolutions": type1,
            "type2_resolutions": type2,
            "examples_with_resolution": with_conflict,
            "examples_with_opposing_rules": opposing,
        },
        "knowledge_categories": dict(sorted(categories.items())),
        "distractors": {"total": distractors,
                        "mean": round(distractors / n, 4) if n else 0.0},
        "text_length": {
            "mean_tokens": round(sum(tokens) / n, 2) if n else 0.0,
            "max_tokens": max(tokens, default=0),
        },
    }


def _has_opposing_rules(row: dict) -> bool:
    """Whether any two rules can conclude opposite signs of one ground atom
    (universally quantified heads are expanded over the theory's entities)."""
    from .logic import VARIABLE

    theory = theory_from_row(row)
    entities = theory.entities()
    signed: dict[tuple, bool] = {}
    for rule in theory.rules:
        head = rule.head
        instances = ([head.substitute(e) for e in entities]
                     if head.subject == VARIABLE else [head])
        for inst in instances:
            if signed.get(inst.atom, inst.positive) != inst.positive:
                return True
            signed[inst.atom] = inst.positive
    return False
