"""Entity, predicate, and sentence-template vocabularies.

Train and test draw from disjoint word lists and disjoint template sets;
validation shares the train side. Lists ship as plain data files (one item
per line for words, a pipe-separated table for templates) so they can be
swapped without touching code.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional

from .knowledge import TEST_CATEGORIES, TRAIN_CATEGORIES, default_data_dir

SPLITS = ("train", "validation", "test")


def vocab_side(split: str) -> str:
    """The vocabulary side a dataset split draws from."""
    if split not in SPLITS:
        raise ValueError(f"unknown split {split!r}")
    return "test" if split == "test" else "train"


@dataclass(frozen=True)
class RulePattern:
    template: int
    split: str
    name: str
    signature: str   # fragment unique to this pattern's split, for leak scans
    pattern: str


@dataclass(frozen=True)
class Vocabulary:
    train_entities: tuple[str, ...]
    test_entities: tuple[str, ...]
    train_predicates: tuple[str, ...]
    test_predicates: tuple[str, ...]
    patterns: tuple[RulePattern, ...]

    def entities(self, split: str) -> tuple[str, ...]:
        return self.test_entities if vocab_side(split) == "test" else self.train_entities

    def predicates(self, split: str) -> tuple[str, ...]:
        return self.test_predicates if vocab_side(split) == "test" else self.train_predicates

    def knowledge_categories(self, split: str) -> tuple[str, ...]:
        return TEST_CATEGORIES if vocab_side(split) == "test" else TRAIN_CATEGORIES

    def rule_patterns(self, template: int, split: str) -> list[RulePattern]:
        side = vocab_side(split)
        out = [p for p in self.patterns if p.template == template and p.split == side]
        if not out:
            raise KeyError(f"no pattern for template {template} in split {split}")
        return out


def _read_list(path: Path) -> tuple[str, ...]:
    return tuple(ln.strip() for ln in path.read_text(encoding="utf-8").splitlines()
                 if ln.strip() and not ln.startswith("#"))


def load_vocabulary(data_dir: Optional[Path] = None) -> Vocabulary:
    data_dir = data_dir or default_data_dir()
    train_e = _read_list(data_dir / "entities_train.txt")
    test_e = _read_list(data_dir / "entities_test.txt")
    train_p = _read_list(data_dir / "predicates_train.txt")
    test_p = _read_list(data_dir / "predicates_test.txt")

    patterns = []
    for ln in _read_list(data_dir / "templates.txt"):
        template, split, name, signature, pattern = ln.split("|")
        patterns.append(RulePattern(int(template), split, name, signature, pattern))
    vocab = Vocabulary(train_e, test_e, train_p, test_p, tuple(patterns))

    overlap = set(train_e) & set(test_e)
    if overlap:
        raise ValueError(f"entity lists overlap: {sorted(overlap)}")
    overlap = set(train_p) & set(test_p)
    if overlap:
        raise ValueError(f"predicate lists overlap: {sorted(overlap)}")
    for t in range(1, 7):
        trains = [p for p in vocab.patterns if p.template == t and p.split == "train"]
        tests = [p for p in vocab.patterns if p.template == t and p.split == "test"]
        if len(trains) < 2 or len(tests) < 1:
            raise ValueError(f"template {t} needs >=2 train and >=1 test patterns")
    return vocab


@lru_cache(maxsize=4)
def _cached_vocab(data_dir: Optional[str]) -> Vocabulary:
    return load_vocabulary(Path(data_dir) if data_dir else None)


def get_vocabulary(data_dir: Optional[Path] = None) -> Vocabulary:
    return _cached_vocab(str(data_dir) if data_dir else None)
