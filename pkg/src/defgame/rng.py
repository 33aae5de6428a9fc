"""Deterministic random streams.

Every random decision in the package flows through a numpy Philox
counter-based generator keyed by SHA-256 of the caller-supplied context
parts. Philox is fully specified, platform independent, and free of
ambient entropy, so a (seed, split, index) triple always yields the same
byte stream regardless of OS, interpreter hash seed, or process count.
"""

from __future__ import annotations

import hashlib
from typing import Sequence, TypeVar

import numpy as np

T = TypeVar("T")


def derive_key(*parts: object) -> int:
    """128-bit Philox key from arbitrary context parts."""
    blob = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:16], "little")


def make_rng(*parts: object) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=derive_key(*parts)))


def coin(rng: np.random.Generator, p: float) -> bool:
    return bool(rng.random() < p)


def pick(rng: np.random.Generator, seq: Sequence[T]) -> T:
    if not seq:
        raise IndexError("pick from empty sequence")
    return seq[int(rng.integers(len(seq)))]


def shuffled(rng: np.random.Generator, seq: Sequence[T]) -> list[T]:
    items = list(seq)
    rng.shuffle(items)  # type: ignore[arg-type]
    return items
