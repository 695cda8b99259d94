"""Sparse examples: libsvm-style parsing, dataset splits and multi-pass streaming."""

from __future__ import annotations

import gzip
import math
import random
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import MalformedRecord, TooFewExamples

MAX_INDEX = 2**32 - 1


@dataclass(frozen=True)
class SparseVector:
    """Sparse feature vector with strictly increasing indices."""

    indices: tuple[int, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values differ in length")
        prev = -1
        for i in self.indices:
            if i <= prev:
                raise ValueError("indices must be strictly increasing")
            prev = i
        if prev > MAX_INDEX:
            raise ValueError(f"index {prev} exceeds 32-bit range")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("non-finite feature value")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "SparseVector":
        pairs = sorted((int(i), float(v)) for i, v in pairs)
        if not pairs:
            return cls()
        idx, vals = zip(*pairs)
        return cls(tuple(idx), tuple(vals))

    @classmethod
    def from_dense(cls, row) -> "SparseVector":
        return cls.from_pairs((i, v) for i, v in enumerate(row) if v != 0.0)

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.indices, self.values))

    def __len__(self):
        return len(self.indices)

    def scaled(self, a: float) -> "SparseVector":
        return SparseVector(self.indices, tuple(a * v for v in self.values))

    def squared_norm(self) -> float:
        return math.fsum(v * v for v in self.values)


@dataclass(frozen=True)
class Example:
    features: SparseVector
    label: int

    def __post_init__(self):
        if self.label < 1:
            raise ValueError(f"label must be >= 1, got {self.label}")


@dataclass(frozen=True)
class DatasetMeta:
    dimension: int
    num_classes: int
    num_examples: int

    @classmethod
    def of(cls, examples: Sequence[Example]) -> "DatasetMeta":
        dim = 0
        labels = set()
        for ex in examples:
            labels.add(ex.label)
            if ex.features.indices:
                dim = max(dim, ex.features.indices[-1] + 1)
        return cls(dim, len(labels), len(examples))


def _strip_comment(text: str) -> str:
    pos = text.find("#")
    return text if pos < 0 else text[:pos]


def parse_line(text: str) -> Example:
    """Parse one ``<label> <idx>:<val> ...`` record."""
    tokens = _strip_comment(text).split()
    if not tokens:
        raise MalformedRecord(text, "empty record")
    try:
        label = int(tokens[0])
    except ValueError:
        raise MalformedRecord(text, f"non-integer label {tokens[0]!r}") from None
    if label < 1:
        raise MalformedRecord(text, f"label {label} < 1")

    pairs = {}
    for tok in tokens[1:]:
        idx_s, sep, val_s = tok.partition(":")
        if not sep:
            raise MalformedRecord(text, f"token {tok!r} is not idx:val")
        try:
            idx = int(idx_s)
            val = float(val_s)
        except ValueError:
            raise MalformedRecord(text, f"non-numeric token {tok!r}") from None
        if idx < 0 or idx > MAX_INDEX:
            raise MalformedRecord(text, f"index {idx} out of range")
        if not math.isfinite(val):
            raise MalformedRecord(text, f"non-finite value in {tok!r}")
        if idx in pairs:
            raise MalformedRecord(text, f"duplicate index {idx}")
        pairs[idx] = val
    return Example(SparseVector.from_pairs(pairs.items()), label)


def format_example(ex: Example) -> str:
    """Inverse of :func:`parse_line`; ``repr`` keeps floats exact."""
    parts = [str(ex.label)]
    parts.extend(f"{i}:{v!r}" for i, v in zip(ex.features.indices, ex.features.values))
    return " ".join(parts)


def _open_text(path):
    path = str(path)
    if path.endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def iter_file(path) -> Iterator[Example]:
    """Stream examples from a (possibly gzipped) libsvm file.

    Blank and comment-only lines are skipped. Parse failures are re-raised
    with the 1-based line number prepended to the reason.
    """
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not _strip_comment(line).strip():
                continue
            try:
                yield parse_line(line)
            except MalformedRecord as err:
                raise MalformedRecord(line.rstrip("\n"), f"line {lineno}: {err.reason}") from None


def load_file(path) -> list[Example]:
    return list(iter_file(path))


def write_file(path, examples: Iterable[Example]) -> None:
    path = str(path)
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "wt", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(format_example(ex))
            fh.write("\n")


def split_dataset(examples: Sequence[Example], seed: int):
    """Split into (train, validation, test).

    test gets floor(0.1 n) examples, validation floor(0.1 (n - test)) of the
    rest, train the remainder. Each part keeps the input order.
    """
    n = len(examples)
    if n < 10:
        raise TooFewExamples(f"need at least 10 examples, got {n}")
    n_test = n // 10
    n_val = (n - n_test) // 10
    order = list(range(n))
    random.Random(seed).shuffle(order)
    test_idx = sorted(order[:n_test])
    val_idx = sorted(order[n_test:n_test + n_val])
    train_idx = sorted(order[n_test + n_val:])
    pick = lambda idx: [examples[i] for i in idx]  # noqa: E731
    return pick(train_idx), pick(val_idx), pick(test_idx)


def stream_passes(train: Sequence[Example], passes: int,
                  shuffle_seed: int | None = 0) -> Iterator[Example]:
    """Yield ``passes`` sweeps over ``train``.

    Each pass uses a fresh permutation drawn from one RNG seeded with
    ``shuffle_seed``; ``None`` disables shuffling.
    """
    if passes < 1:
        raise ValueError("passes must be >= 1")
    rng = random.Random(shuffle_seed) if shuffle_seed is not None else None
    n = len(train)
    for _ in range(passes):
        order = list(range(n))
        if rng is not None:
            rng.shuffle(order)
        for i in order:
            yield train[i]
