"""Split-quality and tree-quality measures.

A split at a node is summarized by class proportions ``pi``, per-class
right-going rates ``P`` and the overall right-going rate ``beta``. From
these we compute the partition objective J, the purity factor alpha and the
alpha/beta/J bound, and over a whole tree the leaf-weighted label entropy.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBeta, InvalidStats, NoExamplesReachNode

TOL = 1e-9


@dataclass(frozen=True)
class SplitStats:
    pi: np.ndarray
    P: np.ndarray
    beta: float

    @classmethod
    def from_rates(cls, pi, P) -> "SplitStats":
        """Build stats with ``beta`` implied by ``pi`` and ``P``."""
        pi = np.asarray(pi, dtype=np.float64)
        P = np.asarray(P, dtype=np.float64)
        return cls(pi, P, float(np.dot(pi, P)))

    @classmethod
    def from_routing(cls, labels, bits) -> "SplitStats":
        """Empirical stats from parallel sequences of labels and 0/1 routing bits."""
        labels = list(labels)
        bits = list(bits)
        if not labels:
            raise InvalidStats("no examples")
        total = Counter(labels)
        right = Counter(y for y, b in zip(labels, bits) if b)
        classes = sorted(total)
        n = len(labels)
        pi = np.array([total[y] / n for y in classes])
        P = np.array([right[y] / total[y] for y in classes])
        return cls(pi, P, sum(1 for b in bits if b) / n)

    def validate(self) -> None:
        pi, P = self.pi, self.P
        if pi.shape != P.shape or pi.ndim != 1 or pi.size == 0:
            raise InvalidStats("pi and P must be non-empty vectors of equal length")
        if not (np.all(np.isfinite(pi)) and np.all(np.isfinite(P)) and math.isfinite(self.beta)):
            raise InvalidStats("non-finite entry")
        if np.any(pi < 0) or abs(pi.sum() - 1.0) > TOL:
            raise InvalidStats(f"pi must be a distribution (sum={pi.sum()!r})")
        if np.any(P < 0) or np.any(P > 1):
            raise InvalidStats("P entries must lie in [0, 1]")
        if abs(self.beta - float(np.dot(pi, P))) > TOL:
            raise InvalidStats(f"beta={self.beta!r} inconsistent with sum(pi * P)")


@dataclass(frozen=True)
class TreeEntropy:
    value: float
    leaf_weights: dict[int, float]
    leaf_distributions: dict[int, dict[int, float]]


def objective_j(s: SplitStats) -> float:
    s.validate()
    return float(2.0 * np.sum(s.pi * np.abs(s.beta - s.P)))


def purity_alpha(s: SplitStats) -> float:
    s.validate()
    return float(np.sum(s.pi * np.minimum(s.P, 1.0 - s.P)))


def lemma1_bound(s: SplitStats) -> tuple[float, float]:
    """Return ``(alpha, min((2 - J) / (4 b) - b, 0.5))`` with ``b = min(beta, 1 - beta)``.

    J and alpha are both unchanged by mirroring the split, so the bound is
    evaluated on the side holding at most half the mass.
    """
    j = objective_j(s)
    alpha = purity_alpha(s)
    b = min(s.beta, 1.0 - s.beta)
    if b <= 0.0:
        raise DegenerateBeta("beta is 0 or 1: every example goes the same way")
    return alpha, min((2.0 - j) / (4.0 * b) - b, 0.5)


def _route(tree, x):
    """Yield (node, bit) along the test-time path of x; bit 1 means right."""
    nodes = tree.nodes
    v = tree.root
    while nodes[v].left is not None:
        bit = nodes[v].regressor.predict(x) > 0
        yield v, bit
        v = nodes[v].right if bit else nodes[v].left


def estimate_split_stats(tree, node: int, dataset) -> SplitStats:
    """Empirical split statistics of internal ``node`` over examples routed to it."""
    if tree.nodes[node].is_leaf:
        raise ValueError(f"node {node} is a leaf")
    labels, bits = [], []
    for ex in dataset:
        for v, bit in _route(tree, ex.features):
            if v == node:
                labels.append(ex.label)
                bits.append(bit)
                break
    if not labels:
        raise NoExamplesReachNode(f"no example reaches node {node}")
    return SplitStats.from_routing(labels, bits)


def entropy_of_groups(groups: dict) -> TreeEntropy:
    """Weighted label entropy of a partition ``{leaf: Counter(label -> count)}``."""
    total = sum(sum(c.values()) for c in groups.values())
    weights, dists = {}, {}
    value = 0.0
    for leaf, counts in groups.items():
        n_leaf = sum(counts.values())
        w = n_leaf / total
        dist = {y: c / n_leaf for y, c in counts.items()}
        h = -sum(p * math.log(p) for p in dist.values() if p > 0)
        weights[leaf] = w
        dists[leaf] = dist
        value += w * h
    return TreeEntropy(max(value, 0.0), weights, dists)


def tree_entropy(model, dataset) -> TreeEntropy:
    """Leaf-weighted Shannon entropy (nats) of labels after test-time routing.

    Works for any model exposing ``leaf_of(x)``.
    """
    groups: dict[int, Counter] = defaultdict(Counter)
    for ex in dataset:
        groups[model.leaf_of(ex.features)][ex.label] += 1
    if not groups:
        raise ValueError("empty dataset")
    return entropy_of_groups(groups)


def internal_nodes_by_level(tree, levels: int) -> list[tuple[int, int]]:
    """(node, depth) pairs of internal nodes in the top ``levels`` levels."""
    return [(v, d) for v, d in tree.iter_preorder()
            if d < levels and not tree.nodes[v].is_leaf]


def binomial_ci(errors: int, n: int, z: float = 1.96) -> tuple[float, float, float]:
    """Error rate with a symmetric normal-approximation interval, clipped to [0, 1]."""
    if n <= 0:
        raise ValueError("n must be positive")
    p = errors / n
    half = z * math.sqrt(p * (1.0 - p) / n)
    return p, max(0.0, p - half), min(1.0, p + half)
