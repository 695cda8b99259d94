"""Comparison learners: a balanced random label tree and one-against-all."""

from __future__ import annotations

import math
import random

from .data import SparseVector
from .errors import TooFewClasses, UnknownLabel, UntrainedModel
from .linreg import LinearRegressor


class RandomLabelTree:
    """Complete binary tree with a fixed, seeded label-to-leaf assignment.

    Nodes use heap numbering: internal nodes are ``0 .. k-2`` and the leaf in
    position ``p`` is node ``k - 1 + p``, so leaf depths differ by at most one.
    """

    def __init__(self, leaf_labels, step: float = 0.5):
        leaf_labels = [int(y) for y in leaf_labels]
        if len(leaf_labels) < 2:
            raise TooFewClasses("a label tree needs at least two classes")
        if len(set(leaf_labels)) != len(leaf_labels):
            raise ValueError("duplicate labels")
        self.leaf_labels = leaf_labels
        self.step = step
        k = len(leaf_labels)
        self.regressors = [LinearRegressor() for _ in range(k - 1)]
        self.label_to_leaf = {}
        self._paths = {}
        for p, y in enumerate(leaf_labels):
            node = k - 1 + p
            bits = []
            steps = []
            while node > 0:
                parent = (node - 1) // 2
                go_right = node == 2 * parent + 2
                bits.append("1" if go_right else "0")
                steps.append((parent, 1.0 if go_right else -1.0))
                node = parent
            self.label_to_leaf[y] = "".join(reversed(bits))
            self._paths[y] = steps[::-1]

    @property
    def k(self) -> int:
        return len(self.leaf_labels)

    @property
    def depth(self) -> int:
        return math.ceil(math.log2(self.k))

    def train_example(self, x: SparseVector, y: int, step: float | None = None) -> None:
        try:
            path = self._paths[y]
        except KeyError:
            raise UnknownLabel(y) from None
        step = self.step if step is None else step
        for node, target in path:
            self.regressors[node].update(x, target, step)

    def leaf_of(self, x: SparseVector) -> int:
        return self._descend(x)[0]

    def _descend(self, x: SparseVector) -> tuple[int, int]:
        internal = self.k - 1
        node = 0
        evals = 0
        while node < internal:
            evals += 1
            node = 2 * node + (2 if self.regressors[node].predict(x) > 0 else 1)
        return node, evals

    def predict_with_cost(self, x: SparseVector) -> tuple[int, int]:
        node, evals = self._descend(x)
        return self.leaf_labels[node - (self.k - 1)], evals

    def predict(self, x: SparseVector) -> int:
        return self.predict_with_cost(x)[0]

    def depth_stats(self) -> tuple[int, float]:
        k = self.k
        depths = [int(math.log2(k + p)) for p in range(k)]
        return max(depths), sum(depths) / k


def build_rtree(labels, seed: int, step: float = 0.5) -> RandomLabelTree:
    labels = sorted(set(int(y) for y in labels))
    if len(labels) < 2:
        raise TooFewClasses(f"need at least 2 classes, got {len(labels)}")
    random.Random(seed).shuffle(labels)
    return RandomLabelTree(labels, step=step)


class OAAModel:
    """One regressor per class; every example updates all of them."""

    def __init__(self, labels=(), step: float = 0.5):
        self.step = step
        self.regressors: dict[int, LinearRegressor] = {}
        for y in sorted(set(int(y) for y in labels)):
            self.regressors[y] = LinearRegressor()
        self.trained = False

    @property
    def k(self) -> int:
        return len(self.regressors)

    def train_example(self, x: SparseVector, y: int, step: float | None = None) -> None:
        step = self.step if step is None else step
        if y not in self.regressors:
            self.regressors = dict(sorted({**self.regressors, y: LinearRegressor()}.items()))
        for label, reg in self.regressors.items():
            reg.update(x, 1.0 if label == y else -1.0, step)
        self.trained = True

    def predict_with_cost(self, x: SparseVector) -> tuple[int, int]:
        if not self.trained:
            raise UntrainedModel("one-against-all model has not been trained")
        best, best_score = 0, -math.inf
        # regressors are kept in ascending label order, so strict > keeps the
        # smallest id on ties
        for label, reg in self.regressors.items():
            s = reg.predict(x)
            if s > best_score:
                best, best_score = label, s
        return best, len(self.regressors)

    def predict(self, x: SparseVector) -> int:
        return self.predict_with_cost(x)[0]

    def leaf_of(self, x: SparseVector) -> int:
        return self.predict(x)

    def depth_stats(self) -> tuple[int, float]:
        return 0, 0.0
