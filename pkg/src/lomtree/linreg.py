"""Online linear regressor trained by squared-loss SGD on +/-1 targets."""

from __future__ import annotations

import math

from .data import SparseVector
from .errors import NonFiniteUpdate


class LinearRegressor:
    """Sparse linear scorer ``bias + sum_i w[i] * x[i]``.

    Weights live in a dict so that a node only pays for the features it has
    actually seen.
    """

    __slots__ = ("weights", "bias", "updates_seen")

    def __init__(self):
        self.weights: dict[int, float] = {}
        self.bias = 0.0
        self.updates_seen = 0

    def reset(self):
        self.weights = {}
        self.bias = 0.0
        self.updates_seen = 0

    def predict(self, x: SparseVector) -> float:
        w = self.weights
        s = self.bias
        for i, v in zip(x.indices, x.values):
            wi = w.get(i)
            if wi is not None:
                s += wi * v
        return s

    def update(self, x: SparseVector, target: float, step: float) -> None:
        """One gradient step on ``0.5 * (predict(x) - target) ** 2``."""
        if step <= 0:
            raise ValueError("step must be positive")
        g = step * (self.predict(x) - target)
        w = self.weights
        new = [(i, w.get(i, 0.0) - g * v) for i, v in zip(x.indices, x.values)]
        new_bias = self.bias - g
        if not math.isfinite(new_bias) or not all(math.isfinite(wi) for _, wi in new):
            raise NonFiniteUpdate(
                f"non-finite weight after step={step}; reduce the learning rate")
        w.update(new)
        self.bias = new_bias
        self.updates_seen += 1

    def gradient(self, x: SparseVector, target: float) -> tuple[dict[int, float], float]:
        """Gradient of the half squared loss w.r.t. (weights at x's support, bias)."""
        r = self.predict(x) - target
        return {i: r * v for i, v in zip(x.indices, x.values)}, r

    def copy(self) -> "LinearRegressor":
        out = LinearRegressor()
        out.weights = dict(self.weights)
        out.bias = self.bias
        out.updates_seen = self.updates_seen
        return out

    def __eq__(self, other):
        if not isinstance(other, LinearRegressor):
            return NotImplemented
        return (self.weights == other.weights and self.bias == other.bias
                and self.updates_seen == other.updates_seen)

    def __repr__(self):
        return f"LinearRegressor(n_weights={len(self.weights)}, bias={self.bias:.4g})"
