"""Model construction, multi-pass training, evaluation and grid search."""

from __future__ import annotations

import os
import re
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from .baselines import OAAModel, build_rtree
from .data import stream_passes
from .errors import NonFiniteUpdate, UntrainedModel, UntrainedTree
from .metrics import binomial_ci, tree_entropy
from .tree import LOMTree, TrainConfig

ALGOS = ("lomtree", "rtree", "oaa")

DEFAULT_STEPS = (0.25, 0.5, 0.75, 1.0, 2.0, 4.0, 8.0)
DEFAULT_T_MULTIPLIERS = (1, 2, 4, 8, 16, 32, 64)   # T = m * k - 1
DEFAULT_SWAP_RESISTANCES = (4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0)
MAX_PASSES = 20


def labels_of(examples) -> list[int]:
    return sorted({ex.label for ex in examples})


def default_max_internal(k: int) -> int:
    return max(1, k - 1)


def resolve_t(token: str | int, k: int) -> int:
    """Turn a T grid token such as ``"4k-1"``, ``"k-1"`` or ``"63"`` into an int."""
    if isinstance(token, int):
        return token
    token = token.strip().replace(" ", "")
    m = re.fullmatch(r"(\d*)k-1", token)
    if m:
        return max(1, int(m.group(1) or 1) * k - 1)
    value = int(token)
    if value < 1:
        raise ValueError(f"T must be >= 1, got {value}")
    return value


def make_model(algo: str, labels, *, step: float, max_internal: int | None = None,
               swap_resistance: float = 4.0, seed: int = 0):
    if algo == "lomtree":
        T = max_internal if max_internal is not None else default_max_internal(len(labels))
        return LOMTree(TrainConfig(max_internal=T, swap_resistance=swap_resistance, step=step))
    if algo == "rtree":
        return build_rtree(labels, seed, step=step)
    if algo == "oaa":
        return OAAModel(labels, step=step)
    raise ValueError(f"unknown algorithm {algo!r}")


@dataclass
class PassSummary:
    pass_index: int
    train_error: float
    internal_nodes: int | None = None
    swaps: int | None = None

    def line(self) -> str:
        out = f"pass={self.pass_index} train_error={self.train_error:.6f}"
        if self.internal_nodes is not None:
            out += f" t={self.internal_nodes} swaps={self.swaps}"
        return out


def train_passes(model, train, passes: int, shuffle_seed: int | None = 0, on_pass=None):
    """Train for ``passes`` sweeps; returns one PassSummary per pass.

    The per-pass error is progressive: each example is predicted just before
    the model trains on it. ``on_pass(summary)`` runs after every pass.
    """
    summaries = []
    n = len(train)
    mistakes = 0
    seen = 0
    for ex in stream_passes(train, passes, shuffle_seed):
        try:
            wrong = model.predict(ex.features) != ex.label
        except (UntrainedTree, UntrainedModel):
            wrong = True
        mistakes += wrong
        model.train_example(ex.features, ex.label)
        seen += 1
        if seen == n:
            s = PassSummary(len(summaries) + 1, mistakes / n)
            if isinstance(model, LOMTree):
                s.internal_nodes, s.swaps = model.t, model.swaps
            summaries.append(s)
            if on_pass is not None:
                on_pass(s)
            mistakes = seen = 0
    return summaries


@dataclass
class EvalReport:
    test_error: float
    ci_low: float
    ci_high: float
    per_example_test_seconds: float
    max_depth: int
    mean_depth: float
    entropy: float
    mean_evaluations: float
    max_evaluations: int
    examples_evaluated: int

    def lines(self) -> list[str]:
        return [f"{k}={v}" for k, v in asdict(self).items()]


def error_rate(model, examples) -> float:
    wrong = sum(model.predict(ex.features) != ex.label for ex in examples)
    return wrong / len(examples)


def evaluate(model, examples, repetitions: int = 3) -> EvalReport:
    """Test error, binomial interval, timing and routing-cost statistics.

    Timing covers routing and scoring only (data is already parsed) and is
    the median of ``repetitions`` wall-clock runs.
    """
    if not examples:
        raise ValueError("no examples to evaluate")
    xs = [ex.features for ex in examples]
    results = [model.predict_with_cost(x) for x in xs]
    wrong = sum(lab != ex.label for (lab, _), ex in zip(results, examples))
    costs = [c for _, c in results]
    p, lo, hi = binomial_ci(wrong, len(examples))

    timings = []
    predict = model.predict
    for _ in range(max(3, repetitions)):
        t0 = time.perf_counter()
        for x in xs:
            predict(x)
        timings.append(time.perf_counter() - t0)
    max_d, mean_d = model.depth_stats()
    return EvalReport(
        test_error=p,
        ci_low=lo,
        ci_high=hi,
        per_example_test_seconds=statistics.median(timings) / len(xs),
        max_depth=max_d,
        mean_depth=mean_d,
        entropy=tree_entropy(model, examples).value,
        mean_evaluations=sum(costs) / len(costs),
        max_evaluations=max(costs),
        examples_evaluated=len(examples),
    )


@dataclass(frozen=True)
class GridPoint:
    algo: str
    step: float
    max_internal: int | None = None
    swap_resistance: float | None = None


@dataclass
class GridResult:
    point: GridPoint
    validation_error: float
    passes: int
    errors_by_pass: list[float] = field(default_factory=list)
    diverged: bool = False

    def sort_key(self):
        p = self.point
        return (self.validation_error, p.max_internal or 0, p.step,
                p.swap_resistance or 0.0, self.passes)


def _run_grid_point(point: GridPoint, train, validation, passes, seed, shuffle_seed):
    labels = labels_of(train)
    model = make_model(point.algo, labels, step=point.step,
                       max_internal=point.max_internal,
                       swap_resistance=point.swap_resistance or 4.0, seed=seed)
    errs = []
    try:
        train_passes(model, train, passes, shuffle_seed,
                     on_pass=lambda s: errs.append(error_rate(model, validation)))
    except NonFiniteUpdate:
        return GridResult(point, float("inf"), 0, errs, diverged=True)
    best = min(range(len(errs)), key=lambda i: (errs[i], i))
    return GridResult(point, errs[best], best + 1, errs)


def build_grid(algo: str, k: int, steps=DEFAULT_STEPS, t_values=None,
               swap_resistances=DEFAULT_SWAP_RESISTANCES) -> list[GridPoint]:
    if algo != "lomtree":
        return [GridPoint(algo, float(s)) for s in steps]
    if t_values is None:
        t_values = [m * k - 1 for m in DEFAULT_T_MULTIPLIERS]
    t_values = [resolve_t(t, k) for t in t_values]
    return [GridPoint(algo, float(s), int(T), float(rs))
            for s in steps for T in t_values for rs in swap_resistances]


def sweep_threads(n_points: int) -> int:
    env = os.environ.get("LOMTREE_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, n_points))


def sweep(grid, train, validation, passes: int = MAX_PASSES, seed: int = 0,
          shuffle_seed: int | None = 0, threads: int | None = None) -> list[GridResult]:
    """Evaluate every grid point on ``validation``; results ranked best first.

    Each point also picks its best pass count. Ties rank fewer nodes, then
    smaller step first.
    """
    if not validation:
        raise ValueError("sweep needs a non-empty validation set")
    threads = threads or sweep_threads(len(grid))
    args = (train, validation, passes, seed, shuffle_seed)
    if threads == 1:
        results = [_run_grid_point(p, *args) for p in grid]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_run_grid_point, p, *args) for p in grid]
            results = [f.result() for f in futures]
    return sorted(results, key=GridResult.sort_key)
