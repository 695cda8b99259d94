import math
import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from lomtree.data import Example
from lomtree.errors import DegenerateBeta, InvalidStats, NoExamplesReachNode
from lomtree.metrics import (SplitStats, binomial_ci, entropy_of_groups, estimate_split_stats,
                             internal_nodes_by_level, lemma1_bound, objective_j, purity_alpha,
                             tree_entropy)
from lomtree.tree import LOMTree, TrainConfig

from synth import onehot, onehot_examples


def brute_force_j(labels, bits):
    """Objective straight from raw (label, routing bit) pairs, two passes."""
    n = len(labels)
    overall = 0
    for b in bits:
        overall += b
    overall /= n
    total = 0.0
    for c in set(labels):
        n_c = 0
        right_c = 0
        for y, b in zip(labels, bits):
            if y == c:
                n_c += 1
                right_c += b
        total += (n_c / n) * abs(overall - right_c / n_c)
    return 2 * total


def brute_force_entropy(leaves, labels):
    leaves = np.asarray(leaves)
    labels = np.asarray(labels)
    g = 0.0
    for leaf in np.unique(leaves):
        mask = leaves == leaf
        _, counts = np.unique(labels[mask], return_counts=True)
        p = counts / counts.sum()
        g += mask.mean() * float(-(p * np.log(p)).sum())
    return g


def random_stats(rng, k=None):
    k = k or int(rng.integers(1, 9))
    pi = rng.dirichlet(np.ones(k))
    P = rng.uniform(0, 1, k)
    snap = rng.uniform(size=k) < 0.3
    P[snap] = np.round(P[snap])
    return SplitStats.from_rates(pi, P)


class TestObjective:
    def test_maximal(self):
        assert objective_j(SplitStats.from_rates([0.5, 0.5], [0, 1])) == 1.0

    def test_constant_hypothesis(self):
        s = SplitStats.from_rates([0.2, 0.3, 0.5], [0.4, 0.4, 0.4])
        assert objective_j(s) == pytest.approx(0.0, abs=1e-15)

    def test_worked_value(self):
        # beta = 0.5; J = 2 (0.5 * 0.25 + 0.5 * 0.25)
        assert objective_j(SplitStats.from_rates([0.5, 0.5], [0.25, 0.75])) == 0.5

    @pytest.mark.parametrize("pi,P,beta", [
        ([0.5, 0.6], [0, 1], 0.6),
        ([0.5, 0.5], [0, 1.2], 0.6),
        ([0.5, 0.5], [0, 1], 0.4),
        ([-0.5, 1.5], [0, 1], 1.5),
        ([0.5, 0.5], [0.0, float("nan")], 0.5),
    ])
    def test_invalid(self, pi, P, beta):
        with pytest.raises(InvalidStats):
            objective_j(SplitStats(np.array(pi, float), np.array(P, float), beta))

    def test_matches_brute_force(self):
        rng = random.Random(0)
        for _ in range(200):
            k = rng.randint(1, 8)
            n = rng.randint(1, 200)
            labels = [rng.randint(1, k) for _ in range(n)]
            bits = [rng.random() < 0.5 for _ in range(n)]
            got = objective_j(SplitStats.from_routing(labels, bits))
            assert abs(got - brute_force_j(labels, bits)) <= 1e-12

    @given(st.integers(0, 2**32 - 1))
    def test_in_unit_interval(self, seed):
        j = objective_j(random_stats(np.random.default_rng(seed)))
        assert -1e-12 <= j <= 1 + 1e-12


class TestAlpha:
    def test_pure(self):
        assert purity_alpha(SplitStats.from_rates([0.3, 0.7], [0, 1])) == 0.0

    def test_half(self):
        assert purity_alpha(SplitStats.from_rates([0.1, 0.2, 0.7], [0.5] * 3)) == pytest.approx(0.5)

    def test_worked_value(self):
        assert purity_alpha(SplitStats.from_rates([0.5, 0.5], [0.25, 0.75])) == 0.25


class TestLemmaBound:
    def test_tight_case(self):
        alpha, bound = lemma1_bound(SplitStats.from_rates([0.5, 0.5], [0.25, 0.75]))
        assert alpha == 0.25 and bound == 0.25

    def test_maximal_case(self):
        alpha, bound = lemma1_bound(SplitStats.from_rates([0.5, 0.5], [0, 1]))
        assert alpha == 0.0 and bound == 0.0

    @pytest.mark.parametrize("P", [[0, 0], [1, 1]])
    def test_degenerate(self, P):
        with pytest.raises(DegenerateBeta):
            lemma1_bound(SplitStats.from_rates([0.5, 0.5], P))

    def test_random_sweep(self):
        rng = np.random.default_rng(1)
        checked = 0
        for _ in range(1000):
            s = random_stats(rng)
            if min(s.beta, 1 - s.beta) <= 0:
                continue
            alpha, bound = lemma1_bound(s)
            assert alpha <= bound + 1e-12
            checked += 1
        assert checked > 900

    @given(st.integers(0, 2**32 - 1))
    def test_property(self, seed):
        s = random_stats(np.random.default_rng(seed))
        assume(0 < s.beta < 1)
        alpha, bound = lemma1_bound(s)
        assert 0 <= alpha <= 0.5 + 1e-12
        assert alpha <= bound + 1e-12

    @settings(max_examples=300, suppress_health_check=[HealthCheck.filter_too_much])
    @given(st.one_of(
        # arbitrary splits on a coarse grid, where J = 1 can be hit exactly
        st.lists(st.tuples(st.integers(1, 4), st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0])),
                 min_size=1, max_size=6),
        # pure splits whose left and right masses are equal
        st.tuples(st.lists(st.integers(1, 4), min_size=1, max_size=3),
                  st.lists(st.integers(1, 4), min_size=1, max_size=3)).map(
            lambda lr: [(w * sum(lr[1]), 0.0) for w in lr[0]]
            + [(w * sum(lr[0]), 1.0) for w in lr[1]]),
    ))
    def test_j_one_forces_pure_and_balanced(self, parts):
        weights = np.array([w for w, _ in parts], float)
        s = SplitStats.from_rates(weights / weights.sum(), [p for _, p in parts])
        j = objective_j(s)
        assume(j >= 1 - 1e-12)
        assert purity_alpha(s) <= 1e-9
        assert abs(min(s.beta, 1 - s.beta) - 0.5) <= 1e-9


def two_class_tree():
    """Root trained to separate class 1 (left) from class 2 (right)."""
    tree = LOMTree(TrainConfig(max_internal=1, step=0.5))
    data = [Example(onehot(y), y) for y in [1, 2] * 50]
    tree.fit(data, passes=2)
    return tree, data


class TestEstimateSplitStats:
    def test_root_sees_global_frequencies(self):
        tree, _ = two_class_tree()
        data = [Example(onehot(y), y) for y in [1, 1, 1, 2]]
        s = estimate_split_stats(tree, tree.root, data)
        np.testing.assert_allclose(s.pi, [0.75, 0.25])

    def test_perfect_separation(self):
        tree, data = two_class_tree()
        s = estimate_split_stats(tree, tree.root, data)
        assert objective_j(s) == 1.0 and purity_alpha(s) == 0.0 and s.beta == 0.5

    def test_empty_cohort(self):
        tree = LOMTree(TrainConfig(max_internal=3))
        tree.split_leaf(tree.root)
        left = tree.nodes[tree.root].left
        tree.split_leaf(left)
        tree.nodes[tree.root].regressor.bias = 1.0   # everything goes right
        data = [Example(onehot(y), y) for y in (1, 2, 3)]
        with pytest.raises(NoExamplesReachNode):
            estimate_split_stats(tree, left, data)
        with pytest.raises(NoExamplesReachNode):
            estimate_split_stats(tree, tree.root, [])


class TestTreeEntropy:
    def test_uniform_single_leaf(self):
        tree = LOMTree(TrainConfig(max_internal=1))
        tree.nodes[0].stats.touch(1)
        data = [Example(onehot(1), y) for y in [1, 2, 3, 4] * 5]
        assert tree_entropy(tree, data).value == pytest.approx(math.log(4), abs=1e-12)

    def test_pure_leaves(self):
        tree, data = two_class_tree()
        ent = tree_entropy(tree, data)
        assert ent.value == 0.0
        assert sum(ent.leaf_weights.values()) == pytest.approx(1.0)

    def test_matches_brute_force_and_bounds(self):
        rng = random.Random(5)
        for trial in range(20):
            k = rng.randint(2, 12)
            tree = LOMTree(TrainConfig(max_internal=rng.randint(1, 10), step=0.25))
            data = onehot_examples(k, 300, trial)
            # blur the classes so leaves are mixed
            data = [Example(e.features, rng.randint(1, k)) if rng.random() < 0.3 else e for e in data]
            tree.fit(data)
            ent = tree_entropy(tree, data)
            leaves = [tree.leaf_of(e.features) for e in data]
            assert ent.value == pytest.approx(brute_force_entropy(leaves, [e.label for e in data]),
                                              abs=1e-12)
            k_seen = len({e.label for e in data})
            assert 0 <= ent.value <= math.log(k_seen) + 1e-12
            assert sum(ent.leaf_weights.values()) == pytest.approx(1.0, abs=1e-9)

    def test_refinement_never_increases(self):
        # entropy of the partition by depth-d ancestor is non-increasing in d
        tree = LOMTree(TrainConfig(max_internal=15, step=0.5))
        rng = random.Random(2)
        data = [Example(e.features, rng.randint(1, 16)) if rng.random() < 0.2 else e
                for e in onehot_examples(16, 800, 9)]
        tree.fit(data, passes=2)
        paths = []
        for e in data:
            path = [tree.root]
            v = tree.root
            while not tree.nodes[v].is_leaf:
                n = tree.nodes[v]
                v = n.right if n.regressor.predict(e.features) > 0 else n.left
                path.append(v)
            paths.append(path)
        prev = math.inf
        for d in range(max(map(len, paths))):
            groups = {}
            for path, e in zip(paths, data):
                key = path[min(d, len(path) - 1)]
                groups.setdefault(key, Counter())[e.label] += 1
            g = entropy_of_groups(groups).value
            assert g <= prev + 1e-12
            prev = g


def test_internal_nodes_by_level():
    tree, _ = two_class_tree()
    assert internal_nodes_by_level(tree, 1) == [(tree.root, 0)]


class TestBinomialCI:
    def test_half_width(self):
        p, lo, hi = binomial_ci(100, 1000)
        assert p == 0.1
        assert hi - p == pytest.approx(1.96 * math.sqrt(0.1 * 0.9 / 1000))
        assert hi - p == pytest.approx(0.0186, abs=5e-5)

    def test_zero_error(self):
        assert binomial_ci(0, 50) == (0.0, 0.0, 0.0)

    @given(st.integers(1, 5000), st.data())
    def test_contains_estimate(self, n, data):
        errors = data.draw(st.integers(0, n))
        p, lo, hi = binomial_ci(errors, n)
        assert 0 <= lo <= p <= hi <= 1
