"""Online label tree: expectation-difference routing, growth up to a node
budget, and orphan-leaf recycling once the budget is spent."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterator

from .data import SparseVector
from .errors import EmptyLeaf, SwapUnavailable, UntrainedTree
from .linreg import LinearRegressor


@dataclass
class TrainConfig:
    """Hyperparameters of one LOMtree run.

    max_internal: cap on the number of non-leaf nodes (T).
    swap_resistance: multiplier in the recycling condition (R_S).
    """

    max_internal: int = 1
    swap_resistance: float = 4.0
    step: float = 0.5
    passes: int = 1
    shuffle_seed: int | None = 0

    def __post_init__(self):
        if self.max_internal < 1:
            raise ValueError("max_internal must be >= 1")
        if not self.swap_resistance > 0:
            raise ValueError("swap_resistance must be > 0")
        if not self.step > 0:
            raise ValueError("step must be > 0")
        if self.passes < 1:
            raise ValueError("passes must be >= 1")


class NodeStats:
    """Per-node class statistics.

    ``m[y]`` sums post-update scores of class y, ``l[y]`` counts class-y
    points reaching the node, ``n[y]`` counts class-y points used to train
    the node regressor, ``e[y] = m[y] / n[y]``. ``E`` is the overall mean
    score, kept from the running sums ``sum_m`` and ``sum_n``. ``C`` is the
    recorded size of the smallest leaf below (or at) the node.
    """

    __slots__ = ("m", "l", "n", "e", "E", "C", "sum_m", "sum_n",
                 "label", "label_count")

    def __init__(self):
        self.reset()

    def reset(self):
        self.m: dict[int, float] = {}
        self.l: dict[int, int] = {}
        self.n: dict[int, int] = {}
        self.e: dict[int, float] = {}
        self.E = 0.0
        self.C = 0
        self.sum_m = 0.0
        self.sum_n = 0
        # running argmax of l, ties to the smaller class id
        self.label = 0
        self.label_count = 0

    def touch(self, y: int) -> None:
        l = self.l
        if y not in l:
            self.m[y] = 0.0
            l[y] = 0
            self.n[y] = 0
            self.e[y] = 0.0
        c = l[y] + 1
        l[y] = c
        if c > self.label_count or (c == self.label_count and y < self.label):
            self.label = y
            self.label_count = c

    def add_score(self, y: int, score: float) -> None:
        n = self.n[y] + 1
        self.n[y] = n
        m = self.m[y] + score
        self.m[y] = m
        self.e[y] = m / n
        self.sum_m += score
        self.sum_n += 1
        self.E = self.sum_m / self.sum_n

    def copy(self) -> "NodeStats":
        out = NodeStats()
        for name in self.__slots__:
            val = getattr(self, name)
            setattr(out, name, dict(val) if isinstance(val, dict) else val)
        return out


class TreeNode:
    __slots__ = ("id", "parent", "left", "right", "regressor", "stats")

    def __init__(self, node_id: int):
        self.id = node_id
        self.parent: int | None = None
        self.left: int | None = None
        self.right: int | None = None
        self.regressor = LinearRegressor()
        self.stats = NodeStats()

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def __repr__(self):
        kind = "leaf" if self.is_leaf else f"children=({self.left},{self.right})"
        return f"TreeNode({self.id}, parent={self.parent}, {kind}, C={self.stats.C})"


class LOMTree:
    """Logarithmic online multiclass tree.

    Nodes live in an arena (``self.nodes``) and refer to each other by index;
    at most ``2 * max_internal + 1`` nodes are ever allocated because
    recycling relinks existing nodes instead of creating new ones.
    """

    def __init__(self, config: TrainConfig | None = None):
        self.config = config or TrainConfig()
        self.nodes: list[TreeNode] = [TreeNode(0)]
        self.root = 0
        self.t = 0
        self.n_seen = 0
        self.swaps = 0
        self.recycle_counts: Counter[int] = Counter()
        self.set_node(self.root)

    @property
    def capacity(self) -> int:
        return 2 * self.config.max_internal + 1

    # --- Algorithm subroutines -------------------------------------------

    def set_node(self, v: int) -> None:
        node = self.nodes[v]
        node.stats.reset()
        node.regressor.reset()

    def update_c(self, v: int) -> None:
        nodes = self.nodes
        while v != self.root:
            p = nodes[v].parent
            pn = nodes[p]
            if pn.stats.C == nodes[v].stats.C:
                break
            v = p
            pn.stats.C = min(nodes[pn.left].stats.C, nodes[pn.right].stats.C)

    def find_smallest_leaf(self) -> int:
        nodes = self.nodes
        v = self.root
        while nodes[v].left is not None:
            node = nodes[v]
            if nodes[node.right].stats.C < nodes[node.left].stats.C:
                v = node.right
            else:
                v = node.left
        return v

    def _grow(self, j: int) -> None:
        if len(self.nodes) + 2 > self.capacity:
            raise RuntimeError("node arena exhausted")  # unreachable while t <= T
        left = TreeNode(len(self.nodes))
        right = TreeNode(len(self.nodes) + 1)
        self.nodes.extend((left, right))
        left.parent = right.parent = j
        node = self.nodes[j]
        node.left, node.right = left.id, right.id
        self.set_node(left.id)
        self.set_node(right.id)
        self.t += 1

    def swap(self, j: int) -> None:
        """Detach the smallest leaf and its parent and hang them under leaf j."""
        nodes = self.nodes
        s = self.find_smallest_leaf()
        s_pa = nodes[s].parent
        if s == j or s_pa is None or s_pa == j:
            raise SwapUnavailable(f"orphan {s} unusable for leaf {j}")
        s_gpa = nodes[s_pa].parent
        if s_gpa is None:
            raise SwapUnavailable(f"orphan {s} has no grandparent")
        pa = nodes[s_pa]
        s_sib = pa.right if pa.left == s else pa.left

        gpa = nodes[s_gpa]
        if gpa.left == s_pa:
            gpa.left = s_sib
        else:
            gpa.right = s_sib
        nodes[s_sib].parent = s_gpa
        self.update_c(s_sib)

        self.set_node(s)
        self.set_node(s_pa)
        pa.left = pa.right = None
        jn = nodes[j]
        jn.left, jn.right = s, s_pa
        nodes[s].parent = j
        pa.parent = j

        self.swaps += 1
        self.recycle_counts[s] += 1
        self.recycle_counts[s_pa] += 1

    def split_leaf(self, j: int) -> None:
        """Give leaf j two children, new ones while the budget lasts and
        recycled ones afterwards, then hand its count down to them."""
        if self.t < self.config.max_internal:
            self._grow(j)
        else:
            self.swap(j)
        nodes = self.nodes
        node = nodes[j]
        c_j = node.stats.C
        c_left = c_j // 2
        nodes[node.left].stats.C = c_left
        nodes[node.right].stats.C = c_j - c_left
        self.update_c(node.left)

    # --- training ---------------------------------------------------------

    def train_example(self, x: SparseVector, y: int) -> int:
        """Route one labeled example from the root, updating along the way.

        Returns the id of the leaf where the example stopped.
        """
        nodes = self.nodes
        cfg = self.config
        step = cfg.step
        self.n_seen += 1
        j = self.root
        while True:
            node = nodes[j]
            st = node.stats
            st.touch(y)
            if node.left is None:
                if len(st.l) < 2 or not self._may_split(st):
                    st.C += 1
                    return j
                try:
                    self.split_leaf(j)
                except SwapUnavailable:
                    st.C += 1
                    return j

            c = -1.0 if st.E > st.e[y] else 1.0
            reg = node.regressor
            reg.update(x, c, step)
            st.add_score(y, reg.predict(x))
            j = node.left if c < 0 else node.right

    def _may_split(self, st: NodeStats) -> bool:
        cfg = self.config
        if self.t < cfg.max_internal:
            return True
        c_root = self.nodes[self.root].stats.C
        return st.C - st.label_count > cfg.swap_resistance * (c_root + 1)

    def fit(self, examples, passes: int | None = None):
        """Convenience loop over an in-memory list (no shuffling)."""
        for _ in range(passes or 1):
            for ex in examples:
                self.train_example(ex.features, ex.label)
        return self

    # --- inference --------------------------------------------------------

    def leaf_of(self, x: SparseVector) -> int:
        return self._descend(x)[0]

    def _descend(self, x: SparseVector) -> tuple[int, int]:
        nodes = self.nodes
        v = self.root
        evals = 0
        while True:
            node = nodes[v]
            if node.left is None:
                return v, evals
            evals += 1
            v = node.right if node.regressor.predict(x) > 0 else node.left

    def leaf_label(self, leaf: int) -> int:
        st = self.nodes[leaf].stats
        if st.label_count == 0:
            raise EmptyLeaf(f"node {leaf} has no class counts")
        return st.label

    def _label_from(self, v: int) -> int:
        # a freshly created leaf may not have been reached yet: use the
        # nearest ancestor that has
        nodes = self.nodes
        while nodes[v].stats.label_count == 0:
            if v == self.root:
                raise UntrainedTree("tree has not seen any training example")
            v = nodes[v].parent
        return nodes[v].stats.label

    def predict_with_cost(self, x: SparseVector) -> tuple[int, int]:
        """Predicted class and the number of regressor evaluations used."""
        if self.nodes[self.root].stats.label_count == 0:
            raise UntrainedTree("tree has not seen any training example")
        leaf, evals = self._descend(x)
        return self._label_from(leaf), evals

    def predict(self, x: SparseVector) -> int:
        return self.predict_with_cost(x)[0]

    # --- traversal and diagnostics ----------------------------------------

    def iter_preorder(self) -> Iterator[tuple[int, int]]:
        """Yield ``(node_id, depth)`` in pre-order, left before right."""
        stack = [(self.root, 0)]
        nodes = self.nodes
        while stack:
            v, d = stack.pop()
            yield v, d
            node = nodes[v]
            if node.left is not None:
                stack.append((node.right, d + 1))
                stack.append((node.left, d + 1))

    def leaves(self) -> list[int]:
        return [v for v, _ in self.iter_preorder() if self.nodes[v].is_leaf]

    def depth_stats(self) -> tuple[int, float]:
        """(max depth, mean leaf depth weighted by the leaves' l-mass)."""
        max_d = 0
        mass = 0
        acc = 0
        for v, d in self.iter_preorder():
            max_d = max(max_d, d)
            node = self.nodes[v]
            if node.is_leaf:
                w = sum(node.stats.l.values())
                mass += w
                acc += w * d
        return max_d, (acc / mass if mass else 0.0)

    def check_integrity(self, rel_tol: float = 1e-9) -> None:
        """Raise AssertionError if any structural or statistical invariant fails."""
        nodes = self.nodes
        assert self.t <= self.config.max_internal, "t exceeds budget"
        assert len(nodes) <= self.capacity, "arena over capacity"
        assert nodes[self.root].parent is None, "root has a parent"
        seen = set()
        internal = 0
        for v, _ in self.iter_preorder():
            assert v not in seen, f"node {v} reached twice"
            seen.add(v)
            node = nodes[v]
            assert (node.left is None) == (node.right is None), f"node {v} has one child"
            if node.left is not None:
                internal += 1
                for ch in (node.left, node.right):
                    assert nodes[ch].parent == v, f"child {ch} does not point back to {v}"
                assert node.stats.C <= min(nodes[node.left].stats.C, nodes[node.right].stats.C), \
                    f"node {v} C exceeds a child's C"
            st = node.stats
            assert st.m.keys() == st.l.keys() == st.n.keys() == st.e.keys()
            for y, n in st.n.items():
                assert n >= 0 and st.l[y] >= 0
                if n:
                    assert math.isclose(st.e[y] * n, st.m[y], rel_tol=rel_tol, abs_tol=1e-12)
                else:
                    assert st.e[y] == 0.0
            if st.sum_n:
                assert math.isclose(st.E * st.sum_n, st.sum_m, rel_tol=rel_tol, abs_tol=1e-12)
                scale = 1.0 + math.fsum(abs(v) for v in st.m.values())
                assert abs(st.sum_m - math.fsum(st.m.values())) <= 1e-9 * scale
            else:
                assert st.E == 0.0
            assert st.sum_n == sum(st.n.values())
        assert seen == set(range(len(nodes))), "arena holds unreachable nodes"
        assert internal == self.t, f"t={self.t} but {internal} internal nodes"
