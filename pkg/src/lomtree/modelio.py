"""Little-endian binary model container.

Layout: ``b"LOMT"``, version byte, kind byte, then a kind-specific body.
Reals are stored as f64 and weights as (u32 index, f64 value) pairs, so a
save/load round trip reproduces predictions bit for bit.
"""

from __future__ import annotations

import io
import struct
from collections import Counter

from .baselines import OAAModel, RandomLabelTree
from .errors import ModelFormatError
from .linreg import LinearRegressor
from .tree import LOMTree, NodeStats, TrainConfig, TreeNode

MAGIC = b"LOMT"
VERSION = 1
KINDS = {"lomtree": 1, "rtree": 2, "oaa": 3}
KIND_NAMES = {v: k for k, v in KINDS.items()}
_NONE = -1


class _Writer:
    def __init__(self):
        self.buf = io.BytesIO()

    def pack(self, fmt, *vals):
        self.buf.write(struct.pack("<" + fmt, *vals))

    def regressor(self, r: LinearRegressor):
        self.pack("I", len(r.weights))
        for i, w in r.weights.items():
            self.pack("Id", i, w)
        self.pack("dQ", r.bias, r.updates_seen)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def unpack(self, fmt):
        fmt = "<" + fmt
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise ModelFormatError("truncated model file")
        vals = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return vals

    def one(self, fmt):
        return self.unpack(fmt)[0]

    def regressor(self) -> LinearRegressor:
        r = LinearRegressor()
        n = self.one("I")
        w = {}
        for _ in range(n):
            i, v = self.unpack("Id")
            w[i] = v
        r.weights = w
        r.bias, r.updates_seen = self.unpack("dQ")
        return r


def model_kind(model) -> str:
    if isinstance(model, LOMTree):
        return "lomtree"
    if isinstance(model, RandomLabelTree):
        return "rtree"
    if isinstance(model, OAAModel):
        return "oaa"
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _opt(v):
    return _NONE if v is None else v


def _unopt(v):
    return None if v == _NONE else v


def _write_lomtree(w: _Writer, tree: LOMTree):
    cfg = tree.config
    seed = cfg.shuffle_seed
    w.pack("IddIBq", cfg.max_internal, cfg.swap_resistance, cfg.step, cfg.passes,
           seed is not None, seed or 0)
    w.pack("IIQQI", tree.root, tree.t, tree.n_seen, tree.swaps, len(tree.nodes))
    for node in tree.nodes:
        st = node.stats
        w.pack("iii", _opt(node.parent), _opt(node.left), _opt(node.right))
        w.pack("dQdQIQI", st.E, st.C, st.sum_m, st.sum_n, st.label, st.label_count, len(st.l))
        for y in st.l:
            w.pack("IQQdd", y, st.l[y], st.n[y], st.m[y], st.e[y])
        w.regressor(node.regressor)
    w.pack("I", len(tree.recycle_counts))
    for v, c in sorted(tree.recycle_counts.items()):
        w.pack("II", v, c)


def _read_lomtree(r: _Reader) -> LOMTree:
    max_internal, rs, step, passes, has_seed, seed = r.unpack("IddIBq")
    cfg = TrainConfig(max_internal, rs, step, passes, seed if has_seed else None)
    tree = LOMTree(cfg)
    tree.root, tree.t, tree.n_seen, tree.swaps, n_nodes = r.unpack("IIQQI")
    if n_nodes > tree.capacity:
        raise ModelFormatError(f"{n_nodes} nodes exceed capacity {tree.capacity}")
    nodes = []
    for v in range(n_nodes):
        node = TreeNode(v)
        node.parent, node.left, node.right = map(_unopt, r.unpack("iii"))
        st = NodeStats()
        st.E, st.C, st.sum_m, st.sum_n, st.label, st.label_count, n_cls = r.unpack("dQdQIQI")
        for _ in range(n_cls):
            y, l, n, m, e = r.unpack("IQQdd")
            st.l[y], st.n[y], st.m[y], st.e[y] = l, n, m, e
        node.stats = st
        node.regressor = r.regressor()
        nodes.append(node)
    tree.nodes = nodes
    tree.recycle_counts = Counter()
    for _ in range(r.one("I")):
        v, c = r.unpack("II")
        tree.recycle_counts[v] = c
    return tree


def _write_rtree(w: _Writer, rt: RandomLabelTree):
    w.pack("dI", rt.step, rt.k)
    for y in rt.leaf_labels:
        w.pack("I", y)
    for reg in rt.regressors:
        w.regressor(reg)


def _read_rtree(r: _Reader) -> RandomLabelTree:
    step, k = r.unpack("dI")
    labels = [r.one("I") for _ in range(k)]
    rt = RandomLabelTree(labels, step=step)
    rt.regressors = [r.regressor() for _ in range(k - 1)]
    return rt


def _write_oaa(w: _Writer, m: OAAModel):
    w.pack("dBI", m.step, m.trained, m.k)
    for y, reg in m.regressors.items():
        w.pack("I", y)
        w.regressor(reg)


def _read_oaa(r: _Reader) -> OAAModel:
    step, trained, k = r.unpack("dBI")
    m = OAAModel(step=step)
    for _ in range(k):
        y = r.one("I")
        m.regressors[y] = r.regressor()
    m.trained = bool(trained)
    return m


_WRITERS = {"lomtree": _write_lomtree, "rtree": _write_rtree, "oaa": _write_oaa}
_READERS = {"lomtree": _read_lomtree, "rtree": _read_rtree, "oaa": _read_oaa}


def dumps(model) -> bytes:
    kind = model_kind(model)
    w = _Writer()
    w.buf.write(MAGIC)
    w.pack("BB", VERSION, KINDS[kind])
    _WRITERS[kind](w, model)
    return w.buf.getvalue()


def loads(data: bytes):
    if data[:4] != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    r = _Reader(data)
    r.pos = 4
    version, kind = r.unpack("BB")
    if version != VERSION:
        raise ModelFormatError(f"unsupported format version {version}")
    if kind not in KIND_NAMES:
        raise ModelFormatError(f"unknown model kind tag {kind}")
    model = _READERS[KIND_NAMES[kind]](r)
    if r.pos != len(data):
        raise ModelFormatError("trailing bytes after model body")
    return model


def save(model, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(model))


def load(path):
    with open(path, "rb") as fh:
        return loads(fh.read())
