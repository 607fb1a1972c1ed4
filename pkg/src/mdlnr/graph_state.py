"""Mutable reconstruction state: sparse symmetric weights, weight categories,
node fields and the observed data matrix."""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class SelfLoopError(ValueError):
    pass


class UnknownCategoryError(ValueError):
    pass


class DataError(ValueError):
    pass


def snap(x: float, delta: float) -> float:
    """Round ``x`` onto the grid of spacing ``delta`` (half-to-even)."""
    return float(delta * np.round(x / delta))


def on_grid(x: float, delta: float) -> bool:
    return snap(x, delta) == x


def _key(i: int, j: int) -> tuple[int, int]:
    if i == j:
        raise SelfLoopError(f"self-loop ({i}, {i}) is not allowed")
    return (i, j) if i < j else (j, i)


class WeightedNetwork:
    """Undirected weighted graph stored once per unordered pair ``i < j``."""

    def __init__(self, n_nodes: int, edges: dict | None = None):
        self.n_nodes = int(n_nodes)
        self._w: dict[tuple[int, int], float] = {}
        self._adj: list[dict[int, float]] = [dict() for _ in range(self.n_nodes)]
        for (i, j), w in (edges or {}).items():
            self.set(i, j, w)

    def weight(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        return self._w.get(_key(i, j), 0.0)

    def set(self, i: int, j: int, w: float) -> float:
        """Low-level assignment, no category bookkeeping. Returns the old value."""
        k = _key(i, j)
        if not (0 <= k[0] and k[1] < self.n_nodes):
            raise IndexError(f"pair {k} out of range for N={self.n_nodes}")
        old = self._w.get(k, 0.0)
        if w == 0:
            if old != 0:
                del self._w[k]
                del self._adj[i][j]
                del self._adj[j][i]
        else:
            self._w[k] = float(w)
            self._adj[i][j] = float(w)
            self._adj[j][i] = float(w)
        return old

    @property
    def n_edges(self) -> int:
        return len(self._w)

    def edges(self):
        return self._w.items()

    def pairs(self) -> list[tuple[int, int]]:
        return list(self._w)

    def neighbors(self, i: int) -> dict[int, float]:
        return self._adj[i]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self._adj], dtype=int)

    def copy(self) -> "WeightedNetwork":
        return WeightedNetwork(self.n_nodes, dict(self._w))

    def to_sparse(self) -> sp.csr_matrix:
        """Symmetric CSR matrix of weights."""
        if not self._w:
            return sp.csr_matrix((self.n_nodes, self.n_nodes))
        ij = np.array(list(self._w.keys()), dtype=np.int64)
        v = np.fromiter(self._w.values(), dtype=float, count=len(self._w))
        rows = np.concatenate([ij[:, 0], ij[:, 1]])
        cols = np.concatenate([ij[:, 1], ij[:, 0]])
        return sp.csr_matrix((np.concatenate([v, v]), (rows, cols)),
                             shape=(self.n_nodes, self.n_nodes))

    def to_dense(self) -> np.ndarray:
        W = np.zeros((self.n_nodes, self.n_nodes))
        for (i, j), w in self._w.items():
            W[i, j] = W[j, i] = w
        return W

    @classmethod
    def from_dense(cls, W: np.ndarray) -> "WeightedNetwork":
        W = np.asarray(W)
        n = W.shape[0]
        iu, ju = np.nonzero(np.triu(W, 1))
        return cls(n, {(int(i), int(j)): float(W[i, j]) for i, j in zip(iu, ju)})

    def __eq__(self, other):
        return (isinstance(other, WeightedNetwork) and self.n_nodes == other.n_nodes
                and self._w == other._w)

    def __repr__(self):
        return f"WeightedNetwork(N={self.n_nodes}, E={self.n_edges})"


class Categories:
    """Sorted set of distinct category values with positive occupation counts.

    Used both for edge-weight categories (zero excluded) and for node-field
    categories (zero allowed).
    """

    def __init__(self, delta: float = 1e-8, lam: float = 1.0, allow_zero: bool = False):
        if delta <= 0 or lam <= 0:
            raise ValueError("delta and lambda must be strictly positive")
        self.delta = float(delta)
        self.lam = float(lam)
        self.allow_zero = allow_zero
        self.values: list[float] = []
        self.counts: dict[float, int] = {}

    def __len__(self):
        return len(self.values)

    def __contains__(self, v):
        return v in self.counts

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def count_list(self) -> list[int]:
        return [self.counts[v] for v in self.values]

    def create(self, v: float) -> float:
        """Register a new (empty) category; the value is snapped to the grid."""
        v = snap(v, self.delta)
        if v == 0 and not self.allow_zero:
            raise UnknownCategoryError("zero is not a valid weight category")
        if v not in self.counts:
            bisect.insort(self.values, v)
            self.counts[v] = 0
        return v

    def add(self, v: float, n: int = 1):
        if v not in self.counts:
            raise UnknownCategoryError(f"no category with value {v!r}")
        self.counts[v] += n

    def remove(self, v: float, n: int = 1):
        c = self.counts[v] - n
        if c < 0:
            raise ValueError(f"category {v!r} count would become negative")
        self.counts[v] = c
        if c == 0:
            self.drop(v)

    def drop(self, v: float):
        del self.counts[v]
        self.values.pop(bisect.bisect_left(self.values, v))

    def prune(self):
        for v in [v for v, c in self.counts.items() if c == 0]:
            self.drop(v)

    def rename(self, old: float, new: float):
        """Move all members of ``old`` onto value ``new`` (which must be vacant)."""
        n = self.counts[old]
        self.drop(old)
        new = self.create(new)
        self.counts[new] += n
        return new

    def copy(self) -> "Categories":
        c = Categories(self.delta, self.lam, self.allow_zero)
        c.values = list(self.values)
        c.counts = dict(self.counts)
        return c

    def __repr__(self):
        return f"Categories({list(zip(self.values, self.count_list()))})"


class WeightCategories(Categories):
    def __init__(self, delta: float = 1e-8, lam: float = 1.0):
        super().__init__(delta, lam, allow_zero=False)


def set_entry(net: WeightedNetwork, cats: Categories, i: int, j: int, w: float) -> float:
    """Set ``W_ij = w`` keeping category counts in sync.

    A nonzero ``w`` must already be a category value. Categories left empty by
    the update are deleted. Returns the previous weight.
    """
    if i == j:
        raise SelfLoopError(f"self-loop ({i}, {i}) is not allowed")
    old = net.weight(i, j)
    if w == old:
        return old
    if w != 0 and w not in cats:
        raise UnknownCategoryError(f"no category with value {w!r}")
    if w != 0:
        cats.add(w)
    if old != 0:
        cats.remove(old)
    net.set(i, j, w)
    return old


def binarize(net: WeightedNetwork) -> sp.csr_matrix:
    """Adjacency mask with 1 wherever ``|W_ij| > 0``."""
    A = net.to_sparse()
    A.data = (np.abs(A.data) > 0).astype(np.int8)
    A.eliminate_zeros()
    return A.astype(np.int8)


def recount(net: WeightedNetwork) -> dict[float, int]:
    counts: dict[float, int] = {}
    for _, w in net.edges():
        counts[w] = counts.get(w, 0) + 1
    return counts


def check_invariants(net: WeightedNetwork, cats: Categories):
    """Raise ``AssertionError`` if the network and its categories disagree."""
    counts = recount(net)
    assert counts == cats.counts, (counts, cats.counts)
    assert cats.values == sorted(counts), "category values not sorted"
    assert all(c >= 1 for c in counts.values())
    for (i, j), w in net.edges():
        assert i < j and w != 0
        assert on_grid(w, cats.delta), f"weight {w} off the delta grid"
    n = net.n_nodes
    assert net.n_edges <= n * (n - 1) // 2


class NodeFields:
    """Per-node fields ``theta`` tied to categories that may include zero."""

    def __init__(self, n_nodes: int, delta: float = 1e-8, lam: float = 1.0,
                 theta=None):
        self.cats = Categories(delta, lam, allow_zero=True)
        self.theta = np.zeros(n_nodes)
        if theta is None:
            theta = np.zeros(n_nodes)
        for i, t in enumerate(theta):
            t = self.cats.create(t)
            self.cats.add(t)
            self.theta[i] = t

    @property
    def n_nodes(self) -> int:
        return len(self.theta)

    def set(self, i: int, value: float) -> float:
        old = float(self.theta[i])
        if value == old:
            return old
        if value not in self.cats:
            raise UnknownCategoryError(f"no field category with value {value!r}")
        self.cats.add(value)
        self.cats.remove(old)
        self.theta[i] = value
        return old

    def copy(self) -> "NodeFields":
        f = NodeFields.__new__(NodeFields)
        f.cats = self.cats.copy()
        f.theta = self.theta.copy()
        return f

    def check(self):
        counts: dict[float, int] = {}
        for t in self.theta:
            counts[float(t)] = counts.get(float(t), 0) + 1
        assert counts == self.cats.counts, (counts, self.cats.counts)


ALPHABETS = {"binary": frozenset((-1, 1)), "zero_valued": frozenset((-1, 0, 1))}


@dataclass
class Dataset:
    """``N x M`` matrix of node states, either i.i.d. samples or a trajectory."""

    states: np.ndarray
    kind: str = "iid"
    alphabet: str = "binary"
    labels: list[str] | None = field(default=None, repr=False)

    def __post_init__(self):
        X = np.asarray(self.states)
        if X.ndim != 2:
            raise DataError("states must be a 2-d (nodes x samples) array")
        if self.kind not in ("iid", "markov"):
            raise DataError(f"unknown dataset kind {self.kind!r}")
        if self.alphabet not in ALPHABETS:
            raise DataError(f"unknown alphabet {self.alphabet!r}")
        allowed = np.array(sorted(ALPHABETS[self.alphabet]))
        bad = ~np.isin(X, allowed)
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise DataError(f"value {X[r, c]} at node {r}, sample {c} is outside "
                            f"the {self.alphabet} alphabet")
        self.states = X.astype(np.int8)

    @property
    def n_nodes(self) -> int:
        return self.states.shape[0]

    @property
    def n_samples(self) -> int:
        return self.states.shape[1]

    @property
    def n_units(self) -> int:
        """Number of likelihood terms: samples, or transitions for a trajectory."""
        if self.kind == "markov":
            return max(self.n_samples - 1, 0)
        return self.n_samples

    def pairs(self, units=None, transitions: bool | None = None
              ) -> tuple[np.ndarray, np.ndarray]:
        """(inputs, targets) float arrays over the selected likelihood units.

        For a trajectory the inputs are the states at ``t`` and the targets the
        states at ``t + 1``; for i.i.d. samples both are the samples.
        """
        X = self.states.astype(float)
        if transitions is None:
            transitions = self.kind == "markov"
        if transitions:
            inp, tgt = X[:, :-1], X[:, 1:]
        else:
            inp = tgt = X
        if units is not None:
            inp, tgt = inp[:, units], tgt[:, units]
        return np.ascontiguousarray(inp), np.ascontiguousarray(tgt)
