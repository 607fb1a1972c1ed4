"""MDL network reconstruction by greedy local search.

Starting from an empty network, the description length is reduced by edge
updates on a candidate set, edge moves, endpoint swaps, category value
updates and merge-split moves on the weight categories (and the mirrored
moves on the node-field categories), until a full round no longer improves.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graph_state import (Dataset, NodeFields, WeightCategories, WeightedNetwork,
                          check_invariants, snap)
from .models import ModelState
from .prior import PriorHyper, optimize_lambda, theta_dl, weights_dl
from .report import RunReport

ACCEPT_EPS = 1e-10

log = logging.getLogger(__name__)


@dataclass
class OptimizerConfig:
    kappa: float = 1.0
    bisection_iters: int = 40
    sweep_order: str = "shuffled"
    tol_nats: float = 1e-6
    max_sweeps: int = 200
    seed: int | None = 0
    candidate_mode: str = "exact"
    w_range: tuple = (-10.0, 10.0)
    theta_range: tuple = (-10.0, 10.0)
    # rounds without improvement before stopping
    patience: int = 2
    split_iters: int = 4
    nnd_list_len: int | None = None
    nnd_rounds: int = 20
    swap_proposals: int | None = None
    optimize_lambda: bool = False
    check_invariants: bool = False

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not self.tol_nats > 0:
            raise ValueError("tol_nats must be positive")
        if self.candidate_mode not in ("exact", "nndescent", "nnd"):
            raise ValueError(f"unknown candidate mode {self.candidate_mode!r}")
        if self.sweep_order not in ("fixed", "shuffled"):
            raise ValueError(f"unknown sweep order {self.sweep_order!r}")


@dataclass
class CandidateSet:
    """Zero-valued candidate pairs plus the currently nonzero pairs."""

    zero_pairs: list
    nonzero_pairs: list
    scores: dict = field(default_factory=dict, repr=False)

    @property
    def pairs(self) -> list:
        return list(self.zero_pairs) + list(self.nonzero_pairs)

    def __len__(self):
        return len(self.zero_pairs) + len(self.nonzero_pairs)


# -- random bisection -----------------------------------------------------------


def random_bisection(objective, lo: float, hi: float, iters: int = 40, rng=None,
                     x0: float | None = None, xtol: float | None = None) -> float:
    """Maximise ``objective`` on ``[lo, hi]`` by bisection with random midpoints.

    A bracket and its best interior point are kept; each step samples a point
    uniformly in the bracket and discards the side that cannot contain the
    maximum of a unimodal function. When the bracket collapses below ``xtol``
    the search restarts on the full interval from the best point, so that
    other modes keep being sampled. Returns the best point seen.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    rng = np.random.default_rng(rng)
    if xtol is None:
        xtol = 1e-9 * (hi - lo)
    a, b = lo, hi
    c = rng.uniform(a, b) if x0 is None else float(min(max(x0, lo), hi))
    fc = objective(c)
    for _ in range(iters - 1):
        if b - a < xtol:
            a, b = lo, hi
        d = rng.uniform(a, b)
        fd = objective(d)
        if fd > fc:
            if d < c:
                b = c
            else:
                a = c
            c, fc = d, fd
        elif d < c:
            a = d
        else:
            b = d
    return c


def random_bisection_index(objective, n: int, iters: int = 40, rng=None,
                           start: int | None = None) -> int:
    """Discrete version of :func:`random_bisection` over ``range(n)``."""
    rng = np.random.default_rng(rng)
    if n <= 0:
        raise ValueError("empty search range")
    cache: dict[int, float] = {}

    def f(k):
        if k not in cache:
            cache[k] = objective(k)
        return cache[k]

    a, b = 0, n - 1
    c = int(rng.integers(n)) if start is None else start
    fc = f(c)
    while b > a and len(cache) < iters:
        d = int(rng.integers(a, b))
        if d >= c:
            d += 1
        fd = f(d)
        if fd > fc:
            if d < c:
                b = c - 1
            else:
                a = c + 1
            c, fc = d, fd
        elif d < c:
            a = d + 1
        else:
            b = d - 1
    return c


# -- categorical parameter systems -------------------------------------------------


class _EdgeWeights:
    """Edge weights ``W_ij`` clustered in nonzero categories (0 = absent)."""

    name = "weights"
    null_is_absent = True

    def __init__(self, search: "MDLSearch"):
        self.search = search

    @property
    def state(self):
        return self.search.state

    @property
    def cats(self):
        return self.search.state.wcats

    @property
    def bounds(self):
        return self.search.cfg.w_range

    def value(self, item) -> float:
        return self.state.net.weight(*item)

    def prior(self, counts: dict) -> float:
        h = self.search.hyper
        return weights_dl(sum(counts.values()), list(counts.values()),
                          float(sum(abs(v) for v in counts)), self.state.n_nodes,
                          h.lam, h.delta)

    def delta_ll(self, item, new) -> float:
        return self.state.delta_loglik_edge(item[0], item[1], new)

    def apply(self, changes):
        self.state.apply_entries([(i, j, w) for (i, j), w in changes])

    def members(self) -> dict:
        out: dict = {v: [] for v in self.cats.values}
        for p, w in self.state.net.edges():
            out[w].append(p)
        return out

    def direction(self, items):
        st = self.state
        ij = np.array(items, dtype=np.int64).reshape(-1, 2)
        n = st.n_nodes
        ones = np.ones(len(ij))
        B = sp.csr_matrix((np.concatenate([ones, ones]),
                           (np.concatenate([ij[:, 0], ij[:, 1]]),
                            np.concatenate([ij[:, 1], ij[:, 0]]))), shape=(n, n))
        rows = np.unique(ij)
        return rows, np.asarray(B[rows] @ st.inputs)


class _NodeFields:
    """Node fields ``theta_i`` clustered in categories that may include 0."""

    name = "fields"
    null_is_absent = False

    def __init__(self, search: "MDLSearch"):
        self.search = search

    @property
    def state(self):
        return self.search.state

    @property
    def cats(self):
        return self.search.state.fields.cats

    @property
    def bounds(self):
        return self.search.cfg.theta_range

    def value(self, item) -> float:
        return float(self.state.fields.theta[item])

    def prior(self, counts: dict) -> float:
        h = self.search.hyper
        return theta_dl(self.state.n_nodes, list(counts.values()), list(counts),
                        h.lam_theta, h.delta_theta)

    def delta_ll(self, item, new) -> float:
        return self.state.delta_loglik_theta(item, new)

    def apply(self, changes):
        self.state.apply_thetas(changes)

    def members(self) -> dict:
        out: dict = {v: [] for v in self.cats.values}
        for i, t in enumerate(self.state.fields.theta):
            out[float(t)].append(i)
        return out

    def direction(self, items):
        rows = np.array(sorted(items), dtype=int)
        return rows, np.ones((len(rows), self.state.n_units))


def _moved_counts(counts: dict, old, new, null_is_absent: bool) -> dict:
    c = dict(counts)
    if not (null_is_absent and old == 0):
        c[old] -= 1
        if c[old] == 0:
            del c[old]
    if not (null_is_absent and new == 0):
        c[new] = c.get(new, 0) + 1
    return c


class MDLSearch:
    """Mutable optimisation context: model state, hyperparameters, RNG and the
    running description length."""

    def __init__(self, state: ModelState, hyper: PriorHyper | None = None,
                 cfg: OptimizerConfig | None = None, rng=None):
        self.state = state
        self.hyper = hyper or PriorHyper()
        self.cfg = cfg or OptimizerConfig()
        self.rng = np.random.default_rng(self.cfg.seed if rng is None else rng)
        if state.wcats is None:
            state.wcats = WeightCategories(self.hyper.delta, self.hyper.lam)
        self.weights = _EdgeWeights(self)
        self.fields = _NodeFields(self)
        self.refresh_dl()

    def prior_weights(self) -> float:
        return self.weights.prior(self.state.wcats.counts)

    def prior_fields(self) -> float:
        return self.fields.prior(self.state.fields.cats.counts)

    def refresh_dl(self) -> float:
        self.dl = -self.state.loglik() + self.prior_weights() + self.prior_fields()
        return self.dl

    def log_posterior(self) -> float:
        return -self.dl

    # -- helpers -------------------------------------------------------------

    def item_ddl(self, system, item, old, new) -> float:
        if new == old:
            return 0.0
        counts = system.cats.counts
        dp = (system.prior(_moved_counts(counts, old, new, system.null_is_absent))
              - system.prior(counts))
        return -system.delta_ll(item, new) + dp

    def _commit(self, system, changes):
        for _, v in changes:
            if not (system.null_is_absent and v == 0) and v not in system.cats:
                system.cats.create(v)
        system.apply(changes)
        self.refresh_dl()

    def _valid_new(self, system, v, allow_existing=False) -> bool:
        if system.null_is_absent and v == 0:
            return False
        if not allow_existing and v in system.cats:
            return False
        lo, hi = system.bounds
        return lo <= v <= hi


# -- candidate search ----------------------------------------------------------------


def _insertion_values(search: MDLSearch):
    vals = search.state.wcats.values
    pos = [v for v in vals if v > 0]
    neg = [v for v in vals if v < 0]
    if pos and neg:
        return [min(pos), max(neg)]
    if pos:
        return [min(pos)]
    return [max(neg)]


def score_pair(search: MDLSearch, i: int, j: int) -> float:
    """Ranking score of a zero-valued pair.

    With categories present, the best log-posterior reachable by inserting the
    smallest-magnitude positive or negative category value; otherwise the
    magnitude of the log-likelihood gradient.
    """
    st = search.state
    if len(st.wcats) == 0:
        return abs(st.grad_entry(i, j))
    best = -math.inf
    for v in _insertion_values(search):
        best = max(best, -(search.dl + search.item_ddl(search.weights, (i, j), 0.0, v)))
    return best


def score_matrix(search: MDLSearch) -> np.ndarray:
    """Scores of :func:`score_pair` for all pairs at once (nonzero pairs and the
    diagonal are set to ``-inf``)."""
    st = search.state
    n = st.n_nodes
    if len(st.wcats) == 0:
        Sc = np.abs(st.grad_matrix())
    else:
        Sc = np.full((n, n), -np.inf)
        counts = st.wcats.counts
        p0 = search.weights.prior(counts)
        for v in _insertion_values(search):
            dp = search.weights.prior(_moved_counts(counts, 0.0, v, True)) - p0
            Sc = np.maximum(Sc, -search.dl + st.insertion_delta_matrix(v) - dp)
    np.fill_diagonal(Sc, -np.inf)
    for (i, j), _ in st.net.edges():
        Sc[i, j] = Sc[j, i] = -np.inf
    return Sc


def _n_candidates(search, kappa) -> int:
    return int(math.ceil(kappa * search.state.n_nodes))


def candidate_search_exact(search: MDLSearch, kappa: float | None = None) -> CandidateSet:
    """Exact top-``ceil(kappa N)`` zero pairs by score, plus all nonzero pairs."""
    kappa = search.cfg.kappa if kappa is None else kappa
    st = search.state
    n = st.n_nodes
    nonzero = st.net.pairs()
    if n < 2:
        return CandidateSet([], nonzero)
    Sc = score_matrix(search)
    iu, ju = np.triu_indices(n, 1)
    s = Sc[iu, ju]
    ok = np.isfinite(s)
    iu, ju, s = iu[ok], ju[ok], s[ok]
    k = min(_n_candidates(search, kappa), len(s))
    # stable ordering: score descending, then pair index
    order = np.lexsort((np.arange(len(s)), -s))[:k]
    zero = [(int(iu[t]), int(ju[t])) for t in order]
    return CandidateSet(zero, nonzero, {p: float(s[t]) for p, t in zip(zero, order)})


def candidate_search_nnd(search: MDLSearch, kappa: float | None = None,
                         rounds: int | None = None, list_len: int | None = None,
                         rng=None) -> CandidateSet:
    """Approximate top-``ceil(kappa N)`` zero pairs by neighbour-of-neighbour
    search over per-node candidate lists."""
    kappa = search.cfg.kappa if kappa is None else kappa
    rounds = search.cfg.nnd_rounds if rounds is None else rounds
    rng = search.rng if rng is None else np.random.default_rng(rng)
    st = search.state
    n = st.n_nodes
    nonzero = st.net.pairs()
    if n < 2:
        return CandidateSet([], nonzero)
    L = list_len or search.cfg.nnd_list_len or int(2 * kappa + 8)
    L = min(L, n - 1)
    scores: dict = {}

    def sc(i, j):
        p = (i, j) if i < j else (j, i)
        if p not in scores:
            scores[p] = (-math.inf if st.net.weight(*p) != 0
                         else score_pair(search, *p))
        return scores[p]

    lists = []
    for i in range(n):
        others = rng.choice(n - 1, size=L, replace=False)
        others = others + (others >= i)
        lists.append({int(j): sc(i, int(j)) for j in others})

    def offer(i, j):
        if j == i or j in lists[i]:
            return 0
        s = sc(i, j)
        worst = min(lists[i], key=lambda k: (lists[i][k], k))
        if s > lists[i][worst]:
            del lists[i][worst]
            lists[i][j] = s
            return 1
        return 0

    for _ in range(rounds):
        updates = 0
        for i in range(n):
            for j in list(lists[i]):
                for k in list(lists[j]):
                    updates += offer(i, k)
                    updates += offer(k, i)
            r = int(rng.integers(n - 1))
            r += r >= i
            updates += offer(i, r)
        if updates < 0.01 * n * L:
            break
    pool = {}
    for i in range(n):
        for j, s in lists[i].items():
            p = (i, j) if i < j else (j, i)
            if np.isfinite(s):
                pool[p] = s
    ranked = sorted(pool.items(), key=lambda kv: (-kv[1], kv[0]))
    zero = [p for p, _ in ranked[:_n_candidates(search, kappa)]]
    return CandidateSet(zero, nonzero, dict(ranked[:len(zero)]))


def candidate_search(search: MDLSearch) -> CandidateSet:
    if search.cfg.candidate_mode == "exact":
        return candidate_search_exact(search)
    return candidate_search_nnd(search)


# -- single-item updates ----------------------------------------------------------------


def _update_item(search: MDLSearch, system, item) -> bool:
    rng, cfg = search.rng, search.cfg
    old = system.value(item)
    options = []
    if len(system.cats):
        options.append("cat")
    options.append("new")
    if system.null_is_absent and old != 0:
        options.append("zero")
    opt = options[int(rng.integers(len(options)))]
    if opt == "cat":
        vals = list(system.cats.values)
        k = random_bisection_index(lambda k: -search.item_ddl(system, item, old, vals[k]),
                                   len(vals), cfg.bisection_iters, rng)
        new = vals[k]
    elif opt == "new":
        lo, hi = system.bounds
        x = random_bisection(lambda w: -search.item_ddl(system, item, old, w),
                             lo, hi, cfg.bisection_iters, rng)
        new = snap(x, system.cats.delta)
        if not search._valid_new(system, new, allow_existing=True):
            return False
    else:
        new = 0.0
    if new == old:
        return False
    if search.item_ddl(system, item, old, new) < -ACCEPT_EPS:
        search._commit(system, [(item, new)])
        return True
    return False


def edge_update_sweep(search: MDLSearch, cands: CandidateSet) -> int:
    """Visit every candidate pair once, proposing a category value, a new
    value or removal; keep the proposal only if the description length drops."""
    pairs = cands.pairs
    order = search.rng.permutation(len(pairs)) if search.cfg.sweep_order == "shuffled" \
        else range(len(pairs))
    return sum(_update_item(search, search.weights, pairs[t]) for t in order)


def theta_update_sweep(search: MDLSearch) -> int:
    n = search.state.n_nodes
    order = search.rng.permutation(n) if search.cfg.sweep_order == "shuffled" else range(n)
    return sum(_update_item(search, search.fields, int(i)) for i in order)


def edge_move_sweep(search: MDLSearch, cands: CandidateSet) -> int:
    """Relocate one edge per node onto a zero-valued candidate pair sharing
    that node. Counts and categories are unchanged, so only the likelihood
    decides."""
    st, rng = search.state, search.rng
    by_node: dict[int, list] = {}
    for i, j in cands.pairs:
        by_node.setdefault(i, []).append((i, j))
        by_node.setdefault(j, []).append((i, j))
    nodes = [i for i in range(st.n_nodes) if st.net.degree(i) > 0]
    rng.shuffle(nodes)
    accepted = 0
    for i in nodes:
        nbrs = list(st.net.neighbors(i))
        if not nbrs:
            continue
        zeros = [p for p in by_node.get(i, []) if st.net.weight(*p) == 0]
        if not zeros:
            continue
        j = nbrs[int(rng.integers(len(nbrs)))]
        a, b = zeros[int(rng.integers(len(zeros)))]
        u = b if a == i else a
        w = st.net.weight(i, j)
        dll = st.delta_loglik_multi([(i, j, -w), (i, u, w)])
        if dll > ACCEPT_EPS:
            st.apply_entries([(i, u, w), (i, j, 0.0)])
            search.refresh_dl()
            accepted += 1
    return accepted


def edge_swap_sweep(search: MDLSearch, n_proposals: int | None = None) -> int:
    """Double-edge swaps ``(i,j),(u,v) -> (i,v),(u,j)``, preserving degrees and
    the multiset of weights."""
    st, rng = search.state, search.rng
    edges = st.net.pairs()
    if len(edges) < 2:
        return 0
    if n_proposals is None:
        n_proposals = search.cfg.swap_proposals or len(edges)
    accepted = 0
    for _ in range(n_proposals):
        e1, e2 = rng.choice(len(edges), size=2, replace=False)
        i, j = edges[e1]
        u, v = edges[e2]
        if rng.random() < 0.5:
            i, j = j, i
        if rng.random() < 0.5:
            u, v = v, u
        if len({i, j, u, v}) < 4:
            continue
        w_ij, w_uv = st.net.weight(i, j), st.net.weight(u, v)
        w_iv, w_uj = st.net.weight(i, v), st.net.weight(u, j)
        if (w_iv == 0) != (w_uj == 0):
            continue
        changes = [(i, v, w_ij), (i, j, w_iv), (u, j, w_uv), (u, v, w_uj)]
        incs = [(a, b, new - st.net.weight(a, b)) for a, b, new in changes]
        dll = st.delta_loglik_multi(incs)
        if dll > ACCEPT_EPS:
            st.apply_entries(changes)
            search.refresh_dl()
            edges = st.net.pairs()
            accepted += 1
    return accepted


# -- category moves ------------------------------------------------------------------------


def _update_category_value(search: MDLSearch, system, v, items, bounds=None,
                           iters: int | None = None) -> float:
    """Random-bisection update of category value ``v`` (members move together).
    Returns the resulting value (``v`` if unchanged)."""
    if v not in system.cats or not items:
        return v
    rows, D = system.direction(items)
    counts = system.cats.counts
    p0 = system.prior(counts)
    rest = {k: c for k, c in counts.items() if k != v}
    n = counts[v]

    def ddl(x):
        c = dict(rest)
        c[x] = c.get(x, 0) + n
        return -search.state.bulk_delta(rows, D, x - v) + system.prior(c) - p0

    lo, hi = bounds or system.bounds
    x = random_bisection(lambda x: -ddl(x), lo, hi, iters or search.cfg.bisection_iters,
                         search.rng, x0=v)
    x = snap(x, system.cats.delta)
    if x == v or not search._valid_new(system, x):
        return v
    if ddl(x) < -ACCEPT_EPS:
        search._commit(system, [(it, x) for it in items])
        return x
    return v


def category_value_sweep(search: MDLSearch, system=None) -> int:
    system = system or search.weights
    members = system.members()
    vals = list(system.cats.values)
    if search.cfg.sweep_order == "shuffled":
        search.rng.shuffle(vals)
    accepted = 0
    for v in vals:
        new = _update_category_value(search, system, v, members.get(v, []))
        if new != v:
            members[new] = members.pop(v)
            accepted += 1
    return accepted


def _merge(search: MDLSearch, system, va, vb, force: bool) -> float | None:
    """Merge categories ``va`` and ``vb`` into one bisection-optimised value."""
    members = system.members()
    ia, ib = members[va], members[vb]
    rows_a, Da = system.direction(ia)
    rows_b, Db = system.direction(ib)
    rows = np.union1d(rows_a, rows_b)
    A = np.zeros((len(rows), search.state.n_units))
    B = np.zeros_like(A)
    A[np.searchsorted(rows, rows_a)] = Da
    B[np.searchsorted(rows, rows_b)] = Db
    counts = system.cats.counts
    p0 = system.prior(counts)
    rest = {k: c for k, c in counts.items() if k not in (va, vb)}
    n = counts[va] + counts[vb]
    st = search.state

    def ddl(x):
        c = dict(rest)
        c[x] = c.get(x, 0) + n
        return (-st.bulk_delta(rows, (x - va) * A + (x - vb) * B, 1.0)
                + system.prior(c) - p0)

    lo, hi = min(va, vb), max(va, vb)
    big = va if counts[va] >= counts[vb] else vb
    x = random_bisection(lambda x: -ddl(x), lo, hi, search.cfg.bisection_iters,
                         search.rng, x0=big)
    x = snap(x, system.cats.delta)
    if not search._valid_new(system, x, allow_existing=True) or \
            (x in system.cats and x not in (va, vb)):
        return None
    if force or ddl(x) < -ACCEPT_EPS:
        search._commit(system, [(it, x) for it in ia + ib])
        return x
    return None


def _split_range(system, v):
    vals = system.cats.values
    k = vals.index(v)
    w = abs(v) if v != 0 else 1.0
    lo = vals[k - 1] if k > 0 else v - w
    hi = vals[k + 1] if k + 1 < len(vals) else v + w
    return lo, hi


def _split(search: MDLSearch, system, v) -> bool:
    """Split category ``v`` in two, refining assignments and values by
    alternating greedy reassignment and bisection. Always applied; callers
    decide acceptance."""
    rng, cfg = search.rng, search.cfg
    items = system.members()[v]
    if len(items) < 2:
        return False
    lo, hi = _split_range(system, v)
    for _ in range(10):
        a, b = (snap(x, system.cats.delta) for x in rng.uniform(lo, hi, size=2))
        if a != b and all(search._valid_new(system, x) or x == v for x in (a, b)):
            break
    else:
        return False
    side = rng.random(len(items)) < 0.5
    if side.all() or not side.any():
        side[int(rng.integers(len(items)))] ^= True
    search._commit(system, [(it, a if s else b) for it, s in zip(items, side)])
    for _ in range(cfg.split_iters):
        moved = 0
        for t in rng.permutation(len(items)):
            it = items[t]
            cur = system.value(it)
            other = b if cur == a else a
            if system.cats.counts[cur] > 1 and \
                    search.item_ddl(system, it, cur, other) < -ACCEPT_EPS:
                search._commit(system, [(it, other)])
                moved += 1
        members = system.members()
        # local refinement; the full-range value sweep polishes later
        iters = max(10, cfg.bisection_iters // 2)
        na = _update_category_value(search, system, a, members[a], (lo, hi), iters)
        nb = _update_category_value(search, system, b, members[b], (lo, hi), iters)
        changed = (na != a) or (nb != b)
        a, b = na, nb
        if not moved and not changed:
            break
    return True


def merge_split_sweep(search: MDLSearch, system=None, n_proposals: int | None = None) -> int:
    """Merge, split and merge-split proposals on the category assignment."""
    system = system or search.weights
    rng = search.rng
    if n_proposals is None:
        n_proposals = max(1, len(system.cats))
    accepted = 0
    for _ in range(n_proposals):
        K = len(system.cats)
        if K == 0:
            break
        moves = ["split"]
        if K >= 2:
            moves += ["merge", "merge-split"]
        move = moves[int(rng.integers(len(moves)))]
        dl0 = search.dl
        saved = search.state.snapshot()
        vals = list(system.cats.values)
        if move == "split":
            v = vals[int(rng.integers(K))]
            ok = _split(search, system, v)
        else:
            ka, kb = rng.choice(K, size=2, replace=False)
            x = _merge(search, system, vals[ka], vals[kb], force=(move == "merge-split"))
            ok = x is not None
            if ok and move == "merge-split":
                ok = _split(search, system, x)
        if ok and search.dl < dl0 - ACCEPT_EPS:
            accepted += 1
        else:
            search.state.restore(saved)
            search.refresh_dl()
    return accepted


# -- driver -----------------------------------------------------------------------------------


def _new_state(data, model, zero_valued, hyper):
    return ModelState(data, model, zero_valued,
                      net=WeightedNetwork(data.n_nodes),
                      fields=NodeFields(data.n_nodes, hyper.delta_theta, hyper.lam_theta),
                      wcats=WeightCategories(hyper.delta, hyper.lam))


def _report(search: MDLSearch, method, sweeps, acc, traj, converged, t0, warnings):
    st, h = search.state, search.hyper
    return RunReport(
        method=method, n_nodes=st.n_nodes, description_length=search.dl,
        loglik=st.loglik(), E=st.net.n_edges, K=len(st.wcats),
        categories=[(v, st.wcats.counts[v]) for v in st.wcats.values],
        theta_categories=[(u, st.fields.cats.counts[u]) for u in st.fields.cats.values],
        lam=h.lam, delta=h.delta, lam_theta=h.lam_theta, delta_theta=h.delta_theta,
        sweeps=sweeps, acceptance=acc, dl_trajectory=traj, converged=converged,
        wall_time=time.perf_counter() - t0, seed=search.cfg.seed,
        w_range=tuple(search.cfg.w_range), warnings=warnings)


def run_rounds(search: MDLSearch, method: str = "mdl"):
    """Run optimisation rounds on ``search`` until convergence."""
    cfg, rng = search.cfg, search.rng
    t0 = time.perf_counter()
    acc = {k: 0 for k in ("edge_update", "edge_move", "edge_swap", "category_value",
                          "merge_split", "theta_update", "theta_category_value",
                          "theta_merge_split")}
    traj = [search.dl]
    warnings = []
    converged = False
    stalls = 0
    sweeps = 0
    for sweeps in range(1, cfg.max_sweeps + 1):
        dl0 = search.dl
        cands = candidate_search(search)
        steps = {
            "edge_update": lambda: edge_update_sweep(search, cands),
            "edge_move": lambda: edge_move_sweep(search, cands),
            "edge_swap": lambda: edge_swap_sweep(search),
            "category_value": lambda: category_value_sweep(search, search.weights),
            "merge_split": lambda: merge_split_sweep(search, search.weights),
            "theta_update": lambda: theta_update_sweep(search),
            "theta_category_value": lambda: category_value_sweep(search, search.fields),
            "theta_merge_split": lambda: merge_split_sweep(search, search.fields),
        }
        names = list(steps)
        if cfg.sweep_order == "shuffled":
            rng.shuffle(names)
        for name in names:
            acc[name] += steps[name]()
            if cfg.check_invariants:
                check_invariants(search.state.net, search.state.wcats)
                search.state.fields.check()
        if cfg.optimize_lambda and len(search.state.wcats):
            new = optimize_lambda(search.state, search.hyper)
            old_dl = search.dl
            prev = search.hyper
            search.hyper = new
            if search.refresh_dl() > old_dl:
                search.hyper = prev
                search.refresh_dl()
        traj.append(search.dl)
        log.info("round %d: DL %.6f, E %d, K %d, %.1fs", sweeps, search.dl,
                 search.state.net.n_edges, len(search.state.wcats), time.perf_counter() - t0)
        if dl0 - search.dl < cfg.tol_nats:
            stalls += 1
            if stalls >= cfg.patience:
                converged = True
                break
        else:
            stalls = 0
    if not converged:
        warnings.append(f"no convergence after {cfg.max_sweeps} rounds")
    lo, hi = cfg.w_range
    if any(abs(v) >= 0.999 * max(abs(lo), abs(hi)) for v in search.state.wcats.values):
        warnings.append("a weight category sits at the edge of the allowed interval")
    return _report(search, method, sweeps, acc, traj, converged, t0, warnings)


def reconstruct_mdl(data: Dataset, model: str = "kinetic", zero_valued: bool = False,
                    hyper: PriorHyper | None = None, cfg: OptimizerConfig | None = None):
    """MAP reconstruction under the MDL prior.

    Returns
    -------
    net : WeightedNetwork
    fields : NodeFields
    report : RunReport
    """
    hyper = hyper or PriorHyper()
    cfg = cfg or OptimizerConfig()
    state = _new_state(data, model, zero_valued, hyper)
    search = MDLSearch(state, hyper, cfg)
    report = run_rounds(search)
    state.recompute()
    search.refresh_dl()
    report.description_length = search.dl
    report.loglik = state.loglik()
    return state.net, state.fields, report
