"""Synthetic data: kinetic trajectories, equilibrium Metropolis samples with
convergence diagnostics, planted weights, and clamping perturbations."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri
from scipy.stats import rankdata

from .graph_state import Dataset, NodeFields, WeightedNetwork


def _theta(fields, n):
    if fields is None:
        return np.zeros(n)
    if isinstance(fields, NodeFields):
        return fields.theta.astype(float)
    return np.asarray(fields, dtype=float)


def _alphabet(zero_valued):
    return np.array([-1.0, 0.0, 1.0]) if zero_valued else np.array([-1.0, 1.0])


def _draw_local(h: np.ndarray, u: np.ndarray, zero_valued: bool) -> np.ndarray:
    """Sample ``x`` with ``P(x) ~ exp(x h)`` given uniforms ``u`` of the same shape."""
    if not zero_valued:
        p_up = 0.5 * (1.0 + np.tanh(h))
        return np.where(u < p_up, 1.0, -1.0)
    m = np.abs(h)
    # stable weights exp(-h), 1, exp(h) scaled by exp(-|h|)
    e_m = np.exp(-h - m)
    e_0 = np.exp(-m)
    e_p = np.exp(h - m)
    tot = e_m + e_0 + e_p
    return np.where(u * tot < e_m, -1.0, np.where(u * tot < e_m + e_0, 0.0, 1.0))


# -- kinetic ---------------------------------------------------------------------


def sample_kinetic(net: WeightedNetwork, fields=None, M: int = 1000, x0="random",
                   rng=None, zero_valued: bool = False) -> Dataset:
    """Trajectory of ``M`` synchronous transitions, ``P(x(t+1)|x(t)) =
    prod_i exp(x_i(t+1) s_i(t)) / Z(s_i(t))`` with ``s = W x(t) + theta``.

    Returns a Markov :class:`Dataset` with ``M + 1`` states.
    """
    if M < 1:
        raise ValueError("need at least one transition")
    rng = np.random.default_rng(rng)
    n = net.n_nodes
    W = net.to_sparse()
    th = _theta(fields, n)
    alpha = _alphabet(zero_valued)
    X = np.empty((n, M + 1))
    if isinstance(x0, str):
        if x0 != "random":
            raise ValueError(f"unknown initial state {x0!r}")
        X[:, 0] = rng.choice(alpha, n)
    else:
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (n,) or not np.isin(x0, alpha).all():
            raise ValueError("initial state outside the alphabet or of wrong length")
        X[:, 0] = x0
    U = rng.random((M, n))
    for t in range(M):
        s = W @ X[:, t] + th
        X[:, t + 1] = _draw_local(s, U[t], zero_valued)
    return Dataset(X.astype(np.int8), "markov", "zero_valued" if zero_valued else "binary")


# -- convergence diagnostics -------------------------------------------------------


def _rhat_basic(chains: np.ndarray) -> np.ndarray:
    """Classic potential scale reduction for ``chains`` of shape (C, T, ...)."""
    C, T = chains.shape[:2]
    means = chains.mean(axis=1)
    B = T * means.var(axis=0, ddof=1)
    Wv = chains.var(axis=1, ddof=1).mean(axis=0)
    var = (T - 1) / T * Wv + B / T
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.sqrt(var / Wv)
    # constant draws in every chain: nothing to mix
    const = (Wv == 0) & (B == 0)
    r = np.where(const, 1.0, r)
    return np.where(np.isnan(r), np.inf, r)


def _rank_normal(chains: np.ndarray) -> np.ndarray:
    C, T = chains.shape[:2]
    flat = chains.reshape(C * T, -1)
    r = rankdata(flat, axis=0)
    z = ndtri((r - 0.375) / (C * T + 0.25))
    return z.reshape(chains.shape)


def split_rhat(chains: np.ndarray) -> np.ndarray:
    """Rank-normalised split R-hat (max of bulk and folded versions).

    ``chains`` has shape (n_chains, n_draws) or (n_chains, n_draws, n_vars).
    """
    chains = np.asarray(chains, dtype=float)
    squeeze = chains.ndim == 2
    if squeeze:
        chains = chains[..., None]
    C, T = chains.shape[:2]
    if T < 4:
        out = np.full(chains.shape[2:], np.nan)
        return out[0] if squeeze else out
    h = T // 2
    split = np.concatenate([chains[:, :h], chains[:, T - h:]], axis=0)
    bulk = _rhat_basic(_rank_normal(split))
    med = np.median(split.reshape(-1, split.shape[2]), axis=0)
    folded = _rhat_basic(_rank_normal(np.abs(split - med)))
    out = np.maximum(bulk, folded)
    return out[0] if squeeze else out


def _autocov(x: np.ndarray) -> np.ndarray:
    T = x.shape[-1]
    n = 1 << (2 * T - 1).bit_length()
    xc = x - x.mean(axis=-1, keepdims=True)
    f = np.fft.rfft(xc, n=n, axis=-1)
    ac = np.fft.irfft(f * np.conj(f), n=n, axis=-1)[..., :T]
    return ac / T


def ess(chains: np.ndarray) -> float:
    """Effective sample size of one scalar quantity from chains (C, T), using
    the combined autocorrelation and Geyer's initial monotone sequence."""
    chains = np.asarray(chains, dtype=float)
    C, T = chains.shape
    if T < 4:
        return float(C * T)
    acov = _autocov(chains)
    var_w = acov[:, 0].mean() * T / (T - 1)
    if var_w == 0:
        return float(C * T)
    var_plus = var_w * (T - 1) / T
    if C > 1:
        var_plus += chains.mean(axis=1).var(ddof=1)
    rho = 1.0 - (var_w - acov.mean(axis=0)) / var_plus
    rho[0] = 1.0
    # pair sums, truncated at the first negative and made monotone
    tau = -1.0
    prev = math.inf
    for k in range(0, T - 1, 2):
        p = rho[k] + rho[k + 1]
        if p < 0:
            break
        p = min(p, prev)
        prev = p
        tau += 2 * p
    tau = max(tau, 1.0 / math.log10(C * T + 10))
    return float(min(C * T / tau, C * T))


@dataclass
class ChainDiagnostics:
    r_hat: np.ndarray
    ess: np.ndarray
    n_chains: int
    burn_in: int
    thin: int
    converged: bool = True
    insufficient: bool = False
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"r_hat_max": float(np.nanmax(self.r_hat)) if self.r_hat.size and
                not np.all(np.isnan(self.r_hat)) else None,
                "ess_min": float(np.min(self.ess)) if self.ess.size else None,
                "n_chains": self.n_chains, "burn_in": self.burn_in, "thin": self.thin,
                "converged": self.converged, "insufficient": self.insufficient,
                "warnings": list(self.warnings)}


# -- equilibrium Metropolis -----------------------------------------------------------


class _Metropolis:
    """Single-site Metropolis on ``P(x) ~ exp(sum_{i<j} W_ij x_i x_j + theta.x)``
    for several chains at once (one column per chain)."""

    def __init__(self, net, theta, X0, rng, zero_valued):
        self.W = net.to_sparse().tocsc()
        self.Wr = net.to_sparse()
        self.theta = theta
        self.X = X0.astype(float)
        self.rng = rng
        self.zv = zero_valued
        self.H = np.asarray(self.Wr @ self.X) + theta[:, None]
        self.accepted = 0
        self.proposed = 0

    def sweep(self):
        n, C = self.X.shape
        rng = self.rng
        U = rng.random((n, C))
        if self.zv:
            shift = rng.integers(1, 3, size=(n, C))
        W = self.W
        for i in range(n):
            x = self.X[i]
            if self.zv:
                new = ((x + 1 + shift[i]) % 3) - 1
            else:
                new = -x
            dx = new - x
            acc = np.log(U[i]) < dx * self.H[i]
            if not acc.any():
                continue
            dx = np.where(acc, dx, 0.0)
            self.X[i] = np.where(acc, new, x)
            lo, hi = W.indptr[i], W.indptr[i + 1]
            if hi > lo:
                self.H[W.indices[lo:hi]] += W.data[lo:hi, None] * dx[None, :]
            self.accepted += int(acc.sum())
        self.proposed += n * C


def sample_equilibrium(net: WeightedNetwork, fields=None, M: int = 1000, n_chains: int = 4,
                       rng=None, zero_valued: bool = False, thin: int = 1,
                       burn_in: int | None = None, batch: int = 100,
                       max_burn_in: int = 100_000, r_hat_target: float = 1.01
                       ) -> tuple[Dataset, ChainDiagnostics]:
    """Equilibrium samples by parallel single-site Metropolis chains.

    Burn-in proceeds in batches of sweeps until the split R-hat of every node,
    computed over the second half of the burn-in history, drops below
    ``r_hat_target`` (or a fixed ``burn_in`` is given). Then ``ceil(M / n_chains)``
    draws per chain are taken every ``thin`` sweeps and pooled, truncated to
    ``M`` samples.
    """
    if M < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(rng)
    n = net.n_nodes
    th = _theta(fields, n)
    alpha = _alphabet(zero_valued)
    chain = _Metropolis(net, th, rng.choice(alpha, (n, n_chains)), rng, zero_valued)
    diag_warn = []
    converged = True
    if burn_in is None:
        hist = []
        done = 0
        while True:
            for _ in range(batch):
                chain.sweep()
                hist.append(chain.X.T.copy())
            done += batch
            H = np.stack(hist[len(hist) // 2:], axis=1)  # (C, T, n)
            r = split_rhat(H) if n_chains > 1 else np.full(n, np.nan)
            if n_chains > 1 and np.all(r < r_hat_target):
                break
            if n_chains == 1 and done >= batch:
                break
            if done >= max_burn_in:
                converged = False
                diag_warn.append(f"burn-in did not reach R-hat < {r_hat_target} "
                                 f"after {done} sweeps")
                warnings.warn(diag_warn[-1])
                break
        burn_in = done
    else:
        for _ in range(burn_in):
            chain.sweep()
    per = -(-M // n_chains)
    draws = np.empty((n_chains, per, n))
    for t in range(per):
        for _ in range(thin):
            chain.sweep()
        draws[:, t] = chain.X.T
    r_hat = split_rhat(draws) if n_chains > 1 and per >= 4 else np.full(n, np.nan)
    e = np.array([ess(draws[:, :, i]) for i in range(n)])
    insufficient = n_chains < 2 or per < 4
    if insufficient:
        diag_warn.append("too few chains or draws for convergence diagnostics")
    elif np.any(r_hat >= r_hat_target):
        converged = False
        diag_warn.append("R-hat of the kept draws exceeds the target")
    samples = draws.reshape(-1, n)[:M].T
    diag = ChainDiagnostics(r_hat, e, n_chains, burn_in, thin,
                            converged and not insufficient, insufficient, diag_warn)
    data = Dataset(samples.astype(np.int8), "iid", "zero_valued" if zero_valued else "binary")
    return data, diag


def boltzmann_exact(net: WeightedNetwork, fields=None, zero_valued: bool = False):
    """All configurations and their exact probabilities (small ``N`` only)."""
    import itertools
    n = net.n_nodes
    if n > 16:
        raise ValueError("exact enumeration limited to N <= 16")
    W = net.to_dense()
    th = _theta(fields, n)
    configs = np.array(list(itertools.product(_alphabet(zero_valued), repeat=n)))
    logp = 0.5 * np.einsum("ci,ij,cj->c", configs, W, configs) + configs @ th
    logp -= logp.max()
    p = np.exp(logp)
    return configs, p / p.sum()


# -- planting -------------------------------------------------------------------------


INV_MEAN_DEGREE = "invk"


def plant_weights(edges, mean=INV_MEAN_DEGREE, sigma: float = 0.01, rng=None,
                  n_nodes: int | None = None) -> WeightedNetwork:
    """i.i.d. normal weights on the given edges.

    ``mean`` is a number or ``"invk"`` for ``1/<k> = N / (2E)``.
    """
    edges = [tuple(map(int, e)) for e in edges]
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if n_nodes is None:
        n_nodes = 1 + max((max(e) for e in edges), default=-1)
    if isinstance(mean, str):
        if mean != INV_MEAN_DEGREE:
            raise ValueError(f"unknown mean specification {mean!r}")
        if not edges:
            raise ValueError("mean 1/<k> is undefined for an empty edge list")
        mean = n_nodes / (2 * len(edges))
    rng = np.random.default_rng(rng)
    w = rng.normal(mean, sigma, size=len(edges)) if sigma > 0 else np.full(len(edges), mean)
    net = WeightedNetwork(n_nodes)
    for (i, j), v in zip(edges, w):
        if net.weight(i, j) != 0:
            raise ValueError(f"duplicate edge ({i}, {j})")
        net.set(i, j, float(v))
    return net


# -- perturbations ----------------------------------------------------------------------


@dataclass
class MCSpec:
    """Monte Carlo settings for the clamping experiment (sweeps of Glauber
    dynamics)."""

    relax_sweeps: int = 1000
    measure_sweeps: int = 2000
    n_blocks: int = 20
    x0: object = "random"
    r_hat_flag: float = 1.1


@dataclass
class PerturbationResult:
    node_j: int
    z_value: float
    marginals_before: np.ndarray
    marginals_after: np.ndarray
    mc_stderr: float
    equilibrated: bool = True
    r_hat: float = float("nan")

    def row(self) -> dict:
        return {"node": self.node_j, "z": self.z_value, "stderr": self.mc_stderr,
                "equilibrated": self.equilibrated}


class _Glauber:
    def __init__(self, net, theta, x, rng, zero_valued, clamp=None):
        self.W = net.to_sparse()
        self.theta = theta
        self.x = np.array(x, dtype=float)
        self.rng = rng
        self.zv = zero_valued
        self.clamp = clamp
        if clamp is not None:
            self.x[clamp] = -1.0

    def sweep(self):
        W, x = self.W, self.x
        u = self.rng.random(len(x))
        for i in range(len(x)):
            if i == self.clamp:
                continue
            lo, hi = W.indptr[i], W.indptr[i + 1]
            h = W.data[lo:hi] @ x[W.indices[lo:hi]] + self.theta[i]
            x[i] = _draw_local(np.array(h), np.array(u[i]), self.zv)

    def block_means(self, sweeps, n_blocks):
        n_blocks = max(1, min(n_blocks, sweeps))
        sizes = np.diff(np.linspace(0, sweeps, n_blocks + 1).astype(int))
        out = np.empty((n_blocks, len(self.x)))
        for b, s in enumerate(sizes):
            acc = np.zeros(len(self.x))
            for _ in range(s):
                self.sweep()
                acc += self.x
            out[b] = acc / max(s, 1)
        return out, sizes


def perturb_keystone(net: WeightedNetwork, fields, j: int, mc: MCSpec | None = None,
                     rng=None, zero_valued: bool = False) -> PerturbationResult:
    """Expected number of other nodes lost when node ``j`` is clamped to -1.

    An initial configuration relaxes under Glauber dynamics into a
    macrostate; marginals are then time averages of the free dynamics and of
    the dynamics continued from the same configuration with ``x_j = -1``.
    The estimate is ``z = 1/2 sum_{i != j} (xbar_i - xbar'_i)``, with a
    batch-means standard error.
    """
    mc = mc or MCSpec()
    n = net.n_nodes
    if not 0 <= j < n:
        raise IndexError(f"node {j} out of range")
    rng = np.random.default_rng(rng)
    th = _theta(fields, n)
    if isinstance(mc.x0, str):
        if mc.x0 == "random":
            x0 = rng.choice(_alphabet(zero_valued), n)
        elif mc.x0 == "ones":
            x0 = np.ones(n)
        else:
            raise ValueError(f"unknown initial state {mc.x0!r}")
    else:
        x0 = np.asarray(mc.x0, dtype=float)
    free = _Glauber(net, th, x0, rng, zero_valued)
    for _ in range(mc.relax_sweeps):
        free.sweep()
    x_alpha = free.x.copy()
    before, sizes = free.block_means(mc.measure_sweeps, mc.n_blocks)
    clamped = _Glauber(net, th, x_alpha, rng, zero_valued, clamp=j)
    after, _ = clamped.block_means(mc.measure_sweeps, mc.n_blocks)
    wts = sizes / sizes.sum()
    mb = wts @ before
    ma = wts @ after
    others = np.arange(n) != j
    z = 0.5 * float((mb - ma)[others].sum())
    zb = 0.5 * (before - after)[:, others].sum(axis=1)
    B = len(zb)
    se = float(zb.std(ddof=1) / math.sqrt(B)) if B > 1 else float("nan")
    # drift check: first half of the blocks versus second half, per run
    r = float("nan")
    if B >= 4:
        r = float(max(split_rhat(before[:, others].sum(axis=1)[None, :]),
                      split_rhat(after[:, others].sum(axis=1)[None, :])))
    equilibrated = not (r > mc.r_hat_flag)
    return PerturbationResult(j, z, mb, ma, se, equilibrated, r)


def keystone_scan(net: WeightedNetwork, fields, n_nodes_sampled: int,
                  mc: MCSpec | None = None, rng=None, zero_valued: bool = False,
                  bins: int = 20):
    """Repeat :func:`perturb_keystone` on uniformly drawn nodes, each from a
    freshly drawn macrostate.

    Returns
    -------
    results : list of PerturbationResult
    hist : (counts, edges) histogram of the ``z`` values
    """
    rng = np.random.default_rng(rng)
    out = []
    for _ in range(n_nodes_sampled):
        j = int(rng.integers(net.n_nodes))
        out.append(perturb_keystone(net, fields, j, mc, rng, zero_valued))
    z = np.array([r.z_value for r in out])
    hist = np.histogram(z, bins=bins) if len(z) else (np.array([]), np.array([]))
    return out, hist
