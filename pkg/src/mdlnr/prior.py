"""Description-length terms (negative log-priors, in nats) for quantized,
category-clustered edge weights and node fields."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln


@dataclass(frozen=True)
class PriorHyper:
    delta: float = 1e-8
    lam: float = 1.0
    delta_theta: float = 1e-8
    lam_theta: float = 1.0

    def __post_init__(self):
        for name in ("delta", "lam", "delta_theta", "lam_theta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


def log_fact(n) -> float:
    """``sum log(n_k!)`` over a scalar or sequence of counts."""
    if isinstance(n, (int, float, np.integer, np.floating)):
        return math.lgamma(n + 1.0)
    if isinstance(n, np.ndarray) and n.size > 32:
        return float(gammaln(n.astype(float) + 1.0).sum())
    return math.fsum(math.lgamma(float(k) + 1.0) for k in n)


def log_binom(n: int, k: int) -> float:
    """``log C(n, k)`` with the convention ``C(-1, -1) = 1``."""
    if n == k == -1:
        return 0.0
    if k < 0 or k > n:
        return math.inf
    return math.lgamma(n + 1.0) - math.lgamma(k + 1.0) - math.lgamma(n - k + 1.0)


def log_expm1(x: float) -> float:
    """``log(e^x - 1)`` accurate for tiny and large ``x``."""
    if x > 30:
        return x + math.log1p(-math.exp(-x))
    return math.log(math.expm1(x))


def qlaplace_neglogmass(w: float, lam: float, delta: float) -> float:
    """``-log`` mass of a nonzero value ``w`` under the quantized Laplace.

    Returns ``inf`` for ``w == 0`` or values off the ``delta`` grid.
    """
    if w == 0 or delta * np.round(w / delta) != w:
        return math.inf
    return lam * abs(w) - log_expm1(lam * delta) + math.log(2.0)


def neglog_prior_weights(E: int, K: int, m, z, N: int, hyper: PriorHyper | None = None,
                         lam: float | None = None, delta: float | None = None) -> float:
    """Description length of a weighted adjacency matrix with ``E`` nonzero
    entries spread over ``K`` categories of values ``z`` and counts ``m``."""
    hyper = hyper or PriorHyper()
    lam = hyper.lam if lam is None else lam
    delta = hyper.delta if delta is None else delta
    m = np.asarray(m, dtype=float)
    z = np.asarray(z, dtype=float)
    if len(m) != K or len(z) != K:
        raise ValueError("m and z must have K entries")
    if K > E:
        raise ValueError(f"K={K} exceeds E={E}")
    if K and (m.min() < 1):
        raise ValueError("category counts must be strictly positive")
    if K and np.any(z == 0):
        raise ValueError("zero is not a valid weight category")
    if m.sum() != E:
        raise ValueError("category counts must sum to E")
    if E > N * (N - 1) // 2:
        raise ValueError("more edges than node pairs")
    return weights_dl(E, m, float(np.abs(z).sum()), N, lam, delta)


def weights_dl(E: int, m, abs_z_sum: float, N: int, lam: float, delta: float) -> float:
    """Unvalidated core of :func:`neglog_prior_weights`."""
    K = len(m)
    pairs = N * (N - 1) // 2
    return (-log_fact(m) + log_fact(E) + log_binom(E - 1, K - 1)
            + lam * abs_z_sum - K * log_expm1(lam * delta) + K * math.log(2.0)
            + math.log(max(E, 1)) + log_binom(pairs, E) + math.log(pairs + 1))


def _log_sinh(x: float) -> float:
    if x > 20:
        return x - math.log(2.0) + math.log1p(-math.exp(-2 * x))
    return math.log(math.sinh(x))


def neglog_prior_theta(N: int, K_theta: int, n, u, hyper: PriorHyper | None = None,
                       lam: float | None = None, delta: float | None = None) -> float:
    """Description length of the node fields, grouped in ``K_theta`` categories
    (zero allowed) with values ``u`` and counts ``n``."""
    hyper = hyper or PriorHyper()
    lam = hyper.lam_theta if lam is None else lam
    delta = hyper.delta_theta if delta is None else delta
    if N == 0:
        return 0.0
    n = np.asarray(n, dtype=float)
    u = np.asarray(u, dtype=float)
    if len(n) != K_theta or len(u) != K_theta:
        raise ValueError("n and u must have K_theta entries")
    if K_theta and n.min() < 1:
        raise ValueError("field category counts must be strictly positive")
    if len(set(u.tolist())) != len(u):
        raise ValueError("duplicate field category values")
    if n.sum() != N:
        raise ValueError("field category counts must sum to N")
    return theta_dl(N, n, u, lam, delta)


def theta_dl(N: int, n, u, lam: float, delta: float) -> float:
    """Unvalidated core of :func:`neglog_prior_theta`."""
    K_theta = len(u)
    has_zero = int(any(x == 0 for x in u))
    return (-log_fact(n) + log_fact(N) + log_binom(N - 1, K_theta - 1) + math.log(N)
            + lam * math.fsum(abs(float(x)) for x in u)
            - (K_theta - has_zero) * _log_sinh(lam * delta)
            - has_zero * math.log(-math.expm1(-lam * delta)))


def prior_weights_of(state, hyper: PriorHyper, lam: float | None = None) -> float:
    cats = state.wcats
    return neglog_prior_weights(state.net.n_edges, len(cats), cats.count_list(),
                                cats.values, state.n_nodes, hyper, lam=lam)


def prior_theta_of(state, hyper: PriorHyper, lam: float | None = None) -> float:
    cats = state.fields.cats
    return neglog_prior_theta(state.n_nodes, len(cats), cats.count_list(), cats.values,
                              hyper, lam=lam)


def description_length(state, hyper: PriorHyper | None = None) -> float:
    """``-loglik + prior(W) + prior(theta)`` for a categorical model state."""
    hyper = hyper or PriorHyper()
    return -state.loglik() + prior_weights_of(state, hyper) + prior_theta_of(state, hyper)


def optimize_lambda(state, hyper: PriorHyper, lo: float = -6.0, hi: float = 6.0,
                    tol: float = 1e-6) -> PriorHyper:
    """Golden-section minimisation of the description length over ``log lam``
    (edge and field scales separately); categories are held fixed."""
    invphi = (math.sqrt(5) - 1) / 2

    def golden(f):
        a, b = lo, hi
        c, d = b - invphi * (b - a), a + invphi * (b - a)
        fc, fd = f(c), f(d)
        while b - a > tol:
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = f(c)
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = f(d)
        return math.exp((a + b) / 2)

    lam = golden(lambda x: prior_weights_of(state, hyper, lam=math.exp(x)))
    lam_theta = golden(lambda x: prior_theta_of(state, hyper, lam=math.exp(x)))
    return PriorHyper(hyper.delta, lam, hyper.delta_theta, lam_theta)
