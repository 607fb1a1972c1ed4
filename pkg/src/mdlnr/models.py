"""Kinetic and equilibrium (pseudolikelihood) Ising likelihoods with a cached
local-field matrix for O(M) single-entry updates."""
from __future__ import annotations

import numpy as np

from .graph_state import (Categories, DataError, Dataset, NodeFields, SelfLoopError,
                          WeightedNetwork, set_entry)

MODELS = ("kinetic", "equilibrium")


def log_z(s: np.ndarray, zero_valued: bool = False) -> np.ndarray:
    """Local log-normaliser: ``log 2cosh(s)`` or ``log(1 + 2cosh(s))``."""
    a = np.abs(s)
    if zero_valued:
        e = np.exp(-a)
        return a + np.log(e + 1.0 + e * e)
    t = np.multiply(a, -2.0)
    np.exp(t, out=t)
    np.log1p(t, out=t)
    t += a
    return t


def dlog_z(s: np.ndarray, zero_valued: bool = False) -> np.ndarray:
    if not zero_valued:
        return np.tanh(s)
    a = np.abs(s)
    e = np.exp(-a)
    return np.sign(s) * (1.0 - e * e) / (e + 1.0 + e * e)


def d2log_z(s: np.ndarray, zero_valued: bool = False) -> np.ndarray:
    if not zero_valued:
        t = np.tanh(s)
        return 1.0 - t * t
    e = np.exp(-np.abs(s))
    den = e + 1.0 + e * e
    return (e + e ** 3 + 4.0 * e * e) / (den * den)


class ModelState:
    """Dataset + weights + node fields + cached local fields.

    ``S[i, t] = sum_j W_ij inputs[j, t] + theta_i`` is kept consistent with the
    network and the fields; ``node_ll[i]`` holds node ``i``'s log-likelihood
    contribution, so single-entry changes cost O(M).

    Parameters
    ----------
    data : Dataset
    model : {"kinetic", "equilibrium"}
        Kinetic Ising transitions or equilibrium pseudolikelihood.
    zero_valued : bool
        Use the three-state normaliser ``1 + 2cosh``.
    units : array of int, optional
        Restrict the likelihood to these samples/transitions (used by
        cross-validation).
    """

    def __init__(self, data: Dataset, model: str = "kinetic", zero_valued: bool = False,
                 net: WeightedNetwork | None = None, fields: NodeFields | None = None,
                 wcats: Categories | None = None, units=None):
        if model not in MODELS:
            raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
        if data.alphabet == "zero_valued" and not zero_valued:
            raise DataError("zero-valued data needs the zero-valued model variant")
        if model == "kinetic" and data.kind != "markov" and data.n_samples > 0:
            raise DataError("the kinetic model needs a markov trajectory")
        self.data = data
        self.model = model
        self.zero_valued = zero_valued
        n = data.n_nodes
        self.net = net if net is not None else WeightedNetwork(n)
        self.fields = fields if fields is not None else NodeFields(n)
        self.wcats = wcats
        self.inputs, self.targets = data.pairs(units, transitions=(model == "kinetic"))
        self.recompute()

    @property
    def n_nodes(self) -> int:
        return self.net.n_nodes

    @property
    def n_units(self) -> int:
        return self.inputs.shape[1]

    # -- likelihood ----------------------------------------------------------

    def _ll_rows(self, rows, S_rows) -> np.ndarray:
        return (np.einsum("it,it->i", self.targets[rows], S_rows)
                - log_z(S_rows, self.zero_valued).sum(axis=1))

    def _ll_row(self, i: int, s: np.ndarray) -> float:
        return float(self.targets[i] @ s - log_z(s, self.zero_valued).sum())

    def recompute(self):
        """Rebuild the local-field cache from scratch."""
        self.S = self.net.to_sparse() @ self.inputs + self.fields.theta[:, None]
        self.S = np.ascontiguousarray(self.S)
        self.node_ll = self._ll_rows(slice(None), self.S)

    def full_loglik(self) -> float:
        S = self.net.to_sparse() @ self.inputs + self.fields.theta[:, None]
        return float(self._ll_rows(slice(None), S).sum())

    def loglik(self) -> float:
        return float(self.node_ll.sum())

    # -- single entries --------------------------------------------------------

    def delta_loglik_edge(self, i: int, j: int, w_new: float) -> float:
        if i == j:
            raise SelfLoopError(f"self-loop ({i}, {i}) is not allowed")
        d = w_new - self.net.weight(i, j)
        if d == 0:
            return 0.0
        si = self.S[i] + d * self.inputs[j]
        sj = self.S[j] + d * self.inputs[i]
        return (self._ll_row(i, si) + self._ll_row(j, sj)
                - self.node_ll[i] - self.node_ll[j])

    def _field_changes(self, changes) -> dict[int, np.ndarray]:
        dS: dict[int, np.ndarray] = {}
        for i, j, d in changes:
            if d == 0:
                continue
            for a, b in ((i, j), (j, i)):
                if a in dS:
                    dS[a] = dS[a] + d * self.inputs[b]
                else:
                    dS[a] = d * self.inputs[b]
        return dS

    def delta_loglik_multi(self, changes) -> float:
        """Log-likelihood change for simultaneous increments ``(i, j, dW)``."""
        dS = self._field_changes(changes)
        if not dS:
            return 0.0
        rows = np.fromiter(dS, dtype=int, count=len(dS))
        new = self._ll_rows(rows, self.S[rows] + np.array(list(dS.values())))
        return float(new.sum() - self.node_ll[rows].sum())

    def apply_entry(self, i: int, j: int, w_new: float):
        if self.wcats is not None:
            old = set_entry(self.net, self.wcats, i, j, w_new)
        else:
            if i == j:
                raise SelfLoopError(f"self-loop ({i}, {i}) is not allowed")
            old = self.net.set(i, j, w_new)
        d = w_new - old
        if d == 0:
            return
        self.S[i] += d * self.inputs[j]
        self.S[j] += d * self.inputs[i]
        self.node_ll[i] = self._ll_row(i, self.S[i])
        self.node_ll[j] = self._ll_row(j, self.S[j])

    def apply_entries(self, changes):
        """Apply several ``(i, j, w_new)`` assignments at once.

        Category counts are incremented before any are decremented, so a value
        may migrate between entries without its category being deleted midway.
        """
        olds = [self.net.weight(i, j) for i, j, _ in changes]
        if self.wcats is not None:
            for (_, _, w), old in zip(changes, olds):
                if w != old and w != 0:
                    self.wcats.add(w)
            for (_, _, w), old in zip(changes, olds):
                if w != old and old != 0:
                    self.wcats.remove(old)
        rows = set()
        for (i, j, w), old in zip(changes, olds):
            d = w - old
            if d == 0:
                continue
            self.net.set(i, j, w)
            self.S[i] += d * self.inputs[j]
            self.S[j] += d * self.inputs[i]
            rows.update((i, j))
        for r in rows:
            self.node_ll[r] = self._ll_row(r, self.S[r])

    def shift_rows(self, rows, D: np.ndarray, d: float):
        """``S[rows] += d * D`` and refresh the affected likelihood terms."""
        self.S[rows] += d * D
        self.node_ll[rows] = self._ll_rows(rows, self.S[rows])

    def grad_entry(self, i: int, j: int) -> float:
        """Derivative of the log-likelihood with respect to ``W_ij``."""
        if i == j:
            raise SelfLoopError(f"self-loop ({i}, {i}) is not allowed")
        ri = self.targets[i] - dlog_z(self.S[i], self.zero_valued)
        rj = self.targets[j] - dlog_z(self.S[j], self.zero_valued)
        return float(ri @ self.inputs[j] + rj @ self.inputs[i])

    def curv_entry(self, i: int, j: int) -> float:
        """Second derivative of the log-likelihood with respect to ``W_ij``."""
        xi2 = self.inputs[i] ** 2
        xj2 = self.inputs[j] ** 2
        return -float(d2log_z(self.S[i], self.zero_valued) @ xj2
                      + d2log_z(self.S[j], self.zero_valued) @ xi2)

    # -- node fields -------------------------------------------------------------

    def delta_loglik_theta(self, i: int, t_new: float) -> float:
        d = t_new - self.fields.theta[i]
        if d == 0:
            return 0.0
        return self._ll_row(i, self.S[i] + d) - self.node_ll[i]

    def delta_loglik_theta_multi(self, changes) -> float:
        rows = np.array([i for i, _ in changes], dtype=int)
        if len(rows) == 0:
            return 0.0
        d = np.array([dt for _, dt in changes])
        new = self._ll_rows(rows, self.S[rows] + d[:, None])
        return float(new.sum() - self.node_ll[rows].sum())

    def apply_theta(self, i: int, t_new: float, categorical: bool = True):
        old = self.fields.set(i, t_new) if categorical else self._set_theta_free(i, t_new)
        d = t_new - old
        if d == 0:
            return
        self.S[i] += d
        self.node_ll[i] = self._ll_row(i, self.S[i])

    def apply_thetas(self, changes):
        """Apply several ``(i, theta_new)`` assignments with category bookkeeping."""
        cats = self.fields.cats
        olds = [float(self.fields.theta[i]) for i, _ in changes]
        for (_, t), old in zip(changes, olds):
            if t != old:
                cats.add(t)
        for (_, t), old in zip(changes, olds):
            if t != old:
                cats.remove(old)
        for (i, t), old in zip(changes, olds):
            if t != old:
                self.fields.theta[i] = t
                self.S[i] += t - old
                self.node_ll[i] = self._ll_row(i, self.S[i])

    def bulk_delta(self, rows, D: np.ndarray, d: float) -> float:
        """Log-likelihood change for ``S[rows] += d * D``."""
        if len(rows) == 0 or d == 0:
            return 0.0
        new = self._ll_rows(rows, self.S[rows] + d * D)
        return float(new.sum() - self.node_ll[rows].sum())

    def _set_theta_free(self, i, t):
        old = float(self.fields.theta[i])
        self.fields.theta[i] = t
        return old

    def grad_theta(self, i: int) -> float:
        return float((self.targets[i] - dlog_z(self.S[i], self.zero_valued)).sum())

    def curv_theta(self, i: int) -> float:
        return -float(d2log_z(self.S[i], self.zero_valued).sum())

    # -- vectorised all-pairs quantities -------------------------------------------

    def grad_matrix(self) -> np.ndarray:
        """``N x N`` matrix of ``d loglik / d W_ij`` (zero diagonal)."""
        R = self.targets - dlog_z(self.S, self.zero_valued)
        G = R @ self.inputs.T
        G = G + G.T
        np.fill_diagonal(G, 0.0)
        return G

    def insertion_delta_matrix(self, w: float) -> np.ndarray:
        """Log-likelihood change from adding ``w`` to every entry, one at a time.

        Exact for the entries currently zero (and, more generally, for the
        increment ``W_ij -> W_ij + w``).
        """
        F0 = log_z(self.S, self.zero_valued)
        Gp = log_z(self.S + w, self.zero_valued) - F0
        Gm = log_z(self.S - w, self.zero_valued) - F0
        P = (self.inputs > 0).astype(float)
        Q = (self.inputs < 0).astype(float)
        D = w * (self.targets @ self.inputs.T) - Gp @ P.T - Gm @ Q.T
        D = D + D.T
        np.fill_diagonal(D, -np.inf)
        return D

    # -- snapshots -------------------------------------------------------------------

    def snapshot(self):
        return (self.net.copy(), self.fields.copy(),
                None if self.wcats is None else self.wcats.copy(),
                self.S.copy(), self.node_ll.copy())

    def restore(self, snap):
        net, fields, wcats, S, ll = snap
        self.net, self.fields, self.wcats = net.copy(), fields.copy(), \
            (None if wcats is None else wcats.copy())
        self.S, self.node_ll = S.copy(), ll.copy()

    def cache_error(self) -> float:
        """Max abs deviation of the cached local fields from a fresh rebuild."""
        S = self.net.to_sparse() @ self.inputs + self.fields.theta[:, None]
        return float(np.max(np.abs(S - self.S))) if S.size else 0.0


def loglik(state: ModelState) -> float:
    return state.loglik()


def delta_loglik_edge(state: ModelState, i: int, j: int, w_new: float) -> float:
    return state.delta_loglik_edge(i, j, w_new)


def grad_entry(state: ModelState, i: int, j: int) -> float:
    return state.grad_entry(i, j)


def apply_entry(state: ModelState, i: int, j: int, w_new: float):
    state.apply_entry(i, j, w_new)
