from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .prior import neglog_prior_theta, neglog_prior_weights


@dataclass
class RunReport:
    """Summary of one reconstruction run.

    ``description_length`` can be recomputed from ``loglik`` and the category
    fields alone (see :meth:`recompute_dl`).
    """

    method: str
    n_nodes: int
    description_length: float
    loglik: float
    E: int
    K: int
    categories: list = field(default_factory=list)        # [(z_k, m_k)]
    theta_categories: list = field(default_factory=list)  # [(u_k, n_k)]
    lam: float = 1.0
    delta: float = 1e-8
    lam_theta: float = 1.0
    delta_theta: float = 1e-8
    sweeps: int = 0
    acceptance: dict = field(default_factory=dict)
    dl_trajectory: list = field(default_factory=list)
    converged: bool = True
    wall_time: float = 0.0
    seed: int | None = None
    w_range: tuple = (-10.0, 10.0)
    warnings: list = field(default_factory=list)

    def recompute_dl(self) -> float:
        z = [c[0] for c in self.categories]
        m = [c[1] for c in self.categories]
        u = [c[0] for c in self.theta_categories]
        n = [c[1] for c in self.theta_categories]
        pw = neglog_prior_weights(self.E, self.K, m, z, self.n_nodes,
                                  lam=self.lam, delta=self.delta)
        pt = neglog_prior_theta(self.n_nodes, len(u), n, u,
                                lam=self.lam_theta, delta=self.delta_theta)
        return -self.loglik + pw + pt

    def to_dict(self) -> dict:
        d = asdict(self)
        d["w_range"] = list(self.w_range)
        d["categories"] = [list(c) for c in self.categories]
        d["theta_categories"] = [list(c) for c in self.theta_categories]
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        d = dict(d)
        d["w_range"] = tuple(d.get("w_range", (-10.0, 10.0)))
        d["categories"] = [tuple(c) for c in d.get("categories", [])]
        d["theta_categories"] = [tuple(c) for c in d.get("theta_categories", [])]
        return cls(**d)
