"""Benchmark graphs used by the experiments."""
from __future__ import annotations

import numpy as np

# Zachary's karate club, 0-based
KARATE_EDGES = [
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10), (0, 11),
    (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31), (1, 2), (1, 3), (1, 7),
    (1, 13), (1, 17), (1, 19), (1, 21), (1, 30), (2, 3), (2, 7), (2, 8), (2, 9),
    (2, 13), (2, 27), (2, 28), (2, 32), (3, 7), (3, 12), (3, 13), (4, 6), (4, 10),
    (5, 6), (5, 10), (5, 16), (6, 16), (8, 30), (8, 32), (8, 33), (9, 33), (13, 33),
    (14, 32), (14, 33), (15, 32), (15, 33), (18, 32), (18, 33), (19, 33), (20, 32),
    (20, 33), (22, 32), (22, 33), (23, 25), (23, 27), (23, 29), (23, 32), (23, 33),
    (24, 25), (24, 27), (24, 31), (25, 31), (26, 29), (26, 33), (27, 33), (28, 31),
    (28, 33), (29, 32), (29, 33), (30, 32), (30, 33), (31, 32), (31, 33), (32, 33),
]
KARATE_N = 34


def karate_edges() -> tuple[int, list]:
    return KARATE_N, list(KARATE_EDGES)


def planted_partition_edges(sizes, n_edges: int, frac_within: float, seed=0
                            ) -> tuple[int, list]:
    """Exactly ``n_edges`` edges, a fraction ``frac_within`` of them inside the
    blocks, drawn uniformly without replacement."""
    sizes = list(sizes)
    n = sum(sizes)
    block = np.repeat(np.arange(len(sizes)), sizes)
    iu, ju = np.triu_indices(n, 1)
    same = block[iu] == block[ju]
    rng = np.random.default_rng(seed)
    k_in = int(round(frac_within * n_edges))
    win = np.flatnonzero(same)
    wout = np.flatnonzero(~same)
    if k_in > len(win) or n_edges - k_in > len(wout):
        raise ValueError("not enough pairs for the requested edge counts")
    chosen = np.concatenate([rng.choice(win, k_in, replace=False),
                             rng.choice(wout, n_edges - k_in, replace=False)])
    chosen.sort()
    return n, [(int(iu[t]), int(ju[t])) for t in chosen]


def football_like_edges(seed=0) -> tuple[int, list]:
    """Stand-in for the college-football graph with the same size (N=115,
    E=613): twelve conferences of 9-10 teams, about two thirds of the games
    played within a conference."""
    sizes = [10] * 7 + [9] * 5
    return planted_partition_edges(sizes, 613, 0.65, seed)
