import math

import numpy as np
import pytest

import oracles
from mdlnr.graph_state import Dataset, WeightedNetwork
from mdlnr.inference import (MDLSearch, OptimizerConfig, _new_state, candidate_search_exact,
                             candidate_search_nnd, category_value_sweep, edge_move_sweep,
                             edge_swap_sweep, edge_update_sweep, merge_split_sweep,
                             random_bisection, random_bisection_index, reconstruct_mdl,
                             score_matrix, theta_update_sweep)
from mdlnr.metrics import jaccard_binary
from mdlnr.prior import PriorHyper, description_length
from mdlnr.simulate import sample_kinetic


def test_random_bisection_finds_unimodal_max():
    x = random_bisection(lambda x: -(x - 2.7) ** 2, -10, 10, iters=60, rng=0)
    assert x == pytest.approx(2.7, abs=1e-4)


def test_random_bisection_never_worse_than_start():
    f = lambda x: math.sin(3 * x) - 0.1 * x * x
    for seed in range(10):
        x = random_bisection(f, -5, 5, iters=30, rng=seed, x0=1.0)
        assert f(x) >= f(1.0)


def test_random_bisection_index():
    vals = [-3.0, -1.0, 0.5, 1.0, 4.0]
    k = random_bisection_index(lambda k: -abs(vals[k] - 0.9), len(vals), 40, rng=1)
    assert vals[k] == 1.0
    with pytest.raises(ValueError):
        random_bisection_index(lambda k: 0.0, 0)


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(kappa=0)
    with pytest.raises(ValueError):
        OptimizerConfig(candidate_mode="bogus")


def planted(seed, n=8, m=800, w=1.0, n_edges=7):
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    pick = rng.choice(len(pairs), n_edges, replace=False)
    net = WeightedNetwork(n, {pairs[k]: w * (1 if rng.random() < 0.5 else -1) for k in pick})
    return net, sample_kinetic(net, None, m, rng=seed)


def fresh_search(data, seed=0, **kw):
    h = PriorHyper()
    return MDLSearch(_new_state(data, "kinetic", False, h), h, OptimizerConfig(seed=seed, **kw))


def test_exact_candidates_are_top_scores():
    net, data = planted(1)
    s = fresh_search(data)
    S = score_matrix(s)
    c = candidate_search_exact(s, kappa=1)
    assert len(c.zero_pairs) == 8
    iu = np.triu_indices(8, 1)
    top = np.sort(S[iu])[-8:]
    got = sorted(S[i, j] for i, j in c.zero_pairs)
    assert np.allclose(got, top)


def test_nnd_candidates_overlap_exact():
    net, data = planted(2, n=20, n_edges=15)
    s = fresh_search(data)
    exact = set(candidate_search_exact(s, kappa=2).zero_pairs)
    approx = set(candidate_search_nnd(s, kappa=2).zero_pairs)
    assert len(exact & approx) >= 0.5 * len(exact)


def test_every_sweep_is_monotone_and_consistent():
    net, data = planted(3)
    s = fresh_search(data, seed=3)
    for _ in range(3):
        cands = candidate_search_exact(s)
        for step in (lambda: edge_update_sweep(s, cands), lambda: edge_move_sweep(s, cands),
                     lambda: edge_swap_sweep(s), lambda: category_value_sweep(s),
                     lambda: merge_split_sweep(s), lambda: theta_update_sweep(s),
                     lambda: category_value_sweep(s, s.fields),
                     lambda: merge_split_sweep(s, s.fields)):
            before = s.dl
            step()
            assert s.dl <= before + 1e-9
            assert s.dl == pytest.approx(description_length(s.state, s.hyper), abs=1e-6)
            assert s.state.cache_error() < 1e-8


def test_swap_preserves_degrees_and_weights():
    net, data = planted(4, n_edges=12, w=0.8)
    s = fresh_search(data)
    for (i, j), w in net.edges():
        if w not in s.state.wcats:
            s.state.wcats.create(w)
        s.state.apply_entry(i, j, w)
        s.state.wcats.add(w)
    s.refresh_dl()
    deg = s.state.net.degrees().copy()
    ws = sorted(w for _, w in s.state.net.edges())
    edge_swap_sweep(s, n_proposals=200)
    assert (s.state.net.degrees() == deg).all()
    assert sorted(w for _, w in s.state.net.edges()) == ws


def test_empty_data_gives_empty_network():
    data = Dataset(np.zeros((5, 0), dtype=int), kind="markov")
    net, fields, rep = reconstruct_mdl(data, "kinetic")
    assert net.n_edges == 0 and rep.K == 0
    assert rep.description_length == pytest.approx(oracles.weights_prior(5, []) +
                                                   oracles.theta_prior([0.0] * 5), rel=1e-12)


def test_recovers_strong_planted_network():
    net, data = planted(5, n=8, m=3000, w=1.0, n_edges=7)
    W, fields, rep = reconstruct_mdl(data, "kinetic", cfg=OptimizerConfig(seed=0))
    assert jaccard_binary(net, W) == 1.0
    assert rep.K <= 2
    assert rep.converged
    assert rep.recompute_dl() == pytest.approx(rep.description_length, abs=1e-6)
    assert all(b <= a + 1e-9 for a, b in zip(rep.dl_trajectory, rep.dl_trajectory[1:]))


def test_seed_determinism():
    net, data = planted(6, m=300)
    a = reconstruct_mdl(data, "kinetic", cfg=OptimizerConfig(seed=11))
    b = reconstruct_mdl(data, "kinetic", cfg=OptimizerConfig(seed=11))
    assert a[0] == b[0]
    assert a[2].description_length == b[2].description_length


def test_equilibrium_and_zero_valued_run():
    rng = np.random.default_rng(7)
    X = rng.choice([-1, 0, 1], size=(5, 200))
    data = Dataset(X, "iid", "zero_valued")
    net, fields, rep = reconstruct_mdl(data, "equilibrium", zero_valued=True,
                                       cfg=OptimizerConfig(check_invariants=True))
    assert rep.E == 0  # independent noise


def test_optimize_lambda_option_runs():
    net, data = planted(8, m=500)
    _, _, rep = reconstruct_mdl(data, "kinetic", cfg=OptimizerConfig(optimize_lambda=True))
    assert rep.lam > 0 and rep.recompute_dl() == pytest.approx(rep.description_length, abs=1e-6)
