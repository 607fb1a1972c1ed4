import math

import numpy as np
import pytest

import oracles
from mdlnr.datasets import football_like_edges, karate_edges, planted_partition_edges
from mdlnr.graph_state import WeightedNetwork
from mdlnr.simulate import (MCSpec, _draw_local, boltzmann_exact, ess, keystone_scan,
                            perturb_keystone, plant_weights, sample_equilibrium, sample_kinetic,
                            split_rhat)


@pytest.mark.parametrize("zv", [False, True])
def test_local_draws_follow_exponential_weights(zv):
    rng = np.random.default_rng(0)
    h = np.full(200_000, 0.7)
    x = _draw_local(h, rng.random(h.size), zv)
    alpha = [-1, 0, 1] if zv else [-1, 1]
    w = np.array([math.exp(a * 0.7) for a in alpha])
    p = w / w.sum()
    for a, pa in zip(alpha, p):
        assert abs(np.mean(x == a) - pa) < 4 * math.sqrt(pa * (1 - pa) / h.size)


def test_local_draws_extreme_fields_are_finite():
    x = _draw_local(np.array([-1e4, 1e4]), np.array([0.5, 0.5]), True)
    assert (x == [-1, 1]).all()


def test_kinetic_shape_and_validation():
    net = WeightedNetwork(3, {(0, 1): 0.5})
    d = sample_kinetic(net, None, 10, rng=0)
    assert d.states.shape == (3, 11) and d.kind == "markov"
    d = sample_kinetic(net, None, 5, x0=[1, -1, 1], rng=0)
    assert (d.states[:, 0] == [1, -1, 1]).all()
    with pytest.raises(ValueError):
        sample_kinetic(net, None, 5, x0=[1, 0, 1])
    with pytest.raises(ValueError):
        sample_kinetic(net, None, 0)


def test_boltzmann_exact_matches_oracle():
    net = WeightedNetwork(3, {(0, 1): 0.4, (1, 2): -0.8})
    th = [0.1, 0.0, -0.3]
    for zv in (False, True):
        configs, p = boltzmann_exact(net, th, zv)
        oc, op = oracles.boltzmann(net.to_dense(), th, zv)
        ref = dict(zip(oc, op))
        for c, pc in zip(configs, p):
            assert pc == pytest.approx(ref[tuple(int(v) for v in c)], abs=1e-12)


def test_equilibrium_sampler_small_tv():
    net = WeightedNetwork(3, {(0, 1): 0.5, (1, 2): -0.4})
    data, diag = sample_equilibrium(net, [0.2, 0, 0], 20_000, rng=1)
    configs, p = boltzmann_exact(net, [0.2, 0, 0])
    X = data.states.T
    emp = np.array([np.mean(np.all(X == c, axis=1)) for c in configs])
    assert 0.5 * np.abs(emp - p).sum() < 0.02
    assert diag.converged
    assert (diag.ess <= 20_000 + 1e-9).all()


def test_rhat_detects_disagreeing_chains():
    rng = np.random.default_rng(2)
    good = rng.normal(size=(4, 500))
    assert split_rhat(good) < 1.01
    bad = good + np.arange(4)[:, None]
    assert split_rhat(bad) > 1.1
    assert np.isnan(split_rhat(good[:, :3]))


def test_ess_bounds():
    rng = np.random.default_rng(3)
    iid = rng.normal(size=(4, 1000))
    assert 2500 < ess(iid) <= 4000
    ar = np.zeros((4, 1000))
    for t in range(1, 1000):
        ar[:, t] = 0.95 * ar[:, t - 1] + rng.normal(size=4)
    assert ess(ar) < 400


def test_plant_weights():
    n, edges = karate_edges()
    net = plant_weights(edges, 0.22, 0.01, rng=0, n_nodes=n)
    assert net.n_edges == 78
    w = np.array([v for _, v in net.edges()])
    assert abs(w.mean() - 0.22) < 0.005
    net = plant_weights(edges, "invk", 0.0, n_nodes=n)
    assert all(v == pytest.approx(34 / 156) for _, v in net.edges())
    with pytest.raises(ValueError):
        plant_weights([(0, 1), (1, 0)], 0.1)
    with pytest.raises(ValueError):
        plant_weights([], "invk")


def test_graph_generators():
    n, edges = football_like_edges()
    assert n == 115 and len(edges) == 613 and len(set(edges)) == 613
    assert all(i != j for i, j in edges)
    n, e = planted_partition_edges([5, 5], 12, 0.75, seed=1)
    assert n == 10 and len(e) == 12
    assert edges == football_like_edges()[1]


def test_clamping_isolated_nodes_changes_nothing():
    net = WeightedNetwork(6)
    r = perturb_keystone(net, None, 2, MCSpec(relax_sweeps=50, measure_sweeps=400), rng=0)
    assert abs(r.z_value) <= 3 * r.mc_stderr + 1e-12
    with pytest.raises(IndexError):
        perturb_keystone(net, None, 9)


def test_keystone_scan_histogram():
    net = WeightedNetwork(5, {(0, 1): 1.0})
    res, (counts, edges) = keystone_scan(net, None, 4, MCSpec(relax_sweeps=20,
                                                             measure_sweeps=100), rng=0, bins=5)
    assert len(res) == 4 and counts.sum() == 4
    assert set(res[0].row()) == {"node", "z", "stderr", "equilibrated"}
