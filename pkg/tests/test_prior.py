import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from mdlnr.graph_state import Dataset, NodeFields, WeightCategories, WeightedNetwork, recount
from mdlnr.models import ModelState
from mdlnr.prior import (PriorHyper, description_length, log_binom, log_fact, neglog_prior_theta,
                         neglog_prior_weights, optimize_lambda, qlaplace_neglogmass)
from mdlnr.report import RunReport


def cats_of(net):
    cats = WeightCategories()
    for v, c in recount(net).items():
        cats.add(cats.create(v), c)
    return cats


def grid_mass(lam, delta, reach=60.0):
    k = np.arange(1, int(reach / (lam * delta)) + 1)
    w = k * delta
    one_side = math.fsum(math.exp(-qlaplace_neglogmass(x, lam, delta)) for x in w)
    return 2 * one_side


@pytest.mark.parametrize("lam,delta", [(1, 1), (2, 0.5), (0.3, 0.1)])
def test_quantized_laplace_sums_to_one(lam, delta):
    assert abs(grid_mass(lam, delta) - 1.0) < 1e-12


def test_zero_and_off_grid_have_no_mass():
    assert qlaplace_neglogmass(0.0, 1.0, 0.5) == math.inf
    assert qlaplace_neglogmass(0.3, 1.0, 0.5) == math.inf


def test_empty_network_prior():
    N = 5
    # E=0, K=0: every combinatorial term vanishes except the support size prior
    assert neglog_prior_weights(0, 0, [], [], N) == pytest.approx(math.log(11), abs=1e-12)
    assert neglog_prior_weights(0, 0, [], [], N) == pytest.approx(
        oracles.weights_prior(N, []), abs=1e-12)


def test_log_binom_conventions():
    assert log_binom(-1, -1) == 0.0
    assert log_binom(3, 5) == math.inf
    assert log_binom(10, 3) == pytest.approx(math.log(120), abs=1e-12)
    assert log_fact([3, 4]) == pytest.approx(math.log(6 * 24), abs=1e-12)


def test_prior_validation():
    with pytest.raises(ValueError):
        neglog_prior_weights(3, 2, [1, 1], [0.5, 1.0], 4)
    with pytest.raises(ValueError):
        neglog_prior_weights(2, 1, [2], [0.0], 4)
    with pytest.raises(ValueError):
        neglog_prior_weights(1, 2, [1, 0], [0.5, 1.0], 4)
    with pytest.raises(ValueError):
        PriorHyper(delta=0.0)
    with pytest.raises(ValueError):
        neglog_prior_theta(3, 2, [1, 1], [0.0, 1.0])


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 8), st.data())
def test_weights_prior_matches_oracle(N, data):
    pairs = N * (N - 1) // 2
    E = data.draw(st.integers(0, min(pairs, 8)))
    vals = data.draw(st.lists(st.sampled_from([-1.5, -0.5, 0.25, 0.5, 2.0]), min_size=E, max_size=E))
    z = sorted(set(vals))
    m = [vals.count(v) for v in z]
    mine = neglog_prior_weights(E, len(z), m, z, N, lam=0.7, delta=0.25)
    assert mine == pytest.approx(oracles.weights_prior(N, vals, 0.7, 0.25), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from([0.0, -1.0, 0.5, 3.0]), min_size=1, max_size=9))
def test_theta_prior_matches_oracle(theta):
    u = sorted(set(theta))
    n = [theta.count(v) for v in u]
    mine = neglog_prior_theta(len(theta), len(u), n, u, lam=1.3, delta=0.5)
    assert mine == pytest.approx(oracles.theta_prior(theta, 1.3, 0.5), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(1, 5))
def test_prior_grows_with_edges_at_fixed_categories(N, E):
    # one category: adding edges past half the pairs never helps more than C(P,E) does
    pairs = N * (N - 1) // 2
    E = min(E, pairs)
    val = neglog_prior_weights(E, 1, [E], [0.5], N)
    assert val > neglog_prior_weights(0, 0, [], [], N) - 1e-12


def test_splitting_a_category_costs_bits():
    # same weights, finer categorization costs more for tiny delta
    one = neglog_prior_weights(4, 1, [4], [0.5], 6)
    two = neglog_prior_weights(4, 2, [2, 2], [0.5, 0.5 + 1e-8], 6)
    assert two > one


def test_description_length_matches_oracle_and_report():
    rng = np.random.default_rng(0)
    X = rng.choice([-1, 1], size=(4, 15))
    W = np.zeros((4, 4))
    W[0, 1] = W[1, 0] = 0.5
    W[2, 3] = W[3, 2] = -0.5
    net = WeightedNetwork.from_dense(W)
    st_ = ModelState(Dataset(X), "equilibrium", net=net, fields=NodeFields(4),
                     wcats=cats_of(net))
    dl = description_length(st_)
    ref = oracles.description_length(W, [0.0] * 4, X, "equilibrium")
    assert dl == pytest.approx(ref, rel=1e-12)
    rep = RunReport("mdl", 4, dl, st_.loglik(), 2, 2, categories=[(-0.5, 1), (0.5, 1)],
                    theta_categories=[(0.0, 4)])
    assert rep.recompute_dl() == pytest.approx(dl, abs=1e-6)
    assert RunReport.from_dict(rep.to_dict()) == rep


def test_optimize_lambda_does_not_increase_prior():
    X = np.ones((4, 3), dtype=int)
    W = np.zeros((4, 4))
    W[0, 1] = W[1, 0] = 3.0
    net = WeightedNetwork.from_dense(W)
    s = ModelState(Dataset(X), "equilibrium", net=net,
                   wcats=cats_of(net))
    h0 = PriorHyper()
    h1 = optimize_lambda(s, h0)
    assert description_length(s, h1) <= description_length(s, h0) + 1e-9
