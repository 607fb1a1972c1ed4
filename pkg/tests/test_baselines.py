import numpy as np
import pytest

from mdlnr.baselines import (L1Config, TruePriorConfig, cross_validate_l1, decimate,
                             heldout_loglik, make_folds, parse_grid, reconstruct_l1,
                             reconstruct_true_prior)
from mdlnr.graph_state import Dataset, WeightedNetwork
from mdlnr.metrics import jaccard_binary
from mdlnr.models import ModelState
from mdlnr.simulate import sample_kinetic


@pytest.fixture(scope="module")
def planted():
    rng = np.random.default_rng(0)
    n = 10
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    pick = rng.choice(len(pairs), 12, replace=False)
    net = WeightedNetwork(n, {pairs[k]: 0.6 for k in pick})
    return net, sample_kinetic(net, None, 2000, rng=1)


def kkt_gap(data, fit, lam):
    st = ModelState(data, "kinetic", net=fit.net.copy())
    st.fields.theta[:] = fit.theta
    st.recompute()
    G = st.grad_matrix()
    W = fit.net.to_dense()
    iu = np.triu_indices(W.shape[0], 1)
    g, w = G[iu], W[iu]
    nz = w != 0
    gap_nz = np.abs(g[nz] - lam * np.sign(w[nz])).max(initial=0.0)
    gap_z = np.maximum(np.abs(g[~nz]) - lam, 0).max(initial=0.0)
    return max(gap_nz, gap_z)


@pytest.mark.parametrize("solver", ["cd", "prox"])
def test_l1_satisfies_optimality_conditions(planted, solver):
    net, data = planted
    fit = reconstruct_l1(data, "kinetic", lam=20.0, cfg=L1Config(solver=solver))
    assert kkt_gap(data, fit, 20.0) < 1e-3
    # maximised objective
    assert all(b >= a - 1e-9 for a, b in zip(fit.objective_trace, fit.objective_trace[1:]))


def test_solvers_agree(planted):
    net, data = planted
    a = reconstruct_l1(data, "kinetic", lam=20.0, cfg=L1Config(solver="cd"))
    b = reconstruct_l1(data, "kinetic", lam=20.0, cfg=L1Config(solver="prox"))
    assert a.objective == pytest.approx(b.objective, abs=1e-5)
    assert np.abs(a.net.to_dense() - b.net.to_dense()).max() < 1e-3


def test_l1_large_lambda_is_empty_and_shrinks(planted):
    net, data = planted
    G = ModelState(data, "kinetic").grad_matrix()
    lam_max = np.abs(G).max()
    assert reconstruct_l1(data, "kinetic", lam=lam_max * 1.01).n_edges == 0
    small = reconstruct_l1(data, "kinetic", lam=5.0)
    big = reconstruct_l1(data, "kinetic", lam=100.0)
    assert big.n_edges <= small.n_edges
    assert np.abs(big.net.to_dense()).sum() < np.abs(small.net.to_dense()).sum()
    with pytest.raises(ValueError):
        reconstruct_l1(data, "kinetic", lam=0.0)


def test_folds_partition_units():
    data = Dataset(np.ones((2, 21), dtype=int), "markov")
    folds = make_folds(data, "kinetic", 5, rng=0)
    allu = np.sort(np.concatenate(folds))
    assert (allu == np.arange(20)).all()
    data = Dataset(np.ones((2, 13), dtype=int))
    assert sum(len(f) for f in make_folds(data, "equilibrium", 4, rng=0)) == 13


def test_parse_grid():
    g = parse_grid("0:2:3")
    assert np.allclose(g, [1, 10, 100])
    assert np.allclose(parse_grid([3.0, 1.0]), [3.0, 1.0])
    with pytest.raises(ValueError):
        parse_grid("1:2")


def test_cross_validation_picks_interior_lambda(planted):
    net, data = planted
    cv = cross_validate_l1(data, "kinetic", k_folds=3, grid="0:2.5:6", refine_iters=3)
    assert min(cv.lambda_grid) <= cv.lambda_hat <= max(cv.lambda_grid)
    assert cv.fit is not None and cv.fit.n_edges >= 12
    assert np.isfinite(cv.heldout_mean).all() and len(cv.heldout_mean) == len(cv.lambda_grid)
    assert cv.to_dict()["lambda_hat"] == cv.lambda_hat


def test_heldout_loglik_matches_model(planted):
    net, data = planted
    fit = reconstruct_l1(data, "kinetic", lam=30.0)
    units = np.arange(100)
    st = ModelState(data, "kinetic", net=fit.net, units=units)
    st.fields.theta[:] = fit.theta
    st.recompute()
    assert heldout_loglik(data, "kinetic", fit, units) == pytest.approx(st.loglik(), rel=1e-12)


def test_decimation_is_monotone(planted):
    net, data = planted
    tr = decimate(data, "kinetic", step_fraction=0.1, threshold=None, target_E=1)
    assert tr.n_edges[0] == 45 and tr.n_edges[-1] <= 1
    assert all(a > b for a, b in zip(tr.n_edges, tr.n_edges[1:]))
    assert all(b <= a + 1e-9 for a, b in zip(tr.loglik, tr.loglik[1:]))
    assert all(l >= r - 1e-9 for l, r in zip(tr.loglik, tr.raw_loglik))
    assert tr.stopped_by == "target"
    best = max(jaccard_binary(net, w) for w in tr.nets)
    assert best >= 0.9  # coarse steps may skip the true edge count


def test_decimation_stop_rule_labelled(planted):
    net, data = planted
    tr = decimate(data, "kinetic", step_fraction=0.1, threshold=1e-4)
    assert tr.stopped_by in ("plateau", "exhausted")
    assert "heuristic" in tr.label


def test_true_prior_recovers_support(planted):
    net, data = planted
    fit = reconstruct_true_prior(data, "kinetic", mu=0.6, sigma=0.05)
    assert jaccard_binary(net, fit.net) >= 0.9
    with pytest.raises(ValueError):
        reconstruct_true_prior(data, "kinetic", sigma=0.0)
    assert TruePriorConfig().kappa == 1.0
