import math

import numpy as np
import pytest

import oracles
from mdlnr.graph_state import DataError, Dataset, NodeFields, WeightedNetwork
from mdlnr.models import ModelState, log_z
from mdlnr.simulate import sample_kinetic


def random_state(rng, n=5, m=20, model="equilibrium", zero_valued=False, density=0.5):
    alpha = [-1, 0, 1] if zero_valued else [-1, 1]
    X = rng.choice(alpha, size=(n, m))
    kind = "markov" if model == "kinetic" else "iid"
    data = Dataset(X, kind, "zero_valued" if zero_valued else "binary")
    net = WeightedNetwork(n)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                net.set(i, j, float(rng.normal(0, 0.7)))
    fields = NodeFields(n, delta=1e-8, theta=np.round(rng.normal(0, 0.5, n), 6))
    return ModelState(data, model, zero_valued, net=net, fields=fields)


def test_kinetic_empty_is_fair_coin():
    X = np.random.default_rng(0).choice([-1, 1], size=(1, 11))
    st = ModelState(Dataset(X, "markov"), "kinetic")
    assert st.loglik() == pytest.approx(-10 * math.log(2), abs=1e-12)


def test_equilibrium_two_nodes_hand_value():
    w = 0.7
    st = ModelState(Dataset(np.array([[1], [1]])), "equilibrium",
                    net=WeightedNetwork(2, {(0, 1): w}))
    assert st.loglik() == pytest.approx(2 * (w - math.log(2 * math.cosh(w))), abs=1e-12)


def test_zero_valued_single_zero_state():
    st = ModelState(Dataset(np.array([[0]]), alphabet="zero_valued"), "equilibrium", True)
    assert st.loglik() == pytest.approx(-math.log(3), abs=1e-12)


def test_alphabet_mismatch_errors():
    with pytest.raises(DataError):
        ModelState(Dataset(np.array([[0, 1]]), alphabet="zero_valued"), "equilibrium", False)
    with pytest.raises(DataError):
        ModelState(Dataset(np.array([[1, -1]])), "kinetic")


def test_log_z_overflow_safe():
    s = np.array([-800.0, 0.0, 800.0])
    assert np.allclose(log_z(s), [800.0, math.log(2), 800.0])
    assert np.allclose(log_z(s, True), [800.0, math.log(3), 800.0])


@pytest.mark.parametrize("model", ["kinetic", "equilibrium"])
@pytest.mark.parametrize("zv", [False, True])
def test_loglik_matches_direct_loops(model, zv):
    rng = np.random.default_rng(3)
    st = random_state(rng, model=model, zero_valued=zv)
    ref = oracles.loglik(st.net.to_dense(), st.fields.theta, st.data.states, model, zv)
    assert st.loglik() == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("model", ["kinetic", "equilibrium"])
def test_delta_matches_recompute(model):
    rng = np.random.default_rng(5)
    for _ in range(20):
        st = random_state(rng, model=model)
        i, j = rng.choice(5, 2, replace=False)
        w = float(rng.normal())
        before = st.full_loglik()
        d = st.delta_loglik_edge(i, j, w)
        st.apply_entry(i, j, w)
        assert d == pytest.approx(st.full_loglik() - before, abs=1e-9)


def test_delta_identity_and_reversibility():
    rng = np.random.default_rng(6)
    st = random_state(rng)
    old = st.net.weight(0, 1)
    assert st.delta_loglik_edge(0, 1, old) == 0.0
    d1 = st.delta_loglik_edge(0, 1, 0.3)
    st.apply_entry(0, 1, 0.3)
    d2 = st.delta_loglik_edge(0, 1, old)
    assert d1 + d2 == pytest.approx(0.0, abs=1e-10)


def test_apply_then_revert_restores_exactly():
    rng = np.random.default_rng(7)
    for _ in range(3):
        st = random_state(rng)
        ll0 = st.loglik()
        old = st.net.weight(1, 3)
        st.apply_entry(1, 3, 0.9)
        assert st.cache_error() < 1e-9
        st.apply_entry(1, 3, old)
        assert st.loglik() == pytest.approx(ll0, abs=1e-9)
        assert st.cache_error() < 1e-9


def test_incremental_sequence_consistent():
    rng = np.random.default_rng(8)
    st = random_state(rng, n=6, m=40, model="kinetic")
    for _ in range(200):
        i, j = rng.choice(6, 2, replace=False)
        st.apply_entry(i, j, 0.0 if rng.random() < 0.3 else float(rng.normal()))
    assert st.loglik() == pytest.approx(st.full_loglik(), rel=1e-9)


def fd_grad(st, i, j, h=1e-6):
    w = st.net.weight(i, j)
    up = st.delta_loglik_edge(i, j, w + h)
    dn = st.delta_loglik_edge(i, j, w - h)
    return (up - dn) / (2 * h)


@pytest.mark.parametrize("model,zv", [("kinetic", False), ("equilibrium", False),
                                      ("equilibrium", True), ("kinetic", True)])
def test_gradient_matches_finite_difference(model, zv):
    rng = np.random.default_rng(11)
    for _ in range(10):
        st = random_state(rng, n=int(rng.integers(2, 7)), m=int(rng.integers(5, 51)),
                          model=model, zero_valued=zv)
        n = st.n_nodes
        i, j = rng.choice(n, 2, replace=False)
        g = st.grad_entry(i, j)
        assert abs(g - fd_grad(st, i, j)) <= 1e-5 * max(abs(g), 1.0)
        G = st.grad_matrix()
        assert G[i, j] == pytest.approx(g, abs=1e-9)


def test_gradient_sign_follows_correlation():
    # x_j = +1 always, x_i copies it one step later: positive coupling helps
    X = np.ones((2, 30), dtype=int)
    X[0, ::2] = -1
    X[1] = 1
    st = ModelState(Dataset(X, "markov"), "kinetic")
    corr = np.mean(X[0, 1:] * X[1, :-1]) + np.mean(X[1, 1:] * X[0, :-1])
    assert np.sign(st.grad_entry(0, 1)) == np.sign(corr) or corr == 0


def test_gradient_zero_at_line_optimum():
    rng = np.random.default_rng(12)
    st = random_state(rng, n=3, m=50)
    from scipy.optimize import minimize_scalar
    res = minimize_scalar(lambda w: -st.delta_loglik_edge(0, 1, w), bounds=(-5, 5),
                          method="bounded", options={"xatol": 1e-10})
    st.apply_entry(0, 1, res.x)
    assert abs(st.grad_entry(0, 1)) < 1e-4


def test_insertion_matrix_matches_single_deltas():
    rng = np.random.default_rng(13)
    st = random_state(rng, n=5, m=30, density=0.3)
    D = st.insertion_delta_matrix(0.4)
    for i in range(5):
        for j in range(i + 1, 5):
            if st.net.weight(i, j) == 0:
                assert D[i, j] == pytest.approx(st.delta_loglik_edge(i, j, 0.4), abs=1e-9)


def test_theta_delta_and_apply():
    rng = np.random.default_rng(14)
    st = random_state(rng)
    d = st.delta_loglik_theta(2, 0.8)
    before = st.loglik()
    st.fields.cats.create(0.8)
    st.apply_theta(2, 0.8)
    assert st.loglik() - before == pytest.approx(d, abs=1e-10)
    st.fields.check()
    assert st.cache_error() < 1e-12


def test_true_model_beats_permuted_weights():
    rng = np.random.default_rng(15)
    wins = 0
    for seed in range(5):
        n = 6
        net = WeightedNetwork(n)
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.5:
                    net.set(i, j, float(rng.normal(0, 1)))
        data = sample_kinetic(net, None, 10_000, rng=seed)
        true = ModelState(data, "kinetic", net=net).loglik()
        W = net.to_dense()
        perm = rng.permutation(n)
        other = ModelState(data, "kinetic", net=WeightedNetwork.from_dense(W[perm][:, perm]))
        wins += true > other.loglik()
    assert wins == 5
