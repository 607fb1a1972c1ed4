import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mdlnr.graph_state import (Categories, DataError, Dataset, NodeFields, SelfLoopError,
                               UnknownCategoryError, WeightCategories, WeightedNetwork,
                               binarize, check_invariants, recount, set_entry, snap)


def test_add_single_entry():
    net, cats = WeightedNetwork(3), WeightCategories()
    cats.create(0.5)
    set_entry(net, cats, 1, 2, 0.5)
    assert net.n_edges == 1
    assert cats.count_list() == [1]


def test_removing_last_edge_deletes_category():
    net, cats = WeightedNetwork(3), WeightCategories()
    cats.create(0.5)
    set_entry(net, cats, 1, 2, 0.5)
    assert set_entry(net, cats, 1, 2, 0.0) == 0.5
    assert net.n_edges == 0 and len(cats) == 0


def test_remove_one_of_two_matches_recount():
    net, cats = WeightedNetwork(4), WeightCategories()
    cats.create(0.5)
    set_entry(net, cats, 0, 1, 0.5)
    set_entry(net, cats, 2, 3, 0.5)
    set_entry(net, cats, 0, 1, 0.0)
    assert cats.counts == recount(net) == {0.5: 1}
    assert len(cats) == 1


def test_errors():
    net, cats = WeightedNetwork(3), WeightCategories()
    with pytest.raises(SelfLoopError):
        set_entry(net, cats, 1, 1, 0.0)
    with pytest.raises(UnknownCategoryError):
        set_entry(net, cats, 0, 1, 0.3)
    with pytest.raises(UnknownCategoryError):
        cats.create(0.0)


def test_symmetric_queries():
    net = WeightedNetwork(4, {(2, 1): -0.25})
    assert net.weight(1, 2) == net.weight(2, 1) == -0.25
    assert net.pairs() == [(1, 2)]


def test_binarize():
    assert binarize(WeightedNetwork(3)).nnz == 0
    net = WeightedNetwork(4, {(1, 2): 0.5, (2, 3): -0.1})
    A = binarize(net).toarray()
    expected = np.zeros((4, 4), dtype=int)
    for i, j in [(1, 2), (2, 3)]:
        expected[i, j] = expected[j, i] = 1
    assert (A == expected).all()
    # idempotent
    A2 = binarize(WeightedNetwork.from_dense(A.astype(float))).toarray()
    assert (A2 == A).all()


def test_snap_half_even():
    assert snap(0.25, 0.5) == 0.0
    assert snap(0.75, 0.5) == 1.0
    assert snap(1.234567891234, 1e-8) == pytest.approx(1.23456789, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5),
                          st.sampled_from([0.0, -0.5, 0.25, 0.5, 1.0])), max_size=40))
def test_incremental_counts_match_recount(ops):
    net, cats = WeightedNetwork(6), WeightCategories(delta=0.25)
    for i, j, w in ops:
        if i == j:
            continue
        if w != 0 and w not in cats:
            cats.create(w)
        set_entry(net, cats, i, j, w)
        cats.prune()
    check_invariants(net, cats)
    assert net.n_edges == sum(cats.counts.values())
    assert (len(cats) == 0) == (net.n_edges == 0)
    for (i, j), w in net.edges():
        assert net.weight(j, i) == w


def test_node_fields_bookkeeping():
    f = NodeFields(4, delta=0.5)
    assert f.cats.counts == {0.0: 4}
    f.cats.create(1.0)
    f.set(2, 1.0)
    f.check()
    assert f.cats.counts == {0.0: 3, 1.0: 1}
    with pytest.raises(UnknownCategoryError):
        f.set(0, 7.0)


def test_categories_zero_allowed_only_for_fields():
    c = Categories(allow_zero=True)
    assert c.create(0.0) == 0.0


def test_dataset_validation():
    d = Dataset(np.array([[1, -1, 1], [1, 1, -1]]))
    assert (d.n_nodes, d.n_samples) == (2, 3)
    with pytest.raises(DataError, match="node 1, sample 2"):
        Dataset(np.array([[1, -1, 1], [1, 1, 2]]))
    with pytest.raises(DataError):
        Dataset(np.array([[0, 1]]), alphabet="binary")
    Dataset(np.array([[0, 1]]), alphabet="zero_valued")
    # a single state is a trajectory with no transitions
    assert Dataset(np.array([[1], [1]]), kind="markov").pairs()[0].shape == (2, 0)


def test_dataset_pairs_for_trajectory():
    X = np.array([[1, -1, 1], [-1, -1, 1]])
    inp, tgt = Dataset(X, kind="markov").pairs()
    assert (inp == X[:, :2]).all() and (tgt == X[:, 1:]).all()
