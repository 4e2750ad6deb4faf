import json
import math

import numpy as np
import pytest

from hyperlap.errors import FormatError, InvalidArgument, SpecViolation
from hyperlap.hypergraph import (
    Hyperedge,
    Hypergraph,
    LaplacianKind,
    adjacency,
    adjacency_normalized,
    degree_tensor,
    hypergraph_from_tensor,
    laplacian,
    laplacian_layers,
    layer_strong_connectivity,
    load_hypergraph,
    merge_hypergraphs,
    parse_hypergraph,
    save_hypergraph,
)
from hyperlap.tensor import apply, ones_tensor

from oracles import random_connected_hypergraph, random_undirected_uniform


def triangle():
    return Hypergraph(3, [Hyperedge((0, 1, 2))], directed=False)


def test_laplacian_kind_parse():
    assert LaplacianKind.parse("DEF2") is LaplacianKind.NORMALIZED
    with pytest.raises(InvalidArgument):
        LaplacianKind.parse("def5")


def test_hyperedge_validation():
    with pytest.raises(InvalidArgument):
        Hyperedge((0, 1), 0.0)
    with pytest.raises(InvalidArgument):
        Hyperedge((0, 1), math.inf)
    with pytest.raises(InvalidArgument):
        Hyperedge(())
    e = Hyperedge((2, 1), 2.0, tail=0)
    assert e.order == 3 and e.index_tuple == (0, 2, 1)
    assert e.describe() == "1->(3,2) w=2"


def test_duplicate_edges_merge_with_warning():
    with pytest.warns(UserWarning, match="weights summed"):
        H = Hypergraph(3, [Hyperedge((1, 2), 1.0, 0), Hyperedge((1, 2), 2.5, 0)])
    assert len(H.edges) == 1 and H.edges[0].weight == 3.5
    with pytest.warns(UserWarning, match="cancels"):
        H = Hypergraph(3, [Hyperedge((1, 2), 1.0, 0), Hyperedge((1, 2), -1.0, 0), Hyperedge((0, 0), 1.0, 2)])
    assert [e.index_tuple for e in H.edges] == [(2, 0, 0)]


def test_undirected_duplicates_ignore_member_order():
    with pytest.warns(UserWarning):
        H = Hypergraph(3, [Hyperedge((0, 1, 2)), Hyperedge((2, 0, 1))], directed=False)
    assert len(H.edges) == 1


def test_mixed_directedness_rejected():
    with pytest.raises(InvalidArgument):
        Hypergraph(3, [Hyperedge((0, 1))], directed=True)
    with pytest.raises(InvalidArgument, match="outside"):
        Hypergraph(2, [Hyperedge((0, 5), 1.0, 0)])


def test_layers_and_degrees():
    H = Hypergraph(4, [Hyperedge((0, 1, 2)), Hyperedge((1, 2, 3)), Hyperedge((0, 3))], directed=False)
    assert H.orders == [2, 3] and not H.is_uniform
    np.testing.assert_array_equal(H.degrees(3), [1, 2, 2, 1])
    with pytest.raises(SpecViolation, match="empty"):
        H.layer(4)
    assert H.sub_hypergraph(2).orders == [2]


def test_json_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    H = random_connected_hypergraph(rng, 3, 5, signs=[1, -1, 1, 1, -1])
    path = tmp_path / "g.json"
    save_hypergraph(H, path)
    assert load_hypergraph(path) == H
    obj = json.loads(path.read_text())
    assert all(1 <= e["tail"] <= 5 for e in obj["edges"])


@pytest.mark.parametrize(
    "doc, fragment",
    [
        ([], "JSON object"),
        ({"n": 0, "edges": []}, "n:"),
        ({"n": 3, "edges": {}}, "edges:"),
        ({"n": 3, "edges": [{"members": [1, 4]}]}, "edges[0].members[1]: node id 4 outside 1..3"),
        ({"n": 3, "edges": [{"members": [1, 0]}]}, "edges[0].members[1]"),
        ({"n": 3, "directed": True, "edges": [{"members": [1, 2]}]}, "edges[0].tail: required"),
        ({"n": 3, "edges": [{"tail": 1, "members": [1, 2]}]}, "edges[0].tail: not allowed"),
        ({"n": 3, "edges": [{"members": [1, 2]}, {"members": [1], "weight": "x"}]}, "edges[1].weight"),
        ({"n": 3, "edges": [{"members": [1, 2], "weight": 0}]}, "zero-weight"),
        ({"n": 3, "edges": [{"members": [1, 2], "colour": 1}]}, "unknown field"),
        ({"n": 3, "directed": "yes", "edges": []}, "directed:"),
    ],
)
def test_parse_diagnostics(doc, fragment):
    with pytest.raises(FormatError) as err:
        parse_hypergraph(doc)
    assert fragment in str(err.value)


def test_loads_bad_json():
    with pytest.raises(FormatError, match="line 1"):
        Hypergraph.loads("{")


# -- def1: unweighted --------------------------------------------------


def test_def1_triangle_entries():
    A = adjacency(triangle(), 3, "def1")
    assert A.nnz == 6
    np.testing.assert_allclose(A.values, 0.5)
    L = laplacian(triangle(), 3, "def1")
    np.testing.assert_array_equal(L.diagonal(), [1.0, 1.0, 1.0])
    np.testing.assert_allclose(apply(L, np.ones(3)), 0.0, atol=1e-15)


def test_def1_rejects_weights_and_repeats():
    H = Hypergraph(3, [Hyperedge((0, 1, 2), 2.0)], directed=False)
    with pytest.raises(SpecViolation, match="unit weights"):
        laplacian(H, 3, "def1")
    H = Hypergraph(3, [Hyperedge((0, 0, 2))], directed=False)
    with pytest.raises(SpecViolation, match="distinct"):
        laplacian(H, 3, "def1")
    with pytest.raises(SpecViolation, match="undirected"):
        laplacian(Hypergraph(3, [Hyperedge((1, 2), 1.0, 0)]), 3, "def1")


def test_def1_row_sums_equal_degree():
    rng = np.random.default_rng(9)
    for _ in range(10):
        k = int(rng.integers(2, 5))
        n = int(rng.integers(k + 1, 8))
        H = random_undirected_uniform(rng, k, n, 2 * n)
        A = adjacency(H, k, "def1")
        np.testing.assert_allclose(apply(A, np.ones(n)), H.degrees(k), rtol=1e-13)


# -- def2: normalized --------------------------------------------------


def test_def2_triangle_plus_edge():
    # 1-based edges {1,2,3}, {2,3,4}: degrees (1,2,2,1)
    H = Hypergraph(4, [Hyperedge((0, 1, 2)), Hyperedge((1, 2, 3))], directed=False)
    A = adjacency_normalized(H, 3)
    d = np.array([1.0, 2.0, 2.0, 1.0])
    expected = 0.5 * (d[0] * d[1] * d[2]) ** (-1 / 3)
    assert A[(0, 1, 2)] == pytest.approx(expected, rel=1e-15)
    assert A[(2, 1, 0)] == pytest.approx(expected, rel=1e-15)
    D = degree_tensor(H, 3, "def2")
    np.testing.assert_array_equal(D.diagonal(), [1, 1, 1, 1])
    L = laplacian(H, 3, "def2")
    dt = d ** (1 / 3)
    assert np.abs(apply(L, dt)).max() < 1e-14


def test_def2_normalized_triangle_value():
    # every degree is 1: entries are 1/2
    A = adjacency(triangle(), 3, "def2")
    np.testing.assert_allclose(A.values, 0.5, rtol=1e-15)


# -- def3/def4: weighted directed and signed ----------------------------


def test_def3_rejects_signed():
    H = Hypergraph(2, [Hyperedge((1,), -1.0, 0), Hyperedge((0,), 1.0, 1)])
    with pytest.raises(SpecViolation, match="def4"):
        laplacian(H, 2, "def3")


def test_def3_matches_graph_laplacian_for_k2():
    rng = np.random.default_rng(0)
    W = rng.uniform(0.1, 1, size=(5, 5)) * (rng.uniform(size=(5, 5)) < 0.6)
    np.fill_diagonal(W, 0)
    edges = [Hyperedge((j,), W[i, j], i) for i in range(5) for j in range(5) if W[i, j]]
    L = laplacian(Hypergraph(5, edges), 2, "def3")
    np.testing.assert_allclose(L.to_dense(), np.diag(W.sum(1)) - W, rtol=1e-15)


def test_def4_uses_absolute_row_sums():
    H = Hypergraph(3, [Hyperedge((1, 2), -2.0, 0), Hyperedge((0, 0), 3.0, 0), Hyperedge((0, 1), 1.0, 2)])
    L = laplacian(H, 3, "def4")
    # D_111 = |-2| + |3| = 5, and A_111 = 3 itself sits on the diagonal
    assert L[(0, 0, 0)] == 2.0
    assert L[(0, 1, 2)] == 2.0
    assert L[(2, 2, 2)] == 1.0
    assert L[(2, 0, 1)] == -1.0


def test_def3_on_all_ones_has_diagonal_63():
    edges = [Hyperedge(t[1:], 1.0, t[0]) for t in np.ndindex(4, 4, 4, 4)]
    L = laplacian(Hypergraph(4, edges), 4, "def3")
    np.testing.assert_array_equal(L.diagonal(), [63.0] * 4)
    assert (L + ones_tensor(4, 4)).nnz == 4


def test_undirected_weighted_expands_permutations():
    H = Hypergraph(3, [Hyperedge((0, 1, 2), 2.0)], directed=False)
    A = adjacency(H, 3, "def3")
    assert A.nnz == 6 and np.all(A.values == 2.0)


def test_laplacian_row_sums_vanish_on_random_graphs():
    rng = np.random.default_rng(17)
    for _ in range(20):
        k = int(rng.integers(2, 5))
        n = int(rng.integers(2, 7))
        H = random_connected_hypergraph(rng, k, n)
        L = laplacian(H, k, "def3")
        assert np.abs(apply(L, np.ones(n))).max() < 1e-12
        assert layer_strong_connectivity(H, k)


def test_layers_and_merge():
    a = Hypergraph(3, [Hyperedge((1, 2), 1.0, 0)])
    b = Hypergraph(3, [Hyperedge((2,), 1.0, 1)])
    H = merge_hypergraphs(a, b)
    assert H.orders == [2, 3]
    Ls = laplacian_layers(H, "def3")
    assert set(Ls) == {2, 3}
    assert not layer_strong_connectivity(H, 4)
    with pytest.raises(InvalidArgument):
        merge_hypergraphs(a, Hypergraph(4, []))


def test_hypergraph_from_tensor_round_trip():
    T = ones_tensor(3, 2)
    H = hypergraph_from_tensor(T)
    assert adjacency(H, 3, "def3") == T
