import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fgrdp.graph import (
    EdgeListParseError,
    Graph,
    erdos_renyi,
    barabasi_albert,
    exact_kstar_count,
    exact_triangle_count,
    load_edge_list,
    max_degree,
    sample_induced_subgraph,
    write_edge_list,
)

from conftest import random_pairs
from oracles import (
    induced_edge_count,
    kstars_enumerated,
    max_degree_histogram,
    triangles_cubic,
)


def assert_valid(g: Graph):
    a = g.dense()
    assert np.array_equal(a, a.T)
    assert not a.diagonal().any()
    for i in range(g.node_count):
        row = g.neighbors(i)
        assert np.all(np.diff(row) > 0)
    assert g.edge_count * 2 == g.degrees.sum()


edge_lists = st.integers(1, 25).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=80),
    )
)


@given(edge_lists)
def test_from_edges_invariants(data):
    n, pairs = data
    g = Graph.from_edges(n, pairs)
    assert_valid(g)
    expected = {(min(u, v), max(u, v)) for u, v in pairs if u != v}
    assert {tuple(e) for e in g.edges()} == expected


def test_load_dedups_and_skips_comments():
    g, meta = load_edge_list(["# c", "0 1", "1 2", "2 0", "0 1"])
    assert g.node_count == 3 and g.edge_count == 3
    assert {tuple(e) for e in g.edges()} == {(0, 1), (1, 2), (0, 2)}
    assert meta.duplicates_dropped == 1


def test_load_self_loop_only():
    g, meta = load_edge_list(["0 0"])
    assert g.node_count == 1 and g.edge_count == 0
    assert meta.self_loops_dropped == 1


def test_load_compacts_by_first_appearance():
    g, _ = load_edge_list(["100 7", "7 42", "# x", "42 100"])
    assert list(g.original_ids) == [100, 7, 42]
    assert exact_triangle_count(g) == 1


def test_load_reversed_duplicate_collapses():
    g, meta = load_edge_list(["3 4", "4 3"])
    assert g.edge_count == 1 and meta.duplicates_dropped == 1


@pytest.mark.parametrize("bad, lineno", [(["0 1", "1 x"], 2), (["# a", "", "7"], 3), (["0 -1"], 1)])
def test_load_rejects_malformed(bad, lineno):
    with pytest.raises(EdgeListParseError) as err:
        load_edge_list(bad)
    assert err.value.lineno == lineno
    assert f"line {lineno}" in str(err.value)


def test_load_rejects_empty():
    with pytest.raises(ValueError):
        load_edge_list(["# only a comment", ""])


def test_meta_reports_both_degree_conventions():
    _, meta = load_edge_list(["0 1", "1 2", "2 3"])
    assert meta.average_degree == pytest.approx(1.5)
    assert meta.edges_per_node == pytest.approx(0.75)


@settings(max_examples=50)
@given(edge_lists)
def test_write_load_round_trip(data):
    n, pairs = data
    g = Graph.from_edges(n, pairs)
    buf = io.StringIO()
    write_edge_list(g, buf)
    buf.seek(0)
    g2, meta = load_edge_list(buf)
    assert g2.same_as(g)
    assert meta.node_count == n and meta.edge_count == g.edge_count


def test_sample_full_size_is_identity():
    g = erdos_renyi(60, 0.1, 3)
    assert sample_induced_subgraph(g, 60, seed=9).same_as(g)


def test_sample_is_deterministic_and_valid():
    g = erdos_renyi(300, 0.05, 3)
    a = sample_induced_subgraph(g, 120, seed=5)
    b = sample_induced_subgraph(g, 120, seed=5)
    assert a.same_as(b)
    assert_valid(a)
    c = sample_induced_subgraph(g, 120, seed=6)
    assert not c.same_as(a)


def test_sample_edge_count_matches_recount():
    g = barabasi_albert(3000, 5, 11)
    ids = np.arange(g.node_count)
    g = Graph.from_edges(g.node_count, g.edges(), original_ids=ids * 3 + 1)
    s = sample_induced_subgraph(g, 1000, seed=2)
    chosen = (s.original_ids - 1) // 3
    assert np.all(np.diff(chosen) > 0)
    assert s.edge_count == induced_edge_count(g.dense(), chosen)


def test_sample_out_of_range():
    g = erdos_renyi(10, 0.5, 1)
    for bad in (0, 11):
        with pytest.raises(ValueError):
            sample_induced_subgraph(g, bad, 0)


def test_exact_counts_small(k4, path3, star4):
    assert exact_triangle_count(k4) == 4
    assert exact_triangle_count(path3) == 0
    assert exact_kstar_count(star4, 2) == 6
    assert exact_kstar_count(k4, 2) == 12
    assert max_degree(k4) == 3
    assert max_degree(Graph.from_edges(5, [])) == 0
    with pytest.raises(ValueError):
        exact_kstar_count(k4, 1)


def test_frozen_erdos_renyi_counts():
    # frozen from tests/oracles.py (cubic scan, subset enumeration, histogram)
    g = erdos_renyi(200, 0.1, 7)
    assert g.edge_count == 1978
    assert exact_triangle_count(g) == 1395
    assert exact_kstar_count(g, 3) == 266827
    assert exact_kstar_count(g, 2) == 39591
    assert max_degree(g) == 37


@pytest.mark.parametrize("seed", range(8))
def test_counts_match_oracles(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 150))
    p = float(rng.uniform(0.02, 0.3))
    g = Graph.from_edges(n, random_pairs(rng, n, p))
    a = g.dense()
    assert exact_triangle_count(g) == triangles_cubic(a)
    assert exact_kstar_count(g, 3) == kstars_enumerated(a, 3)
    d = g.degrees
    assert exact_kstar_count(g, 2) == int((d * (d - 1) // 2).sum())
    assert max_degree(g) == max_degree_histogram(a)


def test_graph_arrays_are_read_only(k4):
    with pytest.raises(ValueError):
        k4.indices[0] = 3
