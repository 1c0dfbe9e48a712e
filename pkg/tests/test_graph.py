"""Graph loading, hop distances, relationship weights, perception noise."""

import numpy as np
import pytest

from conftest import rand_graph
from crowdteam.errors import DataError, EdgeListParseError, EmptyGraphError
from crowdteam.graph import (
    PLATFORM,
    UNREACHABLE,
    all_pairs_hops,
    all_pairs_hops_cached,
    load_edge_list,
    make_graph,
    perceive_relations,
    perception_noise,
    read_hop_cache,
    relation_weights,
    sample_subpopulation,
    write_edge_list,
    write_hop_cache,
)

INF = float("inf")


def floyd_warshall_oracle(g):
    """Independent O(n^3) all-pairs distances; the slow way, on purpose."""
    ids = list(g.node_ids)
    n = len(ids)
    idx = {v: i for i, v in enumerate(ids)}
    dist = [[0.0 if i == j else INF for j in range(n)] for i in range(n)]
    for u, v in g.edges:
        dist[idx[u]][idx[v]] = 1.0
        dist[idx[v]][idx[u]] = 1.0
    for k in range(n):
        for i in range(n):
            dik = dist[i][k]
            if dik == INF:
                continue
            row_k = dist[k]
            row_i = dist[i]
            for j in range(n):
                alt = dik + row_k[j]
                if alt < row_i[j]:
                    row_i[j] = alt
    return dist


# --- parsing -------------------------------------------------------------------

def test_load_edge_list_basic(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("# comment\n0 1\n1 2\n\n2 0\n")
    g = load_edge_list(p)
    assert g.node_ids == (0, 1, 2)
    assert g.num_edges == 3
    assert g.has_edge(2, 0) and g.has_edge(0, 2)


def test_load_edge_list_collapses_duplicates_and_self_loops(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("0 1\n1 0\n0 1\n5 5\n")
    g = load_edge_list(p)
    assert g.num_edges == 1
    # the self-loop node still exists, just without edges
    assert 5 in g.node_ids
    assert g.degree(5) == 0


def test_load_edge_list_reports_line_numbers(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("0 1\n1 2 3\n")
    with pytest.raises(EdgeListParseError) as exc:
        load_edge_list(p)
    assert exc.value.line_number == 2

    p.write_text("0 1\n\na b\n")
    with pytest.raises(EdgeListParseError) as exc:
        load_edge_list(p)
    assert exc.value.line_number == 3
    assert "line 3" in str(exc.value)


def test_load_edge_list_missing_and_empty(tmp_path):
    with pytest.raises(DataError):
        load_edge_list(tmp_path / "nope.txt")
    p = tmp_path / "empty.txt"
    p.write_text("# only comments\n")
    with pytest.raises(EmptyGraphError):
        load_edge_list(p)


def test_edge_list_round_trip(tmp_path, two_cliques):
    p = tmp_path / "g.txt"
    write_edge_list(p, two_cliques)
    g2 = load_edge_list(p)
    assert g2.node_ids == two_cliques.node_ids
    assert g2.edges == two_cliques.edges


def test_make_graph_canonical_order():
    g = make_graph([3, 1, 2], [(3, 1), (2, 3)])
    assert g.node_ids == (1, 2, 3)
    assert (1, 3) in g.edges and (2, 3) in g.edges


def test_graph_rejects_duplicate_nodes():
    with pytest.raises(DataError):
        make_graph([1, 1, 2], [])


# --- hop distances ---------------------------------------------------------------

def test_hops_on_path_graph(path_graph):
    h = all_pairs_hops(path_graph)
    assert h.hop(0, 3) == 3
    assert h.hop(0, 0) == 0
    assert h.hop(1, 2) == 1


def test_hops_disconnected():
    g = make_graph(range(4), [(0, 1)])
    h = all_pairs_hops(g)
    assert h.hop(0, 2) == UNREACHABLE
    assert h.hop(2, 3) == UNREACHABLE


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_hops_match_floyd_warshall(seed):
    g = rand_graph(40, 0.08, seed)
    h = all_pairs_hops(g)
    oracle = floyd_warshall_oracle(g)
    for i in range(40):
        for j in range(40):
            expect = oracle[i][j]
            got = h.hops[i, j]
            if expect == INF:
                assert got == UNREACHABLE
            else:
                assert got == int(expect)


def test_hop_submatrix_keeps_full_graph_distances(path_graph):
    h = all_pairs_hops(path_graph)
    sub = h.submatrix([0, 3])
    # through the dropped middle nodes, not within the pair set
    assert sub.hop(0, 3) == 3


def test_hop_cache_round_trip(tmp_path, two_cliques):
    h = all_pairs_hops(two_cliques)
    path = tmp_path / "hops.bin"
    write_hop_cache(path, h)
    back = read_hop_cache(path, two_cliques.node_ids)
    assert np.array_equal(back.hops, h.hops)
    with pytest.raises(DataError):
        read_hop_cache(path, range(5))


def test_all_pairs_hops_cached_hits_disk(tmp_path, path_graph):
    first = all_pairs_hops_cached(path_graph, tmp_path)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    again = all_pairs_hops_cached(path_graph, tmp_path)
    assert np.array_equal(first.hops, again.hops)


# --- relationship weights ---------------------------------------------------------

def test_relation_weights_values(path_graph):
    rel = relation_weights(all_pairs_hops(path_graph))
    w = rel.weights
    assert w[0, 1] == 1.0            # direct
    assert w[0, 2] == pytest.approx(1 / 3)   # 2 hops
    assert w[0, 3] == pytest.approx(1 / 4)   # 3 hops
    assert np.allclose(w, w.T)
    assert np.all(np.diag(w) == 0.0)


def test_relation_weights_unreachable_zero():
    g = make_graph(range(3), [(0, 1)])
    rel = relation_weights(all_pairs_hops(g))
    assert rel.weights[0, 2] == 0.0
    assert rel.weights[1, 2] == 0.0


def test_relation_weights_direct_half():
    g = make_graph(range(2), [(0, 1)])
    rel = relation_weights(all_pairs_hops(g), direct_half=True)
    assert rel.weights[0, 1] == 0.5


def test_perceived_relations_clip_and_symmetry(two_cliques):
    rel = relation_weights(all_pairs_hops(two_cliques))
    rel = rel.with_noise(np.full(8, 0.8))
    seen = perceive_relations(rel, recruiter=0, seed=42)
    v = seen.values
    assert np.all(v >= 0.0) and np.all(v <= 1.0)
    assert np.allclose(v, v.T)
    assert np.all(np.diag(v) == 0.0)


def test_perceived_relations_zero_sigma_is_truth(two_cliques):
    rel = relation_weights(all_pairs_hops(two_cliques))
    seen = perceive_relations(rel, PLATFORM, seed=7)
    assert np.array_equal(seen.values, rel.weights)


def test_perception_noise_deterministic_per_worker(two_cliques):
    rel = relation_weights(all_pairs_hops(two_cliques)).with_noise(np.ones(8))
    a = perception_noise(rel, 3, seed=5)
    b = perception_noise(rel, 3, seed=5)
    assert np.array_equal(a, b)
    c = perception_noise(rel, 4, seed=5)
    assert not np.array_equal(a, c)


def test_perception_noise_mean_abs_matches_half_normal():
    """Pair noise (n_u + n_v)/2 with sigma=s has |deviation| mean s*sqrt(2/pi)/sqrt(2).

    Checked against the unclipped formula, so true weights sit mid-range
    where the clip is inactive.
    """
    n = 2000
    ids = tuple(range(n))
    w = np.full((n, n), 0.5)
    np.fill_diagonal(w, 0.0)
    sigma = 0.05
    from crowdteam.graph import RelationModel

    rel = RelationModel(ids, w, np.full(n, sigma))
    seen = perceive_relations(rel, PLATFORM, seed=11)
    iu = np.triu_indices(n, k=1)
    mean_abs = np.abs(seen.values[iu] - 0.5).mean()
    expect = sigma / np.sqrt(2) * np.sqrt(2 / np.pi)
    assert mean_abs == pytest.approx(expect, rel=0.05)


def test_perceive_relations_unknown_recruiter(two_cliques):
    rel = relation_weights(all_pairs_hops(two_cliques))
    with pytest.raises(DataError):
        perceive_relations(rel, 99, seed=0)


# --- subpopulation sampling ----------------------------------------------------------

@pytest.mark.parametrize("density", [0.0, 0.3, 0.7, 1.0])
def test_sample_subpopulation_hits_target_density(density):
    g = rand_graph(60, 0.2, seed=9)
    sub = sample_subpopulation(g, 20, density, seed=1)
    target = round(density * 20 * 19 / 2)
    assert sub.num_edges == target
    assert sub.num_nodes == 20
    assert set(sub.node_ids) <= set(g.node_ids)


def test_sample_subpopulation_deterministic():
    g = rand_graph(50, 0.15, seed=2)
    a = sample_subpopulation(g, 15, 0.4, seed=3)
    b = sample_subpopulation(g, 15, 0.4, seed=3)
    assert a.node_ids == b.node_ids
    assert a.edges == b.edges


def test_sample_subpopulation_validation():
    g = rand_graph(10, 0.3, seed=0)
    with pytest.raises(DataError):
        sample_subpopulation(g, 11, 0.5, seed=0)
    with pytest.raises(DataError):
        sample_subpopulation(g, 5, 1.5, seed=0)
