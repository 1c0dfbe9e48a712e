"""Random-walk corpus generation."""

import numpy as np
import pytest

from conftest import rand_graph
from crowdteam.embed import TrainConfig, WalkCorpus, generate_walks
from crowdteam.embed.walks import pad_walks
from crowdteam.graph import make_graph


def cfg(**kw):
    base = dict(dim=8, walks_per_node=3, walk_length=12, epochs=1)
    base.update(kw)
    return TrainConfig(**base)


def test_corpus_shape_and_starts():
    g = rand_graph(20, 0.3, seed=1)
    corpus = generate_walks(g, cfg())
    assert corpus.num_walks == 20 * 3
    for i, walk in enumerate(corpus.walks):
        assert walk[0] == i // 3
        assert 1 <= len(walk) <= 12


def test_walk_steps_follow_edges():
    g = rand_graph(15, 0.25, seed=2)
    adj = {g.index[u]: {g.index[v] for v in g.neighbors(u)} for u in g.node_ids}
    corpus = generate_walks(g, cfg())
    for walk in corpus.walks:
        for a, b in zip(walk, walk[1:]):
            assert int(b) in adj[int(a)]


def test_isolated_node_yields_length_one_walk():
    g = make_graph(range(3), [(0, 1)])
    corpus = generate_walks(g, cfg())
    lone = [w for w in corpus.walks if w[0] == 2]
    assert lone and all(len(w) == 1 for w in lone)


def test_walks_deterministic_and_order_independent():
    """Walk (node, index) pairs own their streams: adding more walks per node
    leaves the earlier ones untouched."""
    g = rand_graph(12, 0.3, seed=3)
    two = generate_walks(g, cfg(walks_per_node=2))
    three = generate_walks(g, cfg(walks_per_node=3))
    again = generate_walks(g, cfg(walks_per_node=2))
    for a, b in zip(two.walks, again.walks):
        assert np.array_equal(a, b)
    for node in range(12):
        for wi in range(2):
            assert np.array_equal(two.walks[node * 2 + wi], three.walks[node * 3 + wi])


def test_seed_changes_walks():
    g = rand_graph(12, 0.3, seed=3)
    a = generate_walks(g, cfg(seed=0))
    b = generate_walks(g, cfg(seed=1))
    assert any(not np.array_equal(x, y) for x, y in zip(a.walks, b.walks))


def test_return_bias_discourages_backtracking():
    # cycle: two choices per step, one of which is an immediate return
    n = 10
    g = make_graph(range(n), [(i, (i + 1) % n) for i in range(n)])

    def returns(corpus):
        total = 0
        for walk in corpus.walks:
            for i in range(2, len(walk)):
                if walk[i] == walk[i - 2]:
                    total += 1
        return total

    plain = returns(generate_walks(g, cfg(walks_per_node=20, walk_length=30)))
    biased = returns(generate_walks(
        g, cfg(walks_per_node=20, walk_length=30, return_bias=100.0)
    ))
    assert biased < plain / 3


def test_pad_walks():
    g = make_graph(range(3), [(0, 1)])
    corpus = generate_walks(g, cfg(walk_length=6))
    padded, lens = pad_walks(corpus)
    assert padded.shape == (9, 6)
    assert padded.dtype == np.int32
    for row, length, walk in zip(padded, lens, corpus.walks):
        assert length == len(walk)
        assert np.array_equal(row[:length], walk)
        assert np.all(row[length:] == 0)


def test_walks_as_ids_maps_indices():
    g = make_graph([10, 20, 30], [(10, 20), (20, 30)])
    corpus = generate_walks(g, cfg(walks_per_node=1))
    as_ids = corpus.walks_as_ids()
    for walk in as_ids:
        assert set(walk.tolist()) <= {10, 20, 30}
