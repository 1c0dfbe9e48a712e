"""Skip-gram training with negative sampling."""

import numpy as np
import pytest

from crowdteam.embed import TrainConfig, build_negative_table, generate_walks, train_skipgram
from crowdteam.errors import DataError


def clique_pair_graph():
    from crowdteam.graph import make_graph

    edges = []
    for block in (range(5), range(5, 10)):
        block = list(block)
        for i, u in enumerate(block):
            for v in block[i + 1:]:
                edges.append((u, v))
    edges.append((4, 5))
    return make_graph(range(10), edges)


def cfg(**kw):
    base = dict(dim=12, walks_per_node=8, walk_length=20, epochs=5, seed=0)
    base.update(kw)
    return TrainConfig(**base)


def test_negative_table_proportions_track_distorted_counts():
    counts = np.array([100, 300, 600])
    table = build_negative_table(counts, distortion=0.75, table_size=100_000)
    want = counts**0.75 / (counts**0.75).sum()
    got = np.bincount(table, minlength=3) / len(table)
    assert np.allclose(got, want, atol=1e-4)


def test_negative_table_uniform_at_zero_distortion():
    table = build_negative_table(np.array([1, 1000]), distortion=0.0, table_size=10_000)
    got = np.bincount(table, minlength=2) / len(table)
    assert np.allclose(got, [0.5, 0.5], atol=1e-3)


def test_negative_table_rejects_empty_counts():
    with pytest.raises(DataError):
        build_negative_table(np.zeros(4), distortion=0.75)


def test_training_is_deterministic():
    g = clique_pair_graph()
    corpus = generate_walks(g, cfg())
    a = train_skipgram(corpus, cfg())
    b = train_skipgram(corpus, cfg())
    assert np.array_equal(a.vectors, b.vectors)
    assert a.loss_history == b.loss_history
    c = train_skipgram(corpus, cfg(seed=1))
    assert not np.array_equal(a.vectors, c.vectors)


def test_loss_decreases():
    g = clique_pair_graph()
    corpus = generate_walks(g, cfg())
    emb = train_skipgram(corpus, cfg(epochs=8))
    assert emb.loss_history[-1] < emb.loss_history[0]
    assert np.all(np.isfinite(emb.vectors))
    assert emb.vectors.shape == (10, 12)
    assert emb.vectors.dtype == np.float32


def test_embedding_separates_cliques():
    """Within-clique dot products should dominate cross-clique ones."""
    g = clique_pair_graph()
    corpus = generate_walks(g, cfg(epochs=10))
    emb = train_skipgram(corpus, cfg(epochs=10))
    v = emb.vectors
    within, across = [], []
    for u in range(10):
        for w in range(u + 1, 10):
            dot = float(v[u] @ v[w])
            same = (u < 5) == (w < 5)
            (within if same else across).append(dot)
    assert np.mean(within) > np.mean(across)


def test_embedding_matrix_lookup():
    g = clique_pair_graph()
    corpus = generate_walks(g, cfg())
    emb = train_skipgram(corpus, cfg())
    assert emb.dim == 12
    assert np.array_equal(emb.vector(3), emb.vectors[3])
