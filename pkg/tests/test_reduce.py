"""PCA and exact t-SNE reductions."""

import numpy as np
import pytest

from crowdteam.embed import EmbeddingMatrix, pca_project, reduce_dim, tsne_embed
from crowdteam.errors import DataError


def blobs(n_per, centers, spread, seed=0, dim=10):
    gen = np.random.default_rng(seed)
    chunks = []
    for c in centers:
        mu = np.zeros(dim)
        mu[:2] = c
        chunks.append(gen.normal(0, spread, (n_per, dim)) + mu)
    return np.concatenate(chunks)


def test_pca_recovers_dominant_direction():
    gen = np.random.default_rng(1)
    t = gen.normal(0, 5, 200)
    noise = gen.normal(0, 0.1, (200, 3))
    x = np.zeros((200, 3))
    x[:, 0] = t
    x += noise
    proj = pca_project(x, 1)
    # first component carries essentially all the variance of t
    assert abs(np.corrcoef(proj[:, 0], t)[0, 1]) > 0.999


def test_pca_sign_convention_is_stable():
    gen = np.random.default_rng(2)
    x = gen.normal(0, 1, (50, 6))
    a = pca_project(x, 3)
    b = pca_project(x.copy(), 3)
    assert np.array_equal(a, b)
    assert a.dtype == np.float32


def test_pca_out_dim_validation():
    x = np.zeros((10, 4))
    with pytest.raises(DataError):
        pca_project(x, 0)
    with pytest.raises(DataError):
        pca_project(x, 5)


def test_tsne_separates_far_blobs():
    x = blobs(30, [(0, 0), (50, 50)], spread=0.5, seed=3)
    y = tsne_embed(x, iterations=300, seed=0)
    a, b = y[:30], y[30:]
    gap = np.linalg.norm(a.mean(axis=0) - b.mean(axis=0))
    spread = max(a.std(), b.std())
    assert gap > 4 * spread


def test_tsne_deterministic():
    x = blobs(15, [(0, 0), (8, 8)], spread=1.0, seed=4)
    a = tsne_embed(x, iterations=120, seed=5)
    b = tsne_embed(x, iterations=120, seed=5)
    assert np.array_equal(a, b)
    c = tsne_embed(x, iterations=120, seed=6)
    assert not np.array_equal(a, c)


def test_tsne_point_count_guards():
    with pytest.raises(DataError):
        tsne_embed(np.zeros((3, 4)))
    with pytest.raises(DataError):
        tsne_embed(np.zeros((5001, 2)))


def test_tsne_perplexity_autoshrinks():
    x = blobs(5, [(0, 0), (5, 5)], spread=0.5, seed=7)   # 10 points < default 30
    y = tsne_embed(x, iterations=60, seed=0, perplexity=30.0)
    assert y.shape == (10, 2)
    assert np.all(np.isfinite(y))


def test_reduce_dim_dispatch():
    x = blobs(10, [(0, 0), (6, 6)], spread=0.5, seed=8)
    emb = EmbeddingMatrix(tuple(range(20)), x.astype(np.float32))
    out = reduce_dim(emb, 2, method="pca")
    assert out.node_ids == emb.node_ids
    assert out.vectors.shape == (20, 2)
    out2 = reduce_dim(emb, 2, method="tsne", iterations=60)
    assert out2.vectors.shape == (20, 2)
    with pytest.raises(DataError):
        reduce_dim(emb, 2, method="umap")
