"""Dimensionality reduction used before clustering: PCA and exact t-SNE."""

from __future__ import annotations

import numpy as np

from .. import rng
from ..errors import DataError
from .config import EmbeddingMatrix

TSNE_MAX_POINTS = 5000


def pca_project(vectors: np.ndarray, out_dim: int) -> np.ndarray:
    """Project rows onto the top principal components.

    Component signs are fixed so the largest-magnitude loading of each
    component is positive, which keeps the projection reproducible across
    SVD implementations.
    """
    x = np.asarray(vectors, dtype=np.float64)
    if out_dim < 1 or out_dim > x.shape[1]:
        raise DataError(f"out_dim {out_dim} outside [1, {x.shape[1]}]")
    centred = x - x.mean(axis=0)
    _, _, vt = np.linalg.svd(centred, full_matrices=False)
    comps = vt[:out_dim]
    for i in range(out_dim):
        j = int(np.argmax(np.abs(comps[i])))
        if comps[i, j] < 0:
            comps[i] = -comps[i]
    return (centred @ comps.T).astype(np.float32)


def _conditional_probs(dist_sq: np.ndarray, perplexity: float) -> np.ndarray:
    """Row-wise p_{j|i} with per-point bandwidth matched to the perplexity."""
    n = dist_sq.shape[0]
    target = np.log(perplexity)
    p = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        row = dist_sq[i].copy()
        row[i] = np.inf
        beta, lo, hi = 1.0, 0.0, np.inf
        for _ in range(64):
            ex = np.exp(-row * beta)
            total = ex.sum()
            if total <= 0:
                entropy = 0.0
                probs = ex
            else:
                probs = ex / total
                with np.errstate(divide="ignore", invalid="ignore"):
                    logp = np.where(probs > 0, np.log(probs), 0.0)
                entropy = -np.sum(probs * logp)
            if abs(entropy - target) < 1e-5:
                break
            if entropy > target:
                lo = beta
                beta = beta * 2 if hi == np.inf else (beta + hi) / 2
            else:
                hi = beta
                beta = (beta + lo) / 2
        p[i] = probs
        p[i, i] = 0.0
    return p


def tsne_embed(vectors: np.ndarray, out_dim: int = 2, perplexity: float = 30.0,
               iterations: int = 500, learning_rate: float = 200.0,
               seed: int = 0) -> np.ndarray:
    """Exact (non-tree) t-SNE.  Quadratic in point count, capped at 5000."""
    x = np.asarray(vectors, dtype=np.float64)
    n = x.shape[0]
    if n > TSNE_MAX_POINTS:
        raise DataError(f"{n} points exceeds exact t-SNE cap {TSNE_MAX_POINTS}")
    if n < 4:
        raise DataError("need at least 4 points")
    if perplexity >= n:
        perplexity = (n - 1) / 3.0

    sq = np.sum(x**2, axis=1)
    dist_sq = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (x @ x.T), 0.0)
    cond = _conditional_probs(dist_sq, perplexity)
    p = (cond + cond.T) / (2.0 * n)
    p = np.maximum(p, 1e-12)

    gen = rng.stream(seed, rng.REDUCE)
    y = gen.standard_normal((n, out_dim)) * 1e-4
    update = np.zeros_like(y)
    gains = np.ones_like(y)
    exaggeration_until = min(250, iterations // 2)
    p_run = p * 12.0

    for it in range(iterations):
        if it == exaggeration_until:
            p_run = p
        ysq = np.sum(y**2, axis=1)
        num = 1.0 / (1.0 + ysq[:, None] + ysq[None, :] - 2.0 * (y @ y.T))
        np.fill_diagonal(num, 0.0)
        q = np.maximum(num / num.sum(), 1e-12)
        mult = (p_run - q) * num
        grad = 4.0 * ((np.diag(mult.sum(axis=1)) - mult) @ y)
        momentum = 0.5 if it < exaggeration_until else 0.8
        same_sign = np.sign(grad) == np.sign(update)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        gains = np.maximum(gains, 0.01)
        update = momentum * update - learning_rate * gains * grad
        y = y + update
        y = y - y.mean(axis=0)
    return y.astype(np.float32)


def reduce_dim(embedding: EmbeddingMatrix, out_dim: int = 2,
               method: str = "tsne", seed: int = 0,
               perplexity: float = 30.0, iterations: int = 500) -> EmbeddingMatrix:
    """Reduce an embedding for clustering; keeps node order."""
    if method == "pca":
        reduced = pca_project(embedding.vectors, out_dim)
    elif method == "tsne":
        reduced = tsne_embed(embedding.vectors, out_dim, perplexity=perplexity,
                             iterations=iterations, seed=seed)
    else:
        raise DataError(f"unknown reduction method {method!r}")
    return EmbeddingMatrix(embedding.node_ids, reduced, ())
