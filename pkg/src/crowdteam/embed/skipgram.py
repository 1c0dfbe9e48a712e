"""Skip-gram embedding trainer with negative sampling.

Pairs come from a sliding window over the walk corpus (effective width
drawn uniformly in [1, window] per position, word2vec style).  Each pair
takes one positive and ``negative_samples`` noise updates; the noise
distribution is the corpus unigram distribution raised to ``distortion``.
The hot loop is a numba kernel; it is single-threaded and seeded, so
training is bit-reproducible.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .. import rng
from ..errors import DataError
from .config import EmbeddingMatrix, TrainConfig
from .walks import WalkCorpus, pad_walks

_TABLE_SIZE = 1_000_000
_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)


def build_negative_table(counts, distortion: float, table_size: int = _TABLE_SIZE) -> np.ndarray:
    """Sampling table mapping uniform draws to nodes ~ counts**distortion."""
    counts = np.asarray(counts, dtype=np.float64)
    if counts.sum() <= 0:
        raise DataError("no tokens to build a sampling table from")
    probs = counts**distortion
    probs /= probs.sum()
    cum = np.cumsum(probs)
    grid = (np.arange(table_size, dtype=np.float64) + 0.5) / table_size
    return np.searchsorted(cum, grid).astype(np.int32)


@njit(cache=True)
def _xorshift(state):
    s = state[0]
    s ^= s << np.uint64(13)
    s &= _MASK
    s ^= s >> np.uint64(7)
    s ^= s << np.uint64(17)
    s &= _MASK
    state[0] = s
    return s


@njit(cache=True)
def _rand_below(state, bound):
    return int64(0) if bound <= 1 else int(_xorshift(state) >> np.uint64(33)) % bound


# numba needs the name at compile time; plain alias is enough
int64 = np.int64


@njit(cache=True)
def _sgns_epoch(walks, lens, w_in, w_out, table, window, k_neg,
                lr0, lr_min, progress, total_positions, state):
    """One pass over the corpus; returns (pair count, summed loss)."""
    dim = w_in.shape[1]
    loss = 0.0
    pairs = 0
    for wi in range(walks.shape[0]):
        length = lens[wi]
        for pos in range(length):
            frac = progress[0] / total_positions
            lr = lr0 * (1.0 - frac)
            if lr < lr_min:
                lr = lr_min
            progress[0] += 1
            center = walks[wi, pos]
            span = 1 + _rand_below(state, window)
            lo = pos - span
            if lo < 0:
                lo = 0
            hi = pos + span + 1
            if hi > length:
                hi = length
            for j in range(lo, hi):
                if j == pos:
                    continue
                ctx = walks[wi, j]
                grad_in = np.zeros(dim, dtype=np.float32)
                for step in range(k_neg + 1):
                    if step == 0:
                        target = ctx
                        label = 1.0
                    else:
                        target = table[_rand_below(state, table.shape[0])]
                        if target == ctx:
                            continue
                        label = 0.0
                    f = 0.0
                    for d in range(dim):
                        f += w_in[center, d] * w_out[target, d]
                    if f > 8.0:
                        sig = 1.0
                    elif f < -8.0:
                        sig = 0.0
                    else:
                        sig = 1.0 / (1.0 + math.exp(-f))
                    g = (label - sig) * lr
                    for d in range(dim):
                        grad_in[d] += g * w_out[target, d]
                        w_out[target, d] += g * w_in[center, d]
                    p = sig if label == 1.0 else 1.0 - sig
                    if p < 1e-10:
                        p = 1e-10
                    loss -= math.log(p)
                for d in range(dim):
                    w_in[center, d] += grad_in[d]
                pairs += 1
    return pairs, loss


def _cluster_pull(vectors: np.ndarray, centers: np.ndarray, gamma: float, lr: float):
    """Proximal pull of each vector toward its nearest running centroid."""
    d2 = ((vectors[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    assign = d2.argmin(axis=1)
    vectors -= (gamma * lr) * (vectors - centers[assign])
    for c in range(centers.shape[0]):
        mask = assign == c
        if mask.any():
            centers[c] = vectors[mask].mean(axis=0)
    return assign


def train_skipgram(corpus: WalkCorpus, cfg: TrainConfig) -> EmbeddingMatrix:
    """Train node vectors on the walk corpus; returns the input matrix."""
    n = len(corpus.node_ids)
    walks, lens = pad_walks(corpus)
    counts = np.zeros(n, dtype=np.int64)
    for w, length in zip(walks, lens):
        counts += np.bincount(w[:length], minlength=n)
    table = build_negative_table(counts, cfg.distortion)

    gen = rng.stream(cfg.seed, rng.TRAIN)
    w_in = ((gen.random((n, cfg.dim)) - 0.5) / cfg.dim).astype(np.float32)
    w_out = np.zeros((n, cfg.dim), dtype=np.float32)
    state = np.array([gen.integers(1, 2**63 - 1)], dtype=np.uint64)
    progress = np.zeros(1, dtype=np.int64)
    total_positions = max(int(lens.sum()) * cfg.epochs, 1)

    centers = None
    if cfg.cluster_penalty > 0 and cfg.cluster_centers > 0:
        pick = gen.choice(n, size=min(cfg.cluster_centers, n), replace=False)
        centers = w_in[pick].astype(np.float32).copy()

    losses = []
    for _ in range(cfg.epochs):
        pairs, loss = _sgns_epoch(
            walks, lens, w_in, w_out, table, cfg.window, cfg.negative_samples,
            cfg.learning_rate, cfg.min_learning_rate, progress,
            total_positions, state,
        )
        losses.append(loss / max(pairs, 1))
        if centers is not None:
            frac = progress[0] / total_positions
            lr_now = max(cfg.learning_rate * (1.0 - frac), cfg.min_learning_rate)
            _cluster_pull(w_in, centers, cfg.cluster_penalty, lr_now)
    return EmbeddingMatrix(corpus.node_ids, w_in, tuple(losses))
