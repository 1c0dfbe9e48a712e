"""Attributed node embedding: structure block plus projected attributes.

The final vector is ``concat(z_struct, P @ x)`` where ``z_struct`` comes
from plain skip-gram training and ``P`` is a linear projection of the
worker attribute vector (skill levels ++ normalized per-skill costs).
``P`` and fresh context vectors are trained on the same walk corpus with
the same negative-sampling co-occurrence loss, with the structure block
frozen; projection gradients are applied every ``batch_size`` positions.

After training, ``P`` is rescaled so the attribute block's mean row norm
equals ``attr_weight`` times the structure block's.  Without this the
two blocks are wildly mismatched whenever attributes do not predict walk
contexts: the co-occurrence gradients leave ``P`` near its small init
and downstream distances degenerate to the structural ones.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
from numba import njit

from .. import rng
from ..errors import DataError
from ..graph import SocialGraph
from .config import EmbeddingMatrix, TrainConfig
from .skipgram import build_negative_table, train_skipgram, _rand_below
from .walks import WalkCorpus, generate_walks, pad_walks


def worker_attribute_matrix(workers, node_ids) -> np.ndarray:
    """Rows of [skill levels, costs / max cost] aligned with node_ids."""
    by_id = {w.id: w for w in workers}
    missing = [n for n in node_ids if n not in by_id]
    if missing:
        raise DataError(f"nodes without worker attributes: {missing[:5]}")
    skills = np.stack([by_id[n].skill_levels for n in node_ids])
    costs = np.stack([by_id[n].costs for n in node_ids])
    top = costs.max()
    if top > 0:
        costs = costs / top
    return np.concatenate([skills, costs], axis=1).astype(np.float32)


@njit(cache=True)
def _attr_epoch(walks, lens, z_struct, attrs, proj, w_out, table, window,
                k_neg, lr0, lr_min, progress, total_positions, state,
                batch_size):
    """One epoch of projection training; structure block is frozen."""
    ds = z_struct.shape[1]
    da = proj.shape[0]
    na = attrs.shape[1]
    dim = ds + da
    zc = np.empty(dim, dtype=np.float32)
    gz = np.empty(dim, dtype=np.float32)
    grad_p = np.zeros((da, na), dtype=np.float32)
    in_batch = 0
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
            lo = max(pos - span, 0)
            hi = min(pos + span + 1, length)
            if hi - lo <= 1:
                continue
            for d in range(ds):
                zc[d] = z_struct[center, d]
            for r in range(da):
                acc = 0.0
                for a in range(na):
                    acc += proj[r, a] * attrs[center, a]
                zc[ds + r] = acc
            for d in range(dim):
                gz[d] = 0.0
            touched = False
            for j in range(lo, hi):
                if j == pos:
                    continue
                ctx = walks[wi, j]
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
                        f += zc[d] * w_out[target, d]
                    if f > 8.0:
                        sig = 1.0
                    elif f < -8.0:
                        sig = 0.0
                    else:
                        sig = 1.0 / (1.0 + math.exp(-f))
                    g = (label - sig) * lr
                    for d in range(dim):
                        gz[d] += g * w_out[target, d]
                        w_out[target, d] += g * zc[d]
                    p = sig if label == 1.0 else 1.0 - sig
                    if p < 1e-10:
                        p = 1e-10
                    loss -= math.log(p)
                    touched = True
                pairs += 1
            if touched:
                for r in range(da):
                    gr = gz[ds + r]
                    for a in range(na):
                        grad_p[r, a] += gr * attrs[center, a]
                in_batch += 1
                if in_batch == batch_size:
                    for r in range(da):
                        for a in range(na):
                            proj[r, a] += grad_p[r, a]
                            grad_p[r, a] = 0.0
                    in_batch = 0
    if in_batch > 0:
        for r in range(da):
            for a in range(na):
                proj[r, a] += grad_p[r, a]
    return pairs, loss


def embed_attributed(g: SocialGraph, workers, cfg: TrainConfig,
                     corpus: WalkCorpus | None = None) -> EmbeddingMatrix:
    """Structure + attribute embedding of dimension cfg.dim."""
    struct_dim = cfg.struct_dim if cfg.struct_dim is not None else cfg.dim // 2
    if not 0 < struct_dim < cfg.dim:
        raise DataError("struct_dim must leave room for the attribute block")
    if corpus is None:
        corpus = generate_walks(g, cfg)
    attrs = worker_attribute_matrix(workers, corpus.node_ids)

    struct_cfg = replace(cfg, dim=struct_dim, struct_dim=None,
                         cluster_penalty=0.0, cluster_centers=0)
    struct = train_skipgram(corpus, struct_cfg)

    n = len(corpus.node_ids)
    walks, lens = pad_walks(corpus)
    counts = np.zeros(n, dtype=np.int64)
    for w, length in zip(walks, lens):
        counts += np.bincount(w[:length], minlength=n)
    table = build_negative_table(counts, cfg.distortion)

    gen = rng.stream(cfg.seed, rng.TRAIN, 2)
    da = cfg.dim - struct_dim
    proj = ((gen.random((da, attrs.shape[1])) - 0.5) / attrs.shape[1]).astype(np.float32)
    w_out = np.zeros((n, cfg.dim), dtype=np.float32)
    state = np.array([gen.integers(1, 2**63 - 1)], dtype=np.uint64)
    progress = np.zeros(1, dtype=np.int64)
    total_positions = max(int(lens.sum()) * cfg.epochs, 1)

    losses = []
    for _ in range(cfg.epochs):
        pairs, loss = _attr_epoch(
            walks, lens, struct.vectors, attrs, proj, w_out, table,
            cfg.window, cfg.negative_samples, cfg.learning_rate,
            cfg.min_learning_rate, progress, total_positions, state,
            cfg.batch_size,
        )
        losses.append(loss / max(pairs, 1))

    attr_block = attrs @ proj.T
    struct_scale = float(np.linalg.norm(struct.vectors, axis=1).mean())
    attr_scale = float(np.linalg.norm(attr_block, axis=1).mean())
    if struct_scale > 0.0 and attr_scale > 0.0:
        attr_block = attr_block * (cfg.attr_weight * struct_scale / attr_scale)
    vectors = np.concatenate([struct.vectors, attr_block], axis=1).astype(np.float32)
    return EmbeddingMatrix(corpus.node_ids, vectors, tuple(losses))
