"""Mean-aggregation graph neural encoder trained on co-occurrence loss.

Layer rule: ``h_u^k = act(W_k @ mean(h_a for a in N(u)) + B_k @ h_u^(k-1))``
with layer 0 the worker attribute vector.  An empty neighbourhood
aggregates to the zero vector.  Training minimizes the same
negative-sampling co-occurrence loss as the skip-gram trainers, with both
sides of every dot product taken from the encoder output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import rng
from ..errors import DataError
from ..graph import SocialGraph
from .attributed import worker_attribute_matrix
from .config import EmbeddingMatrix, TrainConfig
from .skipgram import build_negative_table
from .walks import generate_walks, pad_walks

_ACTIVATIONS = ("relu", "tanh", "identity")


@dataclass(frozen=True, eq=False)
class GnnParams:
    weights: tuple[np.ndarray, ...]       # W_k, (d_k, d_{k-1})
    self_weights: tuple[np.ndarray, ...]  # B_k, (d_k, d_{k-1})
    nonlinearity: str = "relu"

    def __post_init__(self):
        if self.nonlinearity not in _ACTIVATIONS:
            raise DataError(f"unknown nonlinearity {self.nonlinearity!r}")
        if len(self.weights) != len(self.self_weights) or not self.weights:
            raise DataError("need matching W/B per layer")
        for w, b in zip(self.weights, self.self_weights):
            if w.shape != b.shape:
                raise DataError("W/B shape mismatch")

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    @property
    def out_dim(self) -> int:
        return int(self.weights[-1].shape[0])


def init_gnn_params(attr_dim: int, layer_dims, seed: int = 0,
                    nonlinearity: str = "relu") -> GnnParams:
    gen = rng.stream(seed, rng.GNN)
    dims = [attr_dim] + list(layer_dims)
    weights, self_weights = [], []
    for k in range(1, len(dims)):
        scale = 1.0 / np.sqrt(dims[k - 1])
        weights.append((gen.random((dims[k], dims[k - 1])) - 0.5) * 2 * scale)
        self_weights.append((gen.random((dims[k], dims[k - 1])) - 0.5) * 2 * scale)
    return GnnParams(tuple(weights), tuple(self_weights), nonlinearity)


def mean_adjacency(g: SocialGraph) -> np.ndarray:
    """Row-normalized adjacency; isolated nodes keep an all-zero row."""
    n = g.num_nodes
    m = np.zeros((n, n), dtype=np.float64)
    idx = g.index
    for u, v in g.edges:
        m[idx[u], idx[v]] = 1.0
        m[idx[v], idx[u]] = 1.0
    deg = m.sum(axis=1)
    nz = deg > 0
    m[nz] /= deg[nz, None]
    return m


def _act(pre: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(pre, 0.0)
    if kind == "tanh":
        return np.tanh(pre)
    return pre


def _act_grad(pre: np.ndarray, post: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return (pre > 0).astype(np.float64)
    if kind == "tanh":
        return 1.0 - post**2
    return np.ones_like(pre)


def gnn_forward(params: GnnParams, features: np.ndarray, mean_adj: np.ndarray):
    """Per-layer activations [H_0 .. H_K]; H_K rows are the embeddings."""
    hs = [np.asarray(features, dtype=np.float64)]
    pres = []
    for w, b in zip(params.weights, params.self_weights):
        agg = mean_adj @ hs[-1]
        pre = agg @ w.T + hs[-1] @ b.T
        pres.append(pre)
        hs.append(_act(pre, params.nonlinearity))
    return hs, pres


def gnn_loss_and_grads(params: GnnParams, features: np.ndarray,
                       mean_adj: np.ndarray, pairs: np.ndarray,
                       labels: np.ndarray):
    """Co-occurrence loss and analytic parameter gradients.

    ``pairs`` is (m, 2) node indices; label 1 marks a positive pair and 0 a
    noise pair.  Returns (loss, dW list, dB list).
    """
    pairs = np.asarray(pairs, dtype=np.intp)
    labels = np.asarray(labels, dtype=np.float64)
    hs, pres = gnn_forward(params, features, mean_adj)
    z = hs[-1]
    zu = z[pairs[:, 0]]
    zv = z[pairs[:, 1]]
    f = np.einsum("md,md->m", zu, zv)
    sig = 1.0 / (1.0 + np.exp(-np.clip(f, -30.0, 30.0)))
    eps = 1e-12
    loss = -np.sum(labels * np.log(sig + eps) + (1 - labels) * np.log(1 - sig + eps))

    dz = np.zeros_like(z)
    coef = sig - labels  # dL/df
    np.add.at(dz, pairs[:, 0], coef[:, None] * zv)
    np.add.at(dz, pairs[:, 1], coef[:, None] * zu)

    grads_w = [None] * params.num_layers
    grads_b = [None] * params.num_layers
    dh = dz
    for k in range(params.num_layers - 1, -1, -1):
        dpre = dh * _act_grad(pres[k], hs[k + 1], params.nonlinearity)
        agg = mean_adj @ hs[k]
        grads_w[k] = dpre.T @ agg
        grads_b[k] = dpre.T @ hs[k]
        if k > 0:
            dh = mean_adj.T @ (dpre @ params.weights[k]) + dpre @ params.self_weights[k]
    return float(loss), grads_w, grads_b


def _walk_pairs(walks: np.ndarray, lens: np.ndarray, window: int) -> np.ndarray:
    out = []
    for offset in range(1, window + 1):
        for row, length in zip(walks, lens):
            if length > offset:
                left = row[:length - offset]
                right = row[offset:length]
                out.append(np.stack([left, right], axis=1))
    if not out:
        return np.zeros((0, 2), dtype=np.int64)
    return np.concatenate(out, axis=0).astype(np.int64)


def gnn_encode(g: SocialGraph, workers, params: GnnParams,
               cfg: TrainConfig, max_pairs_per_epoch: int = 20000) -> EmbeddingMatrix:
    """Train the encoder on the graph's walk corpus and return embeddings."""
    attrs = worker_attribute_matrix(workers, g.node_ids).astype(np.float64)
    if attrs.shape[1] != params.weights[0].shape[1]:
        raise DataError(
            f"attribute dim {attrs.shape[1]} does not match first layer "
            f"input {params.weights[0].shape[1]}"
        )
    madj = mean_adjacency(g)
    corpus = generate_walks(g, cfg)
    walks, lens = pad_walks(corpus)
    positives = _walk_pairs(walks, lens, cfg.window)
    n = g.num_nodes
    counts = np.zeros(n, dtype=np.int64)
    for w, length in zip(walks, lens):
        counts += np.bincount(w[:length], minlength=n)
    table = build_negative_table(counts, cfg.distortion)

    gen = rng.stream(cfg.seed, rng.GNN, 1)
    weights = [w.copy() for w in params.weights]
    self_weights = [b.copy() for b in params.self_weights]
    losses = []
    for epoch in range(cfg.epochs):
        p = GnnParams(tuple(weights), tuple(self_weights), params.nonlinearity)
        if len(positives) > max_pairs_per_epoch:
            pick = gen.choice(len(positives), size=max_pairs_per_epoch, replace=False)
            pos = positives[pick]
        else:
            pos = positives
        if not len(pos):
            losses.append(0.0)
            continue
        k = max(cfg.negative_samples, 1)
        neg_targets = table[gen.integers(0, len(table), size=(len(pos), k))]
        neg = np.stack([
            np.repeat(pos[:, 0], k),
            neg_targets.reshape(-1),
        ], axis=1)
        pairs = np.concatenate([pos, neg], axis=0)
        labels = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
        loss, gw, gb = gnn_loss_and_grads(p, attrs, madj, pairs, labels)
        losses.append(loss / len(pairs))
        frac = epoch / cfg.epochs
        lr = max(cfg.learning_rate * (1.0 - frac), cfg.min_learning_rate) / len(pairs)
        for k_i in range(len(weights)):
            weights[k_i] -= lr * gw[k_i]
            self_weights[k_i] -= lr * gb[k_i]
    final = GnnParams(tuple(weights), tuple(self_weights), params.nonlinearity)
    hs, _ = gnn_forward(final, attrs, madj)
    return EmbeddingMatrix(g.node_ids, hs[-1].astype(np.float32), tuple(losses))
