"""Random-walk corpus generation.

Each node sources ``walks_per_node`` truncated walks.  Every walk draws
from its own seeded stream keyed by (seed, node, walk index), so corpora
are reproducible and independent of generation order.  Setting the
node2vec-style biases away from 1.0 switches to second-order walks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import rng
from ..graph import SocialGraph
from .config import TrainConfig


@dataclass(frozen=True, eq=False)
class WalkCorpus:
    node_ids: tuple[int, ...]
    walks: tuple[np.ndarray, ...]  # node indices (not ids), int32
    walk_length: int
    walks_per_node: int

    @property
    def num_walks(self) -> int:
        return len(self.walks)

    def walks_as_ids(self):
        ids = np.asarray(self.node_ids)
        return [ids[w] for w in self.walks]


def _first_order_walk(start: int, nbrs, length: int, gen) -> np.ndarray:
    walk = np.empty(length, dtype=np.int32)
    walk[0] = start
    cur = start
    steps = 1
    for _ in range(length - 1):
        adj = nbrs[cur]
        if len(adj) == 0:
            break
        cur = adj[gen.integers(len(adj))]
        walk[steps] = cur
        steps += 1
    return walk[:steps]


def _biased_walk(start: int, nbrs, nbr_sets, length: int, p: float, q: float, gen) -> np.ndarray:
    walk = np.empty(length, dtype=np.int32)
    walk[0] = start
    prev = -1
    cur = start
    steps = 1
    for _ in range(length - 1):
        adj = nbrs[cur]
        if len(adj) == 0:
            break
        if prev < 0:
            nxt = adj[gen.integers(len(adj))]
        else:
            prev_set = nbr_sets[prev]
            weights = np.empty(len(adj), dtype=np.float64)
            for i, cand in enumerate(adj):
                if cand == prev:
                    weights[i] = 1.0 / p
                elif cand in prev_set:
                    weights[i] = 1.0
                else:
                    weights[i] = 1.0 / q
            weights /= weights.sum()
            nxt = adj[gen.choice(len(adj), p=weights)]
        walk[steps] = nxt
        steps += 1
        prev, cur = cur, nxt
    return walk[:steps]


def generate_walks(g: SocialGraph, cfg: TrainConfig) -> WalkCorpus:
    """Walk corpus over the graph; isolated nodes yield length-1 walks."""
    ids = g.node_ids
    index = g.index
    nbrs = [np.array([index[v] for v in g.neighbors(u)], dtype=np.int64)
            for u in ids]
    first_order = cfg.return_bias == 1.0 and cfg.inout_bias == 1.0
    nbr_sets = None if first_order else [set(a.tolist()) for a in nbrs]
    walks = []
    for ni in range(len(ids)):
        for wi in range(cfg.walks_per_node):
            gen = rng.stream(cfg.seed, rng.WALKS, ni, wi)
            if first_order:
                walks.append(_first_order_walk(ni, nbrs, cfg.walk_length, gen))
            else:
                walks.append(_biased_walk(
                    ni, nbrs, nbr_sets, cfg.walk_length,
                    cfg.return_bias, cfg.inout_bias, gen,
                ))
    return WalkCorpus(
        node_ids=tuple(ids),
        walks=tuple(walks),
        walk_length=cfg.walk_length,
        walks_per_node=cfg.walks_per_node,
    )


def pad_walks(corpus: WalkCorpus):
    """(walks, lengths) as fixed-width int32 arrays for the training kernels."""
    lens = np.array([len(w) for w in corpus.walks], dtype=np.int32)
    out = np.zeros((len(corpus.walks), corpus.walk_length), dtype=np.int32)
    for i, w in enumerate(corpus.walks):
        out[i, :len(w)] = w
    return out, lens
