"""Social-network graphs, hop distances, and relationship weights.

The social network is an undirected, unweighted graph over worker ids.
Relationship strength between two workers derives from their hop distance:
direct neighbours get weight 1.0, workers ``h >= 2`` hops apart get
``1 / (1 + h)``, and unreachable pairs get 0.  Recruiters only see a noisy
version of these weights; the noise scale per worker encodes how well the
recruiter knows that worker.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from . import rng
from .errors import DataError, EdgeListParseError, EmptyGraphError

#: Recruiter id reserved for the platform itself.
PLATFORM = -1

#: Hop-count sentinel for disconnected pairs (also the on-disk encoding).
UNREACHABLE = int(np.iinfo(np.uint32).max)

_HOP_MAGIC = b"CTH1"


@dataclass(frozen=True, eq=False)
class SocialGraph:
    """Immutable undirected graph; edges stored canonically as (u, v), u < v."""

    node_ids: tuple[int, ...]
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        ids = set(self.node_ids)
        if len(ids) != len(self.node_ids):
            raise DataError("duplicate node ids")
        for u, v in self.edges:
            if u >= v:
                raise DataError(f"edge ({u}, {v}) not in canonical order")
            if u not in ids or v not in ids:
                raise DataError(f"edge ({u}, {v}) references unknown node")

    @property
    def num_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def index(self) -> dict[int, int]:
        return {n: i for i, n in enumerate(self.node_ids)}

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        nbrs: dict[int, list[int]] = {n: [] for n in self.node_ids}
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return {n: tuple(sorted(ns)) for n, ns in nbrs.items()}

    def neighbors(self, node: int) -> tuple[int, ...]:
        return self.adjacency[node]

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return (u, v) in self.edges

    def degree(self, node: int) -> int:
        return len(self.adjacency[node])

    def csr(self) -> csr_matrix:
        n = self.num_nodes
        idx = self.index
        rows = np.empty(2 * self.num_edges, dtype=np.int32)
        cols = np.empty(2 * self.num_edges, dtype=np.int32)
        for i, (u, v) in enumerate(sorted(self.edges)):
            ui, vi = idx[u], idx[v]
            rows[2 * i], cols[2 * i] = ui, vi
            rows[2 * i + 1], cols[2 * i + 1] = vi, ui
        data = np.ones(len(rows), dtype=np.int8)
        return csr_matrix((data, (rows, cols)), shape=(n, n))

    def digest(self) -> str:
        """sha256 of the canonical serialization; used as a cache key."""
        h = hashlib.sha256()
        h.update(("nodes:" + ",".join(map(str, sorted(self.node_ids)))).encode())
        for u, v in sorted(self.edges):
            h.update(f"\n{u} {v}".encode())
        return h.hexdigest()


def make_graph(node_ids, edges) -> SocialGraph:
    """Build a SocialGraph, canonicalizing edge order and dropping self-loops."""
    canon = set()
    for u, v in edges:
        if u == v:
            continue
        canon.add((u, v) if u < v else (v, u))
    return SocialGraph(tuple(sorted(node_ids)), frozenset(canon))


def load_edge_list(path) -> SocialGraph:
    """Parse a whitespace-separated edge list ('u v' per line, '#' comments).

    Duplicate edges collapse, self-loops are dropped, and node ids are the
    union of all endpoints.  Raises EdgeListParseError with the offending
    line number on malformed input and EmptyGraphError when no nodes remain.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"edge list not found: {path}")
    nodes: set[int] = set()
    edges: set[tuple[int, int]] = set()
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise EdgeListParseError(
                    f"expected two fields, got {len(parts)}", lineno
                )
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListParseError(
                    f"non-integer endpoint in {parts!r}", lineno
                ) from None
            nodes.add(u)
            nodes.add(v)
            if u != v:
                edges.add((u, v) if u < v else (v, u))
    if not nodes:
        raise EmptyGraphError(f"no nodes in {path}")
    return SocialGraph(tuple(sorted(nodes)), frozenset(edges))


def write_edge_list(path, g: SocialGraph) -> None:
    with open(path, "w") as fh:
        for u, v in sorted(g.edges):
            fh.write(f"{u} {v}\n")


@dataclass(frozen=True, eq=False)
class HopMatrix:
    """All-pairs hop counts; UNREACHABLE marks disconnected pairs."""

    node_ids: tuple[int, ...]
    hops: np.ndarray  # (n, n) uint32, symmetric, zero diagonal

    @cached_property
    def index(self) -> dict[int, int]:
        return {n: i for i, n in enumerate(self.node_ids)}

    def hop(self, u: int, v: int) -> int:
        return int(self.hops[self.index[u], self.index[v]])

    def submatrix(self, ids) -> "HopMatrix":
        """Restriction to a subset of nodes, keeping full-graph distances."""
        ids = tuple(sorted(ids))
        sel = np.array([self.index[i] for i in ids], dtype=np.intp)
        return HopMatrix(ids, self.hops[np.ix_(sel, sel)].copy())


def all_pairs_hops(g: SocialGraph) -> HopMatrix:
    """BFS hop counts between every node pair (scipy csgraph backend)."""
    n = g.num_nodes
    if n == 0:
        return HopMatrix((), np.zeros((0, 0), dtype=np.uint32))
    dist = shortest_path(g.csr(), method="D", unweighted=True, directed=False)
    hops = np.full((n, n), UNREACHABLE, dtype=np.uint32)
    finite = np.isfinite(dist)
    hops[finite] = dist[finite].astype(np.uint32)
    return HopMatrix(g.node_ids, hops)


@dataclass(frozen=True, eq=False)
class RelationModel:
    """True relationship weights plus per-worker perception-noise scales."""

    node_ids: tuple[int, ...]
    weights: np.ndarray      # (n, n) float64 in [0, 1], symmetric
    noise_sigma: np.ndarray  # (n,) float64 >= 0

    @cached_property
    def index(self) -> dict[int, int]:
        return {n: i for i, n in enumerate(self.node_ids)}

    def with_noise(self, sigma) -> "RelationModel":
        sigma = np.asarray(sigma, dtype=np.float64)
        if sigma.shape != (len(self.node_ids),):
            raise DataError("noise_sigma shape mismatch")
        if (sigma < 0).any():
            raise DataError("noise_sigma must be non-negative")
        return replace(self, noise_sigma=sigma)


def relation_weights(h: HopMatrix, direct_half: bool = False) -> RelationModel:
    """Relationship weights from hop counts.

    Weight is 1.0 for direct neighbours (or 0.5 with ``direct_half=True``,
    which applies 1/(1+hops) to direct edges too), 1/(1+hops) beyond, and 0
    for unreachable pairs.  The diagonal is zeroed; it is never read.
    """
    hops = h.hops
    n = len(h.node_ids)
    weights = np.zeros((n, n), dtype=np.float64)
    reachable = hops != np.uint32(UNREACHABLE)
    np.divide(1.0, 1.0 + hops, out=weights, where=reachable)
    if not direct_half:
        weights[hops == 1] = 1.0
    np.fill_diagonal(weights, 0.0)
    return RelationModel(h.node_ids, weights, np.zeros(n, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class PerceivedRelation:
    """A recruiter's noisy view of the relationship weights."""

    recruiter: int
    node_ids: tuple[int, ...]
    values: np.ndarray  # (n, n) float64 in [0, 1], symmetric

    @cached_property
    def index(self) -> dict[int, int]:
        return {n: i for i, n in enumerate(self.node_ids)}


def _recruiter_key(recruiter: int) -> int:
    # rng.stream folds negatives already, but keep platform distinct from
    # worker 2**64-1 should such an id ever appear.
    return 0 if recruiter == PLATFORM else int(recruiter) + 1


def perception_noise(rel: RelationModel, recruiter: int, seed: int) -> np.ndarray:
    """One N(0, sigma_w^2) draw per worker, keyed by (seed, recruiter, worker)."""
    noise = np.empty(len(rel.node_ids), dtype=np.float64)
    rk = _recruiter_key(recruiter)
    for i, wid in enumerate(rel.node_ids):
        gen = rng.stream(seed, rng.RELATION_NOISE, rk, wid)
        noise[i] = gen.standard_normal() * rel.noise_sigma[i]
    return noise


def perceive_relations(rel: RelationModel, recruiter: int, seed: int) -> PerceivedRelation:
    """Noisy pairwise weights: R + (noise_u + noise_v) / 2, clamped to [0, 1].

    Noise is drawn once per worker (not per pair), so the perceived matrix
    stays symmetric.  Unreachable pairs have true weight 0 and are perceived
    as pure (clamped) noise.
    """
    if recruiter != PLATFORM and recruiter not in rel.index:
        raise DataError(f"unknown recruiter id {recruiter}")
    noise = perception_noise(rel, recruiter, seed)
    values = rel.weights + 0.5 * (noise[:, None] + noise[None, :])
    np.clip(values, 0.0, 1.0, out=values)
    np.fill_diagonal(values, 0.0)
    return PerceivedRelation(recruiter, rel.node_ids, values)


def _pair_from_index(idx: np.ndarray, n: int):
    """Map linear indices over the upper triangle to (row, col) pairs."""
    # linear index of pair (i, j), i < j:  i*n - i*(i+1)/2 + (j - i - 1)
    rows = np.empty(len(idx), dtype=np.int64)
    cols = np.empty(len(idx), dtype=np.int64)
    offsets = np.cumsum(np.arange(n - 1, 0, -1))  # end offset per row
    starts = np.concatenate(([0], offsets[:-1]))
    row_of = np.searchsorted(offsets, idx, side="right")
    rows[:] = row_of
    cols[:] = idx - starts[row_of] + row_of + 1
    return rows, cols


def sample_subpopulation(g: SocialGraph, n: int, target_density: float, seed: int) -> SocialGraph:
    """Induced subgraph on n uniformly sampled nodes, adjusted to a density.

    Edges are added (uniformly over absent pairs) or removed (uniformly over
    present ones) until the count equals round(d * n * (n-1) / 2).  Node ids
    keep their original labels.
    """
    if n > g.num_nodes:
        raise DataError(f"cannot sample {n} workers from {g.num_nodes}")
    if n < 1:
        raise DataError("subpopulation size must be positive")
    if not 0.0 <= target_density <= 1.0:
        raise DataError(f"density {target_density} outside [0, 1]")
    gen = rng.stream(seed, rng.SAMPLING)
    all_ids = np.array(g.node_ids)
    chosen = np.sort(gen.choice(all_ids, size=n, replace=False))
    ids = tuple(int(x) for x in chosen)
    idx = {wid: i for i, wid in enumerate(ids)}
    picked = set(ids)

    def pair_index(i: int, j: int) -> int:
        return i * n - i * (i + 1) // 2 + (j - i - 1)

    present = set()
    for u, v in g.edges:
        if u in picked and v in picked:
            i, j = idx[u], idx[v]
            if i > j:
                i, j = j, i
            present.add(pair_index(i, j))

    total_pairs = n * (n - 1) // 2
    target = int(round(target_density * total_pairs))
    if len(present) > target:
        drop = gen.choice(np.sort(np.fromiter(present, dtype=np.int64)),
                          size=len(present) - target, replace=False)
        present.difference_update(int(d) for d in drop)
    elif len(present) < target:
        if present:
            absent = np.setdiff1d(
                np.arange(total_pairs, dtype=np.int64),
                np.sort(np.fromiter(present, dtype=np.int64)),
                assume_unique=True,
            )
        else:
            absent = np.arange(total_pairs, dtype=np.int64)
        add = gen.choice(absent, size=target - len(present), replace=False)
        present.update(int(a) for a in add)

    if present:
        lin = np.sort(np.fromiter(present, dtype=np.int64))
        rows, cols = _pair_from_index(lin, n)
        edges = frozenset((ids[int(i)], ids[int(j)]) for i, j in zip(rows, cols))
    else:
        edges = frozenset()
    return SocialGraph(ids, edges)


# --- hop-matrix sidecar cache -------------------------------------------------

def write_hop_cache(path, h: HopMatrix) -> None:
    """Binary sidecar: magic, uint32 node count, then row-major uint32 hops."""
    n = len(h.node_ids)
    with open(path, "wb") as fh:
        fh.write(_HOP_MAGIC)
        fh.write(struct.pack("<I", n))
        fh.write(np.ascontiguousarray(h.hops, dtype="<u4").tobytes())


def read_hop_cache(path, node_ids) -> HopMatrix:
    node_ids = tuple(sorted(node_ids))
    n = len(node_ids)
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _HOP_MAGIC:
            raise DataError(f"bad hop-cache magic in {path}")
        (count,) = struct.unpack("<I", fh.read(4))
        if count != n:
            raise DataError(
                f"hop cache holds {count} nodes, expected {n}"
            )
        data = np.frombuffer(fh.read(4 * n * n), dtype="<u4")
        if data.size != n * n:
            raise DataError(f"truncated hop cache {path}")
    return HopMatrix(node_ids, data.reshape(n, n).astype(np.uint32))


def hop_cache_path(cache_dir, g: SocialGraph) -> Path:
    return Path(cache_dir) / f"hops-{g.digest()[:16]}.bin"


def all_pairs_hops_cached(g: SocialGraph, cache_dir) -> HopMatrix:
    """all_pairs_hops with a content-hash-keyed sidecar file."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = hop_cache_path(cache_dir, g)
    if path.exists():
        return read_hop_cache(path, g.node_ids)
    h = all_pairs_hops(g)
    write_hop_cache(path, h)
    return h
