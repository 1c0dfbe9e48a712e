"""End-to-end plumbing: dataset preparation, embedding/cluster artifacts,
their CSV formats, and small self-contained demo instances for the CLI."""

from __future__ import annotations

import csv
import hashlib
import os
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from . import rng
from .clustering import (
    EDGE_ATTR_K,
    EDGE_ONLY_K,
    ClusterAssignment,
    kmeans,
)
from .dataset import (
    SynthesisConfig,
    assign_categories,
    facebook_scale_graph,
    synthesize_attributes,
)
from .domain import Project, Worker
from .embed import (
    EDGE_ATTR_DEFAULTS,
    EDGE_ONLY_DEFAULTS,
    EmbeddingMatrix,
    TrainConfig,
    embed_attributed,
    generate_walks,
    train_skipgram,
)
from .embed.reduce import tsne_embed
from .errors import DataError
from .graph import (
    RelationModel,
    SocialGraph,
    all_pairs_hops,
    load_edge_list,
    make_graph,
    relation_weights,
    write_edge_list,
)

EDGE_ONLY = "edge"
EDGE_ATTR = "edge_attr"

FACEBOOK_ENV = "CROWDTEAM_FACEBOOK"
FACEBOOK_LOCAL = Path("data") / "facebook_combined.txt"


def locate_facebook() -> Path | None:
    """Real survey edge list if present (env override, then ./data)."""
    env = os.environ.get(FACEBOOK_ENV)
    if env and Path(env).is_file():
        return Path(env)
    if FACEBOOK_LOCAL.is_file():
        return FACEBOOK_LOCAL
    return None


def prepare_graph(seed: int = 0, path=None) -> tuple[SocialGraph, str]:
    """The benchmark graph and where it came from ('file' or 'surrogate')."""
    source = Path(path) if path else locate_facebook()
    if source is not None:
        return load_edge_list(source), "file"
    g, _ = facebook_scale_graph(seed)
    return g, "surrogate"


@dataclass(frozen=True, eq=False)
class DatasetBundle:
    graph: SocialGraph
    categories: dict[int, str]
    workers: list[Worker]
    synthesis: SynthesisConfig

    def worker(self, node_id: int) -> Worker:
        return self._by_id[node_id]

    @cached_property
    def _by_id(self) -> dict[int, Worker]:
        return {w.id: w for w in self.workers}


def build_dataset(seed: int = 0, graph: SocialGraph | None = None,
                  synthesis: SynthesisConfig | None = None) -> DatasetBundle:
    cfg = synthesis or SynthesisConfig(seed=seed)
    if graph is None:
        graph, _ = prepare_graph(seed)
    categories = assign_categories(graph, cfg)
    workers = synthesize_attributes(graph, categories, cfg)
    return DatasetBundle(graph, categories, workers, cfg)


# --- embedding and cluster artifacts ----------------------------------------------

def build_embedding(g: SocialGraph, workers, mode: str,
                    cfg: TrainConfig | None = None) -> EmbeddingMatrix:
    """Train the structure-only or structure+attribute embedding."""
    if mode == EDGE_ONLY:
        cfg = cfg or EDGE_ONLY_DEFAULTS
        return train_skipgram(generate_walks(g, cfg), cfg)
    if mode == EDGE_ATTR:
        cfg = cfg or EDGE_ATTR_DEFAULTS
        return embed_attributed(g, workers, cfg)
    raise DataError(f"unknown embedding mode {mode!r}")


def build_clusters(embedding: EmbeddingMatrix, mode: str, k: int | None = None,
                   seed: int = 0, reduce_first: bool = True,
                   tsne_iterations: int = 500) -> ClusterAssignment:
    """Cluster the embedding, by default on its 2-D t-SNE reduction."""
    if k is None:
        k = EDGE_ONLY_K if mode == EDGE_ONLY else EDGE_ATTR_K
    source = embedding
    if reduce_first:
        reduced = tsne_embed(embedding.vectors, 2, iterations=tsne_iterations, seed=seed)
        source = EmbeddingMatrix(embedding.node_ids, reduced, ())
    return kmeans(source, k, seed=seed)


def write_embedding_csv(path, embedding: EmbeddingMatrix) -> None:
    dim = embedding.dim
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["node_id"] + [f"z_{i}" for i in range(dim)])
        for node, vec in zip(embedding.node_ids, embedding.vectors):
            out.writerow([node] + [repr(float(x)) for x in vec])


def read_embedding_csv(path) -> EmbeddingMatrix:
    nodes: list[int] = []
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "node_id":
            raise DataError(f"unexpected embedding CSV header {header}")
        for row in reader:
            try:
                nodes.append(int(row[0]))
                rows.append([float(x) for x in row[1:]])
            except (ValueError, IndexError):
                raise DataError(f"malformed embedding row {row[:2]}...") from None
    if not nodes:
        raise DataError("embedding CSV has no rows")
    return EmbeddingMatrix(tuple(nodes), np.asarray(rows, dtype=np.float32), ())


def config_hash(params: dict) -> str:
    """Short stable digest of a flat parameter mapping."""
    text = "\n".join(f"{k}={params[k]}" for k in sorted(params))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


# --- demo instances (CLI `recruit` without prepared artifacts) --------------------

@dataclass(frozen=True, eq=False)
class DemoInstance:
    graph: SocialGraph
    workers: list[Worker]
    relations: RelationModel
    project: Project


def make_demo_instance(num_workers: int, num_required: int, density: float = 0.5,
                       seed: int = 0,
                       synthesis: SynthesisConfig | None = None) -> DemoInstance:
    """A self-contained random instance: graph, attributes, relations, project."""
    cfg = synthesis or SynthesisConfig(seed=seed)
    if num_workers < 1:
        raise DataError("need at least one worker")
    if not 0.0 <= density <= 1.0:
        raise DataError(f"density {density} outside [0, 1]")
    if num_required > len(cfg.catalog):
        raise DataError(
            f"{num_required} required skills exceed the {len(cfg.catalog)}-skill catalog"
        )
    n = num_workers
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    gen = rng.stream(seed, rng.SAMPLING, 17)
    gen.shuffle(pairs)
    count = int(round(density * len(pairs)))
    g = make_graph(range(n), pairs[:count])
    categories = assign_categories(g, cfg)
    workers = synthesize_attributes(g, categories, cfg)
    relations = relation_weights(all_pairs_hops(g))
    project = Project(id=0, required_skills=tuple(range(num_required)))
    return DemoInstance(g, workers, relations, project)


def subset_bundle(bundle: DatasetBundle, node_ids) -> list[Worker]:
    """The bundle's workers restricted to ``node_ids``, in that order."""
    return [bundle.worker(i) for i in node_ids]


def save_graph(path, g: SocialGraph) -> None:
    write_edge_list(path, g)


def edge_only_train_config(seed: int) -> TrainConfig:
    return replace(EDGE_ONLY_DEFAULTS, seed=seed)


def edge_attr_train_config(seed: int) -> TrainConfig:
    return replace(EDGE_ATTR_DEFAULTS, seed=seed)
