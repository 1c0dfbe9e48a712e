"""Cluster embedded workers and pick the candidate pool for the recruiter.

Two selection modes follow the two embedding flavors: the structure-only
pipeline picks one socially coherent cluster and hands all its members to
the search; the structure+attribute pipeline picks one cluster per
required skill and tags each member with the skills its cluster
represents.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import rng
from .domain import ObjectiveWeights, Project, RecruiterView
from .embed import EmbeddingMatrix
from .errors import DataError, PoolShapeError
from .graph import SocialGraph

EDGE_ONLY_K = 25
EDGE_ATTR_K = 36

MAX_LLOYD_ITER = 300
INERTIA_REL_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    """A hard partition of embedded nodes; empty clusters are kept."""

    node_ids: tuple[int, ...]
    labels: np.ndarray            # (n,) int32 in [0, k)
    centroids: np.ndarray         # (k, d)
    inertia_history: tuple[float, ...] = ()

    def __post_init__(self):
        if self.labels.shape != (len(self.node_ids),):
            raise DataError("one label per node required")
        if len(self.node_ids) and (
            self.labels.min() < 0 or self.labels.max() >= len(self.centroids)
        ):
            raise DataError("label outside [0, k)")

    @property
    def k(self) -> int:
        return len(self.centroids)

    @cached_property
    def _by_cluster(self) -> tuple[tuple[int, ...], ...]:
        groups: list[list[int]] = [[] for _ in range(self.k)]
        for node, label in zip(self.node_ids, self.labels):
            groups[label].append(node)
        return tuple(tuple(g) for g in groups)

    def members(self, cluster: int) -> tuple[int, ...]:
        return self._by_cluster[cluster]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def non_empty(self) -> tuple[int, ...]:
        return tuple(c for c in range(self.k) if self._by_cluster[c])


def _plus_plus_init(points: np.ndarray, k: int, gen: np.random.Generator) -> np.ndarray:
    n = len(points)
    centers = np.empty((k, points.shape[1]), dtype=np.float64)
    centers[0] = points[gen.integers(n)]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total > 0:
            pick = gen.choice(n, p=d2 / total)
        else:
            pick = gen.integers(n)
        centers[i] = points[pick]
        d2 = np.minimum(d2, np.sum((points - centers[i]) ** 2, axis=1))
    return centers


def kmeans(embedding: EmbeddingMatrix, k: int, seed: int = 0,
           max_iter: int = MAX_LLOYD_ITER,
           tol: float = INERTIA_REL_TOL) -> ClusterAssignment:
    """Seeded k-means++ / Lloyd clustering of the embedding rows.

    Stops when the relative inertia drop falls below ``tol`` or after
    ``max_iter`` rounds.  A cluster losing all members keeps its centroid
    and stays in the assignment.
    """
    points = np.asarray(embedding.vectors, dtype=np.float64)
    n = len(points)
    if k < 1 or k > n:
        raise DataError(f"k={k} outside [1, {n}]")
    gen = rng.stream(seed, rng.CLUSTER)
    centers = _plus_plus_init(points, k, gen)
    history: list[float] = []
    labels = np.zeros(n, dtype=np.int32)
    for _ in range(max_iter):
        d2 = (
            np.sum(points**2, axis=1)[:, None]
            - 2.0 * points @ centers.T
            + np.sum(centers**2, axis=1)[None, :]
        )
        labels = np.argmin(d2, axis=1).astype(np.int32)
        inertia = float(np.maximum(d2[np.arange(n), labels], 0.0).sum())
        for c in range(k):
            mask = labels == c
            if mask.any():
                centers[c] = points[mask].mean(axis=0)
        if history:
            prev = history[-1]
            history.append(inertia)
            if prev <= 0 or (prev - inertia) / prev < tol:
                break
        else:
            history.append(inertia)
    return ClusterAssignment(embedding.node_ids, labels, centers, tuple(history))


def modularity(g: SocialGraph, assignment: ClusterAssignment) -> float:
    """Newman modularity of the partition against the unweighted graph."""
    label_of = dict(zip(assignment.node_ids, assignment.labels))
    missing = [u for u in g.node_ids if u not in label_of]
    if missing:
        raise DataError(f"{len(missing)} graph nodes carry no cluster label")
    m = g.num_edges
    if m == 0:
        return 0.0
    k = assignment.k
    intra = np.zeros(k, dtype=np.float64)
    deg = np.zeros(k, dtype=np.float64)
    for u, v in g.edges:
        cu, cv = label_of[u], label_of[v]
        deg[cu] += 1
        deg[cv] += 1
        if cu == cv:
            intra[cu] += 1
    return float(np.sum(intra / m - (deg / (2.0 * m)) ** 2))


def _view_rows(assignment: ClusterAssignment, view: RecruiterView) -> np.ndarray:
    try:
        return np.array([view.index[w] for w in assignment.node_ids], dtype=np.intp)
    except KeyError as exc:
        raise DataError(f"clustered node {exc.args[0]} missing from view") from None


def score_clusters_edge_only(assignment: ClusterAssignment, project: Project,
                             view: RecruiterView,
                             weights: ObjectiveWeights) -> int:
    """Cluster whose members average the best per-skill efficiency.

    The efficiency of a member counts its perceived relation averaged over
    its cluster co-members, once per required skill.  Ties go to the lowest
    cluster index; empty clusters never win.
    """
    non_empty = assignment.non_empty()
    if not non_empty:
        raise PoolShapeError("all clusters are empty")
    rows = _view_rows(assignment, view)
    cols = np.asarray(project.required_skills, dtype=np.intp)
    lin = (
        weights.skill * view.perceived_skills[:, cols] / weights.skill_scale
        - weights.uncertainty * view.uncertainty[:, None] / weights.uncertainty_scale
        - weights.cost * view.costs[:, cols] / weights.cost_scale
    ).sum(axis=1)
    rel = view.perceived_relations.values
    best_c, best_score = -1, -np.inf
    for c in non_empty:
        members = rows[assignment.labels == c]
        total = float(lin[members].sum())
        if len(members) > 1:
            sub = rel[np.ix_(members, members)]
            per_member = (sub.sum(axis=1) - np.diag(sub)) / (len(members) - 1)
            total += (
                weights.relation * len(cols)
                * float(per_member.sum()) / weights.relation_scale
            )
        score = total / len(members)
        if score > best_score:
            best_c, best_score = c, score
    return best_c


def assign_skill_clusters(assignment: ClusterAssignment, project: Project,
                          view: RecruiterView) -> dict[int, int]:
    """Map each required skill to the cluster with the best mean perceived level.

    Skills are placed greedily in order of decreasing margin between their
    best and second-best available cluster, so a contested cluster goes to
    the skill that would lose the most elsewhere.  A cluster is reused only
    once every non-empty cluster is taken.  Ties fall to the lowest cluster
    index, then the lowest skill index.
    """
    non_empty = list(assignment.non_empty())
    required = project.required_skills
    if len(non_empty) < len(required):
        raise PoolShapeError(
            f"{len(non_empty)} non-empty clusters cannot host "
            f"{len(required)} required skills"
        )
    rows = _view_rows(assignment, view)
    means = np.full((assignment.k, len(required)), -np.inf)
    for c in non_empty:
        members = rows[assignment.labels == c]
        means[c] = view.perceived_skills[np.ix_(members, np.asarray(required))].mean(axis=0)

    result: dict[int, int] = {}
    available = list(non_empty)
    open_skills = list(range(len(required)))
    while open_skills:
        if not available:
            available = list(non_empty)
        best = None  # (margin, skill position, cluster)
        for j in open_skills:
            col = [(means[c, j], -c) for c in available]
            col.sort(reverse=True)
            margin = col[0][0] - col[1][0] if len(col) > 1 else np.inf
            cluster = -col[0][1]
            if best is None or margin > best[0]:
                best = (margin, j, cluster)
        _, j, cluster = best
        result[required[j]] = cluster
        open_skills.remove(j)
        available.remove(cluster)
    return result


@dataclass(frozen=True, eq=False)
class CandidatePool:
    """The reduced worker set handed to the search, with optional skill locks.

    ``skill_tags`` maps a worker to the required-skill indices it may fill;
    ``None`` leaves every worker eligible for every required skill.
    """

    worker_ids: tuple[int, ...]
    skill_tags: dict[int, tuple[int, ...]] | None = None

    def __post_init__(self):
        if not self.worker_ids:
            raise PoolShapeError("empty candidate pool")
        if len(set(self.worker_ids)) != len(self.worker_ids):
            raise DataError("duplicate worker in candidate pool")
        if self.skill_tags is not None:
            stray = set(self.skill_tags) - set(self.worker_ids)
            if stray:
                raise DataError(f"skill tags for workers outside the pool: {sorted(stray)}")

    def __len__(self) -> int:
        return len(self.worker_ids)

    def __iter__(self):
        return iter(self.worker_ids)

    def allowed(self, worker_id: int, skill_index: int) -> bool:
        if self.skill_tags is None:
            return True
        return skill_index in self.skill_tags.get(worker_id, ())


def candidate_pool(assignment: ClusterAssignment, selection) -> CandidatePool:
    """Materialize the pool from either scorer's output.

    An integer selects one cluster (structure-only mode, no tags); a
    skill-to-cluster mapping unions the chosen clusters and locks each
    worker to the skills its cluster represents.
    """
    if isinstance(selection, (int, np.integer)):
        return CandidatePool(tuple(sorted(assignment.members(int(selection)))))
    tags: dict[int, list[int]] = {}
    for skill, cluster in selection.items():
        for w in assignment.members(cluster):
            tags.setdefault(w, []).append(int(skill))
    ids = tuple(sorted(tags))
    return CandidatePool(ids, {w: tuple(sorted(tags[w])) for w in ids})


def write_cluster_csv(path, assignment: ClusterAssignment) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["node_id", "cluster"])
        for node, label in zip(assignment.node_ids, assignment.labels):
            out.writerow([node, int(label)])


def read_cluster_csv(path, centroids: np.ndarray | None = None) -> ClusterAssignment:
    nodes: list[int] = []
    labels: list[int] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["node_id", "cluster"]:
            raise DataError(f"unexpected cluster CSV header {header}")
        for row in reader:
            try:
                nodes.append(int(row[0]))
                labels.append(int(row[1]))
            except (ValueError, IndexError):
                raise DataError(f"malformed cluster row {row}") from None
    if not nodes:
        raise DataError("cluster CSV has no rows")
    arr = np.array(labels, dtype=np.int32)
    k = int(arr.max()) + 1
    if centroids is None:
        centroids = np.zeros((k, 1), dtype=np.float64)
    return ClusterAssignment(tuple(nodes), arr, centroids)
