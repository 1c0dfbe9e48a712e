"""Monte-Carlo experiment harness.

Four experiment kinds, all driven by a line-oriented ``key = value`` spec
file and emitting long-format CSV (one row per configuration and metric)
with a trailing config-hash comment:

- strategy_tradeoff: platform vs leader recruiting across a social-density
  sweep, common random numbers across densities via nested edge sets.
- quality_vs_oracle: exact solver vs the two embedding-clustered GA
  pipelines on small sampled instances, relations taken from the full
  graph's hop matrix.
- runtime_scaling: exact-solver wall clock over a joint (team size, pool
  size) grid, plus the GA pipeline's per-recruitment time at scale.
- cluster_quality: full-pipeline modularity for both embedding flavors.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import rng
from .clustering import (
    EDGE_ATTR_K,
    EDGE_ONLY_K,
    CandidatePool,
    ClusterAssignment,
    assign_skill_clusters,
    candidate_pool,
    kmeans,
    modularity,
    score_clusters_edge_only,
)
from .domain import (
    ObjectiveWeights,
    Project,
    RecruiterView,
    Team,
    make_view,
)
from .embed import EmbeddingMatrix
from .errors import DataError, PoolShapeError
from .ga import GaConfig, evolve, init_population
from .graph import (
    PLATFORM,
    HopMatrix,
    all_pairs_hops,
    make_graph,
    relation_weights,
)
from .pipeline import (
    EDGE_ATTR,
    EDGE_ONLY,
    DatasetBundle,
    build_embedding,
    config_hash,
    edge_attr_train_config,
    edge_only_train_config,
)

STRATEGY_TRADEOFF = "strategy_tradeoff"
QUALITY_VS_ORACLE = "quality_vs_oracle"
RUNTIME_SCALING = "runtime_scaling"
CLUSTER_QUALITY = "cluster_quality"

KINDS = (STRATEGY_TRADEOFF, QUALITY_VS_ORACLE, RUNTIME_SCALING, CLUSTER_QUALITY)

_DENSITY_GRID = tuple(round(0.1 * i, 1) for i in range(1, 11))


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    realizations: int = 200
    num_workers: tuple[int, ...] = (14,)
    num_required: int = 5
    densities: tuple[float, ...] = _DENSITY_GRID
    eta: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    base_sigma: float = 0.3
    seed: int = 0
    output: str = "results.csv"
    ga_population: int = 1000
    ga_iterations: int = 500
    required_grid: tuple[int, ...] = (2, 3, 4, 5)
    ga_pool_workers: int = 1800
    quality_k_edge: int = 5
    resample_cap: int = 200

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"unknown experiment kind {self.kind!r}")
        if self.realizations < 1:
            raise DataError("realizations must be at least 1")
        if any(not 0.0 <= d <= 1.0 for d in self.densities):
            raise DataError("densities must lie in [0, 1]")
        if len(self.eta) != 4:
            raise DataError("eta needs exactly four weights")
        if self.kind == RUNTIME_SCALING and len(self.required_grid) != len(self.num_workers):
            raise DataError(
                "runtime_scaling pairs required_grid with num_workers; "
                f"got {len(self.required_grid)} vs {len(self.num_workers)} entries"
            )

    def params(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_TUPLE_INT = ("num_workers", "required_grid")
_TUPLE_FLOAT = ("densities", "eta")
_INT = ("realizations", "num_required", "seed", "ga_population",
        "ga_iterations", "ga_pool_workers", "quality_k_edge", "resample_cap")
_FLOAT = ("base_sigma",)
_STR = ("kind", "output")


def parse_spec(path) -> ExperimentSpec:
    """Read a ``key = value`` spec file; unknown keys are errors."""
    values: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataError(f"line {lineno}: expected 'key = value', got {line!r}")
            key, _, text = line.partition("=")
            key, text = key.strip(), text.strip()
            try:
                if key in _TUPLE_INT:
                    values[key] = tuple(int(x) for x in text.split(","))
                elif key in _TUPLE_FLOAT:
                    values[key] = tuple(float(x) for x in text.split(","))
                elif key in _INT:
                    values[key] = int(text)
                elif key in _FLOAT:
                    values[key] = float(text)
                elif key in _STR:
                    values[key] = text
                else:
                    raise DataError(f"line {lineno}: unknown spec key {key!r}")
            except ValueError:
                raise DataError(
                    f"line {lineno}: cannot parse {text!r} for key {key!r}"
                ) from None
    if "kind" not in values:
        raise DataError("spec file does not set 'kind'")
    try:
        return ExperimentSpec(**values)
    except (TypeError, ValueError) as exc:
        raise DataError(f"bad spec values: {exc}") from None


@dataclass(frozen=True, eq=False)
class ResultTable:
    """Long-format results: config columns, then (metric, value)."""

    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    aggregates: dict[str, float] = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def metric(self, metric: str, **config) -> list:
        """Values of one metric filtered by config column equality."""
        pos = {c: i for i, c in enumerate(self.columns)}
        out = []
        for row in self.rows:
            if row[pos["metric"]] != metric:
                continue
            if all(row[pos[k]] == v for k, v in config.items()):
                out.append(row[pos["value"]])
        return out


def write_result_csv(path, table: ResultTable) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(table.columns) + "\n")
        for row in table.rows:
            fh.write(",".join(
                repr(x) if isinstance(x, float) else str(x) for x in row
            ) + "\n")
        for key in sorted(table.aggregates):
            fh.write(f"# {key}={table.aggregates[key]!r}\n")
        fh.write(f"# config_hash={config_hash(table.params)}\n")


# Normalization ceiling for costs: the synthesis model tops out around
# max(cost_base) for an expert with positive noise; one fixed scale keeps
# objectives comparable across realizations and strategies.
DEFAULT_COST_CEILING = 60.0


def _weights(spec: ExperimentSpec) -> ObjectiveWeights:
    """Instance-independent weights: fixed scales keep the two strategies
    and all solvers on one scale within a realization."""
    unc_scale = spec.base_sigma**2 if spec.base_sigma > 0 else 1.0
    return ObjectiveWeights(
        skill=spec.eta[0], uncertainty=spec.eta[1],
        cost=spec.eta[2], relation=spec.eta[3],
        uncertainty_scale=unc_scale,
        cost_scale=DEFAULT_COST_CEILING,
    )


def _sorted_sample(gen: np.random.Generator, population, size: int) -> tuple:
    return tuple(sorted(gen.choice(np.asarray(population), size=size, replace=False)))


# --- strategy trade-off -----------------------------------------------------------

def run_strategy_tradeoff(spec: ExperimentSpec, bundle: DatasetBundle) -> ResultTable:
    """Platform vs leader recruiting across the density grid.

    Each realization fixes its node sample and a random ordering of all
    candidate pairs (induced original edges first), so the edge set at a
    lower density is a subset of the set at any higher one; perception
    noise is keyed per (recruiter, worker) and therefore also shared across
    the sweep.
    """
    from .exact import solve_leader, solve_platform

    weights = _weights(spec)
    metrics = ("mean_skill", "mean_uncertainty", "mean_cost", "relation_rate")
    rows = []
    for n_workers in spec.num_workers:
        acc = {
            (d, strat, m): 0.0
            for d in spec.densities for strat in ("platform", "leader") for m in metrics
        }
        for r in range(spec.realizations):
            gen = rng.stream(spec.seed, rng.SAMPLING, r)
            sample = _sorted_sample(gen, bundle.graph.node_ids, n_workers)
            workers = [bundle.worker(i) for i in sample]
            index = {w: i for i, w in enumerate(sample)}
            present = [
                (min(index[u], index[v]), max(index[u], index[v]))
                for u, v in bundle.graph.edges
                if u in index and v in index
            ]
            present_set = set(present)
            absent = [
                (i, j)
                for i in range(n_workers) for j in range(i + 1, n_workers)
                if (i, j) not in present_set
            ]
            gen.shuffle(present)
            gen.shuffle(absent)
            ordering = present + absent
            total_pairs = len(ordering)
            view_seed = rng.spawn_key(spec.seed, rng.REALIZATION, r)
            project = Project(id=r, required_skills=tuple(range(spec.num_required)))

            for density in spec.densities:
                count = int(round(density * total_pairs))
                g = make_graph(range(n_workers), ordering[:count])
                sub_workers = [
                    replace_worker_id(workers[i], i) for i in range(n_workers)
                ]
                rel = relation_weights(all_pairs_hops(g))
                pview = make_view(sub_workers, rel, PLATFORM, view_seed, spec.base_sigma)
                team_p = solve_platform(range(n_workers), project, pview, weights)

                def leader_view(leader, _rel=rel, _workers=sub_workers):
                    return make_view(_workers, _rel, leader, view_seed, spec.base_sigma)

                team_l = solve_leader(range(n_workers), project, leader_view, weights)
                lview = leader_view(team_l.leader)

                for strat, team, view in (
                    ("platform", team_p, pview), ("leader", team_l, lview),
                ):
                    got = _tradeoff_metrics(team, view, workers, rel)
                    for m in metrics:
                        acc[(density, strat, m)] += got[m]
        for density in spec.densities:
            for strat in ("platform", "leader"):
                for m in metrics:
                    rows.append((
                        density, n_workers, strat, m,
                        acc[(density, strat, m)] / spec.realizations,
                    ))
    return ResultTable(
        ("density", "num_workers", "strategy", "metric", "value"),
        tuple(rows), {}, spec.params(),
    )


def replace_worker_id(worker, new_id: int):
    """The same attributes under a positional id (subgraph node space)."""
    return replace(worker, id=new_id)


def _tradeoff_metrics(team: Team, view: RecruiterView, original_workers,
                      rel) -> dict:
    skills, costs, unc = [], [], []
    for skill, worker in team.assignment:
        w = original_workers[worker]
        skills.append(float(w.skill_levels[skill]))
        costs.append(float(w.costs[skill]))
        unc.append(float(view.uncertainty[view.index[worker]]))
    members = team.members
    rels = [
        float(rel.weights[rel.index[u], rel.index[v]])
        for i, u in enumerate(members) for v in members[i + 1:]
    ]
    return {
        "mean_skill": float(np.mean(skills)),
        "mean_uncertainty": float(np.mean(unc)),
        "mean_cost": float(np.mean(costs)),
        "relation_rate": float(np.mean(rels)) if rels else 0.0,
    }


# --- quality vs oracle ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QualityArtifacts:
    """Full-graph products reused by every realization."""

    hops: HopMatrix
    edge_embedding: EmbeddingMatrix
    attr_embedding: EmbeddingMatrix


def prepare_quality_artifacts(bundle: DatasetBundle, seed: int = 0,
                              edge_cfg=None, attr_cfg=None) -> QualityArtifacts:
    hops = all_pairs_hops(bundle.graph)
    edge = build_embedding(bundle.graph, bundle.workers, EDGE_ONLY,
                           edge_cfg or edge_only_train_config(seed))
    attr = build_embedding(bundle.graph, bundle.workers, EDGE_ATTR,
                           attr_cfg or edge_attr_train_config(seed))
    return QualityArtifacts(hops, edge, attr)


def _instance_view(bundle: DatasetBundle, hops: HopMatrix, sample,
                   seed: int, base_sigma: float):
    workers = [bundle.worker(i) for i in sample]
    rel = relation_weights(hops.submatrix(sample))
    view = make_view(workers, rel, PLATFORM, seed, base_sigma)
    return workers, rel, view


def _subset_embedding(embedding: EmbeddingMatrix, sample) -> EmbeddingMatrix:
    sel = np.array([embedding.index[i] for i in sample], dtype=np.intp)
    return EmbeddingMatrix(tuple(sample), embedding.vectors[sel], ())


def _edge_pool(assignment: ClusterAssignment, project, view, weights):
    best = score_clusters_edge_only(assignment, project, view, weights)
    pool = candidate_pool(assignment, best)
    if len(pool) < project.num_required:
        raise PoolShapeError(
            f"best cluster holds {len(pool)} workers, need {project.num_required}"
        )
    return pool


def _attr_pool(assignment: ClusterAssignment, project, view):
    mapping = assign_skill_clusters(assignment, project, view)
    return candidate_pool(assignment, mapping)


def run_quality_vs_oracle(spec: ExperimentSpec, bundle: DatasetBundle,
                          artifacts: QualityArtifacts) -> ResultTable:
    """Exact vs the two clustered GA pipelines on sampled instances.

    The edge pipeline clusters each sample into ``quality_k_edge`` social
    groups and keeps the best-scoring one; the attribute pipeline clusters
    into one group per catalog skill and locks each required skill to its
    representative group.  Infeasible draws (the scored cluster too small,
    or fewer non-empty clusters than required skills) are resampled; past
    ``resample_cap`` tries the realization falls back to the whole sample
    so it still completes.
    """
    from .exact import solve_platform

    weights = _weights(spec)
    n_workers = spec.num_workers[0]
    k_attr = len(bundle.synthesis.catalog)
    project = Project(id=0, required_skills=tuple(range(spec.num_required)))
    rows = []
    resamples = 0
    fallbacks = 0
    sums = {"exact": 0.0, "edge_ga": 0.0, "attr_ga": 0.0}

    for r in range(spec.realizations):
        pools = None
        for attempt in range(spec.resample_cap):
            gen = rng.stream(spec.seed, rng.SAMPLING, 1000 + r, attempt)
            sample = _sorted_sample(gen, bundle.graph.node_ids, n_workers)
            view_seed = rng.spawn_key(spec.seed, rng.REALIZATION, r, attempt)
            workers, rel, view = _instance_view(
                bundle, artifacts.hops, sample, view_seed, spec.base_sigma
            )
            edge_vecs = _subset_embedding(artifacts.edge_embedding, sample)
            attr_vecs = _subset_embedding(artifacts.attr_embedding, sample)
            edge_clusters = kmeans(edge_vecs, spec.quality_k_edge,
                                   seed=rng.spawn_key(view_seed, rng.CLUSTER, 0))
            attr_clusters = kmeans(attr_vecs, k_attr,
                                   seed=rng.spawn_key(view_seed, rng.CLUSTER, 1))
            try:
                edge_pool = _edge_pool(edge_clusters, project, view, weights)
                attr_pool = _attr_pool(attr_clusters, project, view)
            except PoolShapeError:
                resamples += 1
                continue
            pools = (sample, view, edge_pool, attr_pool)
            break
        if pools is None:
            # Capped out: run both pipelines over the whole sample.
            fallbacks += 1
            whole = CandidatePool(sample)
            pools = (sample, view, whole, whole)

        sample, view, edge_pool, attr_pool = pools
        exact_team = solve_platform(sample, project, view, weights)
        results = {"exact": exact_team.objective_value}
        for name, pool, tag in (("edge_ga", edge_pool, 0), ("attr_ga", attr_pool, 1)):
            cfg = GaConfig(
                population=spec.ga_population, iterations=spec.ga_iterations,
                seed=rng.spawn_key(spec.seed, rng.GA, r, tag),
            )
            out = evolve(init_population(pool, project, cfg), view, weights, cfg)
            results[name] = out.best_fitness
        for name in ("exact", "edge_ga", "attr_ga"):
            rows.append((r, name, "objective", results[name]))
            sums[name] += results[name]

    n = spec.realizations
    aggregates = {
        "mean_exact": sums["exact"] / n,
        "mean_edge_ga": sums["edge_ga"] / n,
        "mean_attr_ga": sums["attr_ga"] / n,
        "ratio_edge_ga": sums["edge_ga"] / sums["exact"] if sums["exact"] else 0.0,
        "ratio_attr_ga": sums["attr_ga"] / sums["exact"] if sums["exact"] else 0.0,
        "resamples": float(resamples),
        "fallbacks": float(fallbacks),
    }
    return ResultTable(
        ("realization", "method", "metric", "value"),
        tuple(rows), aggregates, spec.params(),
    )


# --- runtime scaling --------------------------------------------------------------

def run_runtime_scaling(spec: ExperimentSpec, bundle: DatasetBundle,
                        artifacts: QualityArtifacts) -> ResultTable:
    """Wall-clock growth of the exact solver, and the GA pipeline at scale.

    The exact solver runs over (required_grid[i], num_workers[i]) pairs;
    the GA pipeline (cluster selection + search, embedding excluded as a
    one-time cost) is timed on ``ga_pool_workers`` sampled workers.
    """
    from .exact import BOUND_NONE, SolverConfig, solve_platform

    weights = _weights(spec)
    # Disable the greedy upper bound for the timed solves: pruning makes
    # wall time depend on how early each instance's optimum is found, while
    # the scaling curve is meant to track the assignment-space growth.
    solver_cfg = SolverConfig(bound_mode=BOUND_NONE)

    # Untimed warm-up solve so first-call overhead (imports, allocator and
    # cache effects) is not billed to the smallest grid point.
    warm = _sorted_sample(
        rng.stream(spec.seed, rng.SAMPLING, 1999), bundle.graph.node_ids,
        min(spec.num_workers),
    )
    _, _, warm_view = _instance_view(
        bundle, artifacts.hops, warm,
        rng.spawn_key(spec.seed, rng.REALIZATION, 1999), spec.base_sigma,
    )
    solve_platform(
        warm, Project(id=0, required_skills=tuple(range(min(spec.required_grid)))),
        warm_view, weights, cfg=solver_cfg,
    )

    rows = []
    for n_req, n_workers in zip(spec.required_grid, spec.num_workers):
        project = Project(id=0, required_skills=tuple(range(n_req)))
        times = []
        for r in range(spec.realizations):
            gen = rng.stream(spec.seed, rng.SAMPLING, 2000 + r, n_workers)
            sample = _sorted_sample(gen, bundle.graph.node_ids, n_workers)
            view_seed = rng.spawn_key(spec.seed, rng.REALIZATION, 2000 + r, n_workers)
            _, _, view = _instance_view(
                bundle, artifacts.hops, sample, view_seed, spec.base_sigma
            )
            start = time.perf_counter()
            solve_platform(sample, project, view, weights, cfg=solver_cfg)
            times.append(time.perf_counter() - start)
        rows.append(("exact", n_workers, n_req, "mean_seconds", float(np.mean(times))))

    project = Project(id=0, required_skills=tuple(range(spec.num_required)))
    ga_times = []
    for r in range(spec.realizations):
        gen = rng.stream(spec.seed, rng.SAMPLING, 3000 + r)
        sample = _sorted_sample(gen, bundle.graph.node_ids, spec.ga_pool_workers)
        view_seed = rng.spawn_key(spec.seed, rng.REALIZATION, 3000 + r)
        _, _, view = _instance_view(
            bundle, artifacts.hops, sample, view_seed, spec.base_sigma
        )
        attr_vecs = _subset_embedding(artifacts.attr_embedding, sample)
        start = time.perf_counter()
        clusters = kmeans(attr_vecs, EDGE_ATTR_K,
                          seed=rng.spawn_key(view_seed, rng.CLUSTER, 2))
        pool = _attr_pool(clusters, project, view)
        cfg = GaConfig(population=spec.ga_population, iterations=spec.ga_iterations,
                       seed=rng.spawn_key(spec.seed, rng.GA, 3000 + r, 2))
        evolve(init_population(pool, project, cfg), view, weights, cfg)
        ga_times.append(time.perf_counter() - start)
    rows.append((
        "ga_pipeline", spec.ga_pool_workers, spec.num_required,
        "mean_seconds", float(np.mean(ga_times)),
    ))
    return ResultTable(
        ("solver", "num_workers", "num_required", "metric", "value"),
        tuple(rows), {}, spec.params(),
    )


# --- cluster quality --------------------------------------------------------------

def run_cluster_quality(spec: ExperimentSpec, bundle: DatasetBundle,
                        artifacts: QualityArtifacts | None = None,
                        tsne_iterations: int = 500,
                        reduce_first: bool = True) -> ResultTable:
    """Full-pipeline modularity for both embedding flavors (k = 25 / 36)."""
    from .pipeline import build_clusters

    if artifacts is None:
        artifacts = prepare_quality_artifacts(bundle, spec.seed)
    rows = []
    for mode, embedding, k in (
        (EDGE_ONLY, artifacts.edge_embedding, EDGE_ONLY_K),
        (EDGE_ATTR, artifacts.attr_embedding, EDGE_ATTR_K),
    ):
        clusters = build_clusters(
            embedding, mode, k=k, seed=spec.seed,
            reduce_first=reduce_first, tsne_iterations=tsne_iterations,
        )
        q = modularity(bundle.graph, clusters)
        rows.append((mode, k, "modularity", q))
    rows.append(("graph", 0, "num_nodes", float(bundle.graph.num_nodes)))
    rows.append(("graph", 0, "num_edges", float(bundle.graph.num_edges)))
    return ResultTable(
        ("mode", "k", "metric", "value"), tuple(rows), {}, spec.params(),
    )


def run_experiment(spec: ExperimentSpec, bundle: DatasetBundle,
                   artifacts: QualityArtifacts | None = None) -> ResultTable:
    """Dispatch on the spec kind, building artifacts when required."""
    if spec.kind == STRATEGY_TRADEOFF:
        return run_strategy_tradeoff(spec, bundle)
    if artifacts is None:
        artifacts = prepare_quality_artifacts(bundle, spec.seed)
    if spec.kind == QUALITY_VS_ORACLE:
        return run_quality_vs_oracle(spec, bundle, artifacts)
    if spec.kind == RUNTIME_SCALING:
        return run_runtime_scaling(spec, bundle, artifacts)
    return run_cluster_quality(spec, bundle, artifacts)
