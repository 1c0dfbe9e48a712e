"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 infeasible instance.
All output is deterministic for a fixed seed and inputs; wall-clock fields
print as 0 unless ``--timings`` is passed.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace

from . import bench as bench_mod
from . import rng
from .clustering import CandidatePool, kmeans, modularity, write_cluster_csv
from .dataset import (
    SynthesisConfig,
    assign_categories,
    make_community_graph,
    synthesize_attributes,
    write_categories_csv,
)
from .domain import (
    ObjectiveWeights,
    make_view,
    read_workers_csv,
    write_workers_csv,
)
from .errors import CrowdTeamError, InfeasibleError, PoolShapeError
from .exact import solve_leader, solve_platform
from .ga import GaConfig, evolve, init_population, pso_baseline
from .graph import PLATFORM, load_edge_list, write_edge_list
from .pipeline import (
    EDGE_ATTR,
    EDGE_ONLY,
    build_clusters,
    build_embedding,
    make_demo_instance,
    prepare_graph,
    read_embedding_csv,
    write_embedding_csv,
)


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_eta(text: str) -> ObjectiveWeights:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 4:
        raise CrowdTeamError(f"--eta needs four comma-separated weights, got {text!r}")
    return ObjectiveWeights(*parts)


def _elapsed_ms(start: float, timings: bool) -> int:
    return int((time.perf_counter() - start) * 1000) if timings else 0


# --- subcommands ---------------------------------------------------------------

def _cmd_ingest(args) -> int:
    start = time.perf_counter()
    if args.input:
        g = load_edge_list(args.input)
        source = "file"
    else:
        g, source = prepare_graph(args.seed)
    if args.output:
        write_edge_list(args.output, g)
    print(f"nodes={g.num_nodes}")
    print(f"edges={g.num_edges}")
    print(f"source={source}")
    print(f"elapsed_ms={_elapsed_ms(start, args.timings)}")
    return 0


def _cmd_synth(args) -> int:
    start = time.perf_counter()
    if args.graph:
        g = load_edge_list(args.graph)
    else:
        g, _ = prepare_graph(args.seed)
    cfg = SynthesisConfig(seed=args.seed)
    categories = assign_categories(g, cfg)
    workers = synthesize_attributes(g, categories, cfg)
    write_workers_csv(args.workers, workers, cfg.catalog)
    if args.categories:
        write_categories_csv(args.categories, categories)
    print(f"workers={len(workers)}")
    print(f"skills={len(cfg.catalog)}")
    print(f"elapsed_ms={_elapsed_ms(start, args.timings)}")
    return 0


def _cmd_embed(args) -> int:
    start = time.perf_counter()
    g = load_edge_list(args.graph)
    workers = read_workers_csv(args.workers) if args.workers else []
    if args.mode == EDGE_ATTR and not workers:
        raise CrowdTeamError("edge_attr embedding needs --workers")
    from .pipeline import edge_attr_train_config, edge_only_train_config

    cfg = (edge_only_train_config(args.seed) if args.mode == EDGE_ONLY
           else edge_attr_train_config(args.seed))
    if args.dim:
        cfg = replace(cfg, dim=args.dim)
    if args.epochs:
        cfg = replace(cfg, epochs=args.epochs)
    embedding = build_embedding(g, workers, args.mode, cfg)
    write_embedding_csv(args.output, embedding)
    print(f"nodes={len(embedding.node_ids)}")
    print(f"dim={embedding.dim}")
    if embedding.loss_history:
        print(f"loss_final={embedding.loss_history[-1]!r}")
    print(f"elapsed_ms={_elapsed_ms(start, args.timings)}")
    return 0


def _cmd_cluster(args) -> int:
    start = time.perf_counter()
    embedding = read_embedding_csv(args.embedding)
    assignment = build_clusters(
        embedding, args.mode, k=args.k, seed=args.seed,
        reduce_first=not args.no_reduce, tsne_iterations=args.tsne_iterations,
    )
    write_cluster_csv(args.output, assignment)
    print(f"k={assignment.k}")
    print(f"non_empty={len(assignment.non_empty())}")
    if args.graph:
        g = load_edge_list(args.graph)
        print(f"modularity={modularity(g, assignment)!r}")
    print(f"elapsed_ms={_elapsed_ms(start, args.timings)}")
    return 0


def _cmd_recruit(args) -> int:
    start = time.perf_counter()
    weights = _parse_eta(args.eta)
    demo = make_demo_instance(args.pool, args.skills, args.density, args.seed)
    view_seed = rng.spawn_key(args.seed, rng.REALIZATION, 0)

    if args.method in ("ga", "pso") and args.strategy == "leader":
        raise CrowdTeamError("leader strategy supports --method exact only")

    if args.strategy == "platform":
        view = make_view(demo.workers, demo.relations, PLATFORM,
                         view_seed, args.base_sigma)
        if args.method == "exact":
            team = solve_platform(
                [w.id for w in demo.workers], demo.project, view, weights
            )
        else:
            pool = CandidatePool(tuple(w.id for w in demo.workers))
            cfg = GaConfig(population=args.population, iterations=args.iterations,
                           seed=args.seed)
            if args.method == "ga":
                result = evolve(
                    init_population(pool, demo.project, cfg), view, weights, cfg
                )
            else:
                result = pso_baseline(pool, demo.project, view, weights, cfg)
            team = result.team
    else:
        def view_factory(leader):
            return make_view(demo.workers, demo.relations, leader,
                             view_seed, args.base_sigma)

        team = solve_leader(
            [w.id for w in demo.workers], demo.project, view_factory, weights
        )

    print("skill,worker_id")
    for skill, worker in team.assignment:
        print(f"{skill},{worker}")
    print(f"# leader={team.leader if team.leader is not None else 'none'}")
    print(f"# objective={team.objective_value!r}")
    print(f"# elapsed_ms={_elapsed_ms(start, args.timings)}")
    return 0


def _cmd_bench(args) -> int:
    start = time.perf_counter()
    spec = bench_mod.parse_spec(args.spec)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    if args.surrogate_nodes:
        edges = args.surrogate_edges or args.surrogate_nodes * 20
        communities = args.communities or max(2, args.surrogate_nodes // 50)
        graph, _ = make_community_graph(
            args.surrogate_nodes, edges, communities, seed=spec.seed
        )
    else:
        graph, _ = prepare_graph(spec.seed)
    from .pipeline import build_dataset

    bundle = build_dataset(spec.seed, graph=graph)
    table = bench_mod.run_experiment(spec, bundle)
    output = args.output or spec.output
    bench_mod.write_result_csv(output, table)
    print(f"kind={spec.kind}")
    print(f"rows={len(table.rows)}")
    print(f"output={output}")
    print(f"elapsed_ms={_elapsed_ms(start, args.timings)}")
    return 0


# --- parser wiring ----------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="crowdteam",
                     description="Team recruitment over a social worker graph.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--timings", action="store_true",
                       help="print real elapsed milliseconds (non-deterministic)")

    p = sub.add_parser("ingest", parents=[], help="load and clean the social graph")
    p.add_argument("--input", help="edge list path (default: bundled dataset or surrogate)")
    p.add_argument("--output", help="write the canonical edge list here")
    common(p)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synth", help="synthesize worker attributes")
    p.add_argument("--graph", help="edge list path (default: bundled dataset or surrogate)")
    p.add_argument("--workers", default="workers.csv", help="output workers CSV")
    p.add_argument("--categories", help="also write the node category CSV")
    common(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("embed", help="train node embeddings")
    p.add_argument("--graph", required=True)
    p.add_argument("--workers", help="workers CSV (required for edge_attr)")
    p.add_argument("--mode", choices=(EDGE_ONLY, EDGE_ATTR), default=EDGE_ONLY)
    p.add_argument("--dim", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--output", default="embedding.csv")
    common(p)
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("cluster", help="cluster an embedding")
    p.add_argument("--embedding", required=True)
    p.add_argument("--mode", choices=(EDGE_ONLY, EDGE_ATTR), default=EDGE_ONLY)
    p.add_argument("--k", type=int, help="cluster count (default per mode)")
    p.add_argument("--graph", help="edge list; when given, report modularity")
    p.add_argument("--no-reduce", action="store_true",
                   help="cluster full-dimension vectors instead of the 2-D reduction")
    p.add_argument("--tsne-iterations", type=int, default=500)
    p.add_argument("--output", default="clusters.csv")
    common(p)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("recruit", help="recruit a team on a synthetic instance")
    p.add_argument("--strategy", choices=("platform", "leader"), default="platform")
    p.add_argument("--method", choices=("exact", "ga", "pso"), default="exact")
    p.add_argument("--skills", type=int, default=3, help="required skill count")
    p.add_argument("--pool", type=int, default=10, help="worker pool size")
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--eta", default="0.25,0.25,0.25,0.25")
    p.add_argument("--base-sigma", type=float, default=0.3)
    p.add_argument("--population", type=int, default=200)
    p.add_argument("--iterations", type=int, default=120)
    common(p)
    p.set_defaults(func=_cmd_recruit)

    p = sub.add_parser("bench", help="run a Monte-Carlo experiment from a spec file")
    p.add_argument("--spec", required=True)
    p.add_argument("--output", help="override the spec's output path")
    p.add_argument("--surrogate-nodes", type=int,
                   help="run on a small surrogate graph of this size")
    p.add_argument("--surrogate-edges", type=int)
    p.add_argument("--communities", type=int)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--timings", action="store_true")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InfeasibleError, PoolShapeError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except CrowdTeamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
