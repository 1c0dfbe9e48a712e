"""Semi-synthetic benchmark dataset.

A community-structured surrogate graph stands in for the survey social
network (same node and edge counts) when the real edge list is not on
disk; worker attributes are synthesized on top of either graph from a
per-node job category: expert level in the category's primary skill, low
levels elsewhere, cost proportional to skill with relative noise.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .domain import DEFAULT_CATALOG, SkillCatalog, Worker
from .errors import DataError
from .graph import SocialGraph, make_graph

FACEBOOK_NODES = 4039
FACEBOOK_EDGES = 88234

DEFAULT_COMMUNITIES = 24
DEFAULT_INTRA_FRACTION = 0.8

DEFAULT_CATEGORIES = (
    "doctor", "nurse", "firefighter", "it_technician", "mechanic", "photographer",
)
DEFAULT_CATEGORY_SKILL = dict(zip(DEFAULT_CATEGORIES, DEFAULT_CATALOG.skills))
DEFAULT_COST_BASE = (30.0, 22.0, 26.0, 34.0, 24.0, 16.0)


@dataclass(frozen=True)
class SynthesisConfig:
    seed: int = 0
    catalog: SkillCatalog = DEFAULT_CATALOG
    category_skill: dict = field(default_factory=lambda: dict(DEFAULT_CATEGORY_SKILL))
    primary_range: tuple[float, float] = (0.7, 1.0)
    off_range: tuple[float, float] = (0.0, 0.3)
    cost_base: tuple[float, ...] = DEFAULT_COST_BASE
    cost_noise_sigma: float = 0.1
    tenure_range: tuple[int, int] = (0, 3650)
    default_category: str = DEFAULT_CATEGORIES[0]

    def __post_init__(self):
        for lo, hi in (self.primary_range, self.off_range):
            if not 0.0 <= lo <= hi <= 1.0:
                raise DataError("skill ranges must sit inside [0, 1]")
        if self.off_range[1] >= self.primary_range[0]:
            raise DataError(
                "off-domain range must stay below the primary range so the "
                "top skill identifies the category"
            )
        if len(self.cost_base) != len(self.catalog):
            raise DataError("one cost base per catalog skill required")
        if any(b <= 0 for b in self.cost_base):
            raise DataError("cost bases must be positive")
        if self.cost_noise_sigma < 0:
            raise DataError("negative cost noise")
        if self.tenure_range[0] < 0 or self.tenure_range[1] < self.tenure_range[0]:
            raise DataError("bad tenure range")
        for cat, skill in self.category_skill.items():
            self.catalog.index(skill)  # raises on unknown skill
        if self.default_category not in self.category_skill:
            raise DataError(f"default category {self.default_category!r} unmapped")

    @property
    def categories(self) -> tuple[str, ...]:
        return tuple(self.category_skill)


# --- surrogate graph ------------------------------------------------------------

def _allocate(total: int, weights: np.ndarray, floor: int) -> np.ndarray:
    """Integer allocation of ``total`` proportional to weights, each ≥ floor."""
    k = len(weights)
    if total < k * floor:
        raise DataError(f"cannot give {k} groups at least {floor} each from {total}")
    spare = total - k * floor
    raw = weights / weights.sum() * spare
    out = np.floor(raw).astype(np.int64)
    rem = spare - int(out.sum())
    order = np.argsort(-(raw - out))
    out[order[:rem]] += 1
    return out + floor


def _sample_pairs(pool_pairs: int, want: int, decode, gen: np.random.Generator,
                  taken: set[tuple[int, int]]) -> None:
    """Draw ``want`` distinct pairs by index into an implicit pair list."""
    while want > 0:
        idx = gen.integers(0, pool_pairs, size=max(want * 2, 16))
        for i in idx:
            pair = decode(int(i))
            if pair not in taken:
                taken.add(pair)
                want -= 1
                if want == 0:
                    return


def make_community_graph(num_nodes: int, num_edges: int,
                         num_communities: int = DEFAULT_COMMUNITIES,
                         intra_fraction: float = DEFAULT_INTRA_FRACTION,
                         seed: int = 0) -> tuple[SocialGraph, np.ndarray]:
    """Random graph with planted communities and exact node/edge counts.

    Community sizes are mildly heterogeneous; ``intra_fraction`` of the
    edges land inside communities (allocated by within-community pair
    capacity), the rest across.  Returns the graph and the planted label
    per node.
    """
    if num_communities < 2:
        raise DataError("need at least two communities")
    if not 0.0 < intra_fraction < 1.0:
        raise DataError("intra_fraction must be strictly between 0 and 1")
    gen = rng.stream(seed, rng.SYNTH, 0)
    sizes = _allocate(num_nodes, gen.dirichlet(np.full(num_communities, 4.0)),
                      floor=max(4, num_nodes // (10 * num_communities)))
    labels = np.repeat(np.arange(num_communities), sizes)
    starts = np.concatenate(([0], np.cumsum(sizes)))

    capacity = sizes * (sizes - 1) // 2
    intra_total = min(int(round(intra_fraction * num_edges)), int(capacity.sum()))
    per_comm = _allocate(intra_total, capacity.astype(np.float64), floor=0)
    over = per_comm - capacity
    if (over > 0).any():
        # Clip to capacity and push the spill into the roomiest communities.
        spill = int(over[over > 0].sum())
        per_comm = np.minimum(per_comm, capacity)
        room = np.argsort(-(capacity - per_comm))
        for c in room:
            if spill == 0:
                break
            add = min(spill, int(capacity[c] - per_comm[c]))
            per_comm[c] += add
            spill -= add

    edges: set[tuple[int, int]] = set()
    for c in range(num_communities):
        size, base = int(sizes[c]), int(starts[c])

        def decode(i: int, size=size, base=base) -> tuple[int, int]:
            # Index into the upper triangle of the community's pair matrix.
            u = size - 2 - int(np.floor(np.sqrt(-8 * i + 4 * size * (size - 1) - 7) / 2 - 0.5))
            v = i + u + 1 - size * (size - 1) // 2 + (size - u) * ((size - u) - 1) // 2
            return (base + u, base + v)

        _sample_pairs(int(capacity[c]), int(per_comm[c]), decode, gen, edges)

    inter_total = num_edges - int(per_comm.sum())
    while inter_total > 0:
        u = int(gen.integers(0, num_nodes))
        v = int(gen.integers(0, num_nodes))
        if u == v or labels[u] == labels[v]:
            continue
        pair = (u, v) if u < v else (v, u)
        if pair in edges:
            continue
        edges.add(pair)
        inter_total -= 1

    g = make_graph(range(num_nodes), edges)
    if g.num_edges != num_edges:
        raise DataError(f"sampler produced {g.num_edges} edges, wanted {num_edges}")
    return g, labels


def facebook_scale_graph(seed: int = 0) -> tuple[SocialGraph, np.ndarray]:
    """Surrogate at the survey graph's exact scale: 4039 nodes, 88234 edges."""
    return make_community_graph(FACEBOOK_NODES, FACEBOOK_EDGES, seed=seed)


# --- categories and attributes ---------------------------------------------------

def label_categories(raw: dict, mapping: dict, default: str) -> dict:
    """Map raw per-node feature strings to job categories; unknowns default."""
    return {node: mapping.get(feature, default) for node, feature in raw.items()}


def assign_categories(g: SocialGraph, cfg: SynthesisConfig) -> dict[int, str]:
    """Uniform random category per node, seeded."""
    gen = rng.stream(cfg.seed, rng.SYNTH, 1)
    cats = cfg.categories
    picks = gen.integers(0, len(cats), size=g.num_nodes)
    return {node: cats[int(p)] for node, p in zip(g.node_ids, picks)}


def synthesize_attributes(g: SocialGraph, categories: dict,
                          cfg: SynthesisConfig) -> list[Worker]:
    """Skill/cost/tenure synthesis; per-node streams keep draws stable
    under any subsetting of the population."""
    workers = []
    p_lo, p_hi = cfg.primary_range
    o_lo, o_hi = cfg.off_range
    t_lo, t_hi = cfg.tenure_range
    base = np.asarray(cfg.cost_base, dtype=np.float64)
    num_skills = len(cfg.catalog)
    for node in g.node_ids:
        if node not in categories:
            raise DataError(f"node {node} carries no job category")
        cat = categories[node]
        if cat not in cfg.category_skill:
            raise DataError(f"unknown category {cat!r} on node {node}")
        primary = cfg.catalog.index(cfg.category_skill[cat])
        gen = rng.stream(cfg.seed, rng.SYNTH, 2, node)
        skills = gen.uniform(o_lo, o_hi, size=num_skills)
        skills[primary] = gen.uniform(p_lo, p_hi)
        eps = gen.normal(0.0, cfg.cost_noise_sigma, size=num_skills)
        costs = np.maximum(base * skills * (1.0 + eps), 0.0)
        tenure = int(gen.integers(t_lo, t_hi + 1))
        workers.append(Worker(
            id=node,
            skill_levels=skills,
            costs=costs,
            tenure_days=tenure,
            job_category=cat,
        ))
    return workers


def write_categories_csv(path, categories: dict) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["node_id", "category"])
        for node in sorted(categories):
            out.writerow([node, categories[node]])


def read_categories_csv(path) -> dict[int, str]:
    out: dict[int, str] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["node_id", "category"]:
            raise DataError(f"unexpected category CSV header {header}")
        for row in reader:
            try:
                out[int(row[0])] = row[1]
            except (ValueError, IndexError):
                raise DataError(f"malformed category row {row}") from None
    if not out:
        raise DataError("category CSV has no rows")
    return out
