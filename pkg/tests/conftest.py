"""Shared fixtures: small graphs and instances reused across test modules."""

import numpy as np
import pytest

from crowdteam.dataset import SynthesisConfig, assign_categories, make_community_graph, synthesize_attributes
from crowdteam.graph import make_graph


@pytest.fixture
def path_graph():
    """0-1-2-3 chain: known hop distances."""
    return make_graph(range(4), [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def two_cliques():
    """Two 4-cliques joined by a single bridge 3-4."""
    edges = []
    for block in (range(4), range(4, 8)):
        block = list(block)
        for i, u in enumerate(block):
            for v in block[i + 1:]:
                edges.append((u, v))
    edges.append((3, 4))
    return make_graph(range(8), edges)


@pytest.fixture(scope="session")
def small_bundle_parts():
    """A 150-node surrogate graph with synthesized workers, built once."""
    g, communities = make_community_graph(150, 900, 5, seed=13)
    cfg = SynthesisConfig(seed=13)
    categories = assign_categories(g, cfg)
    workers = synthesize_attributes(g, categories, cfg)
    return g, communities, categories, workers, cfg


def rand_graph(n, p, seed):
    """Erdos-Renyi helper for property tests."""
    gen = np.random.default_rng(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if gen.random() < p]
    return make_graph(range(n), edges)


def rand_workers(n, num_skills=4, seed=0):
    from crowdteam.domain import Worker

    gen = np.random.default_rng(seed)
    return [
        Worker(
            id=i,
            skill_levels=gen.uniform(0, 1, num_skills),
            costs=gen.uniform(1, 10, num_skills),
            tenure_days=int(gen.integers(0, 3000)),
        )
        for i in range(n)
    ]


def rand_instance(n=8, num_skills=4, seed=3, base_sigma=0.3, recruiter=None,
                  density=0.45):
    """Workers + relations + a recruiter view over a random graph."""
    from crowdteam.domain import make_view
    from crowdteam.graph import PLATFORM, all_pairs_hops, relation_weights

    workers = rand_workers(n, num_skills, seed)
    g = rand_graph(n, density, seed + 1)
    rel = relation_weights(all_pairs_hops(g))
    who = PLATFORM if recruiter is None else recruiter
    view = make_view(workers, rel, who, seed=seed, base_sigma=base_sigma)
    return workers, rel, view
