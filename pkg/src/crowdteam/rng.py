"""Deterministic random-stream derivation.

Every stochastic routine in the package derives its generator from a master
seed plus a few integer keys.  Streams keyed per (recruiter, worker) or per
(node, walk) make results independent of pool composition, iteration order,
and call order, which the reproducibility contracts rely on.
"""

from __future__ import annotations

import numpy as np

# Stream tags: keep unrelated draws from ever sharing a sequence.
SKILL_NOISE = 1
RELATION_NOISE = 2
WALKS = 3
TRAIN = 4
SAMPLING = 5
GA = 6
PSO = 7
SYNTH = 8
REALIZATION = 9
GNN = 10
REDUCE = 11
CLUSTER = 12


def _nonneg(value: int) -> int:
    value = int(value)
    # SeedSequence wants non-negative entropy; fold negatives (e.g. the
    # platform recruiter sentinel) into 64 bits.
    return value if value >= 0 else value & 0xFFFFFFFFFFFFFFFF


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Generator for (seed, *keys); stable across runs and call sites."""
    material = [_nonneg(seed)] + [_nonneg(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(material))


def spawn_key(seed: int, *keys: int) -> int:
    """A derived 63-bit integer seed, for handing to nested components."""
    return int(stream(seed, *keys).integers(0, 2**63 - 1))
