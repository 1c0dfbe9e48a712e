"""Genetic-algorithm recruiter over the reduced candidate pool.

Populations are stored as matrices of pool positions, one row per
individual and one column per required skill; the classic bit-string
encoding is available as an import/export format (`Genome`).  Every
operator goes through a repair pass, so each evaluated individual is a
feasible team.  A binary particle-swarm baseline shares the repair logic
and consumes exactly the same evaluation budget for fair comparisons.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import rng
from .clustering import CandidatePool
from .domain import ObjectiveWeights, Project, RecruiterView, Team, objective_batch
from .errors import DataError, InfeasibleError

PSO_INERTIA = 0.72
PSO_COGNITIVE = 1.49
PSO_SOCIAL = 1.49
PSO_VMAX = 4.0

_RESAMPLE_CAP = 100


@dataclass(frozen=True)
class GaConfig:
    population: int = 1000
    iterations: int = 500
    crossover_rate: float = 0.4
    mutation_rate: float = 0.8
    stall_generations: int = 50
    restarts_max: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise DataError("population must be at least 2")
        if self.iterations < 1:
            raise DataError("need at least one generation")
        for name in ("crossover_rate", "mutation_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise DataError(f"{name} {rate} outside [0, 1]")
        if self.stall_generations < 1:
            raise DataError("stall_generations must be positive")
        if self.restarts_max < 0:
            raise DataError("restarts_max must be non-negative")


@dataclass(frozen=True, eq=False)
class Genome:
    """Flat bit encoding: one block of skill columns per pool worker."""

    bits: np.ndarray              # uint8, length len(pool_ids) * num_skills
    pool_ids: tuple[int, ...]
    num_skills: int

    def __post_init__(self):
        if self.bits.shape != (len(self.pool_ids) * self.num_skills,):
            raise DataError("genome length is not |pool| * |skills|")

    def block(self, position: int) -> np.ndarray:
        lo = position * self.num_skills
        return self.bits[lo:lo + self.num_skills]


@dataclass(frozen=True, eq=False)
class Population:
    """GA state: pool positions, one row per individual."""

    pool: CandidatePool
    project: Project
    members: np.ndarray  # (N, s) int64

    def __post_init__(self):
        if self.members.ndim != 2 or self.members.shape[1] != self.project.num_required:
            raise DataError("population shape does not match required skills")

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True, eq=False)
class GaResult:
    team: Team
    best_fitness: float
    trace: tuple[tuple[int, float, float, int], ...]  # gen, best, mean, epoch
    evaluations: int
    restarts: int


def encode_genome(row: np.ndarray, pool: CandidatePool, project: Project,
                  num_skills: int) -> Genome:
    bits = np.zeros(len(pool) * num_skills, dtype=np.uint8)
    for j, pos in enumerate(row):
        bits[int(pos) * num_skills + project.required_skills[j]] = 1
    return Genome(bits, tuple(pool.worker_ids), num_skills)


def decode_genome(genome: Genome, project: Project) -> np.ndarray:
    """Pool-position row for a feasible genome; malformed bits are an error."""
    mat = genome.bits.reshape(len(genome.pool_ids), genome.num_skills)
    row = np.empty(project.num_required, dtype=np.int64)
    for j, skill in enumerate(project.required_skills):
        owners = np.flatnonzero(mat[:, skill])
        if len(owners) != 1:
            raise DataError(f"skill {skill} held by {len(owners)} workers")
        row[j] = owners[0]
    return row


def validate_genome(genome: Genome, project: Project, pool: CandidatePool) -> None:
    if tuple(genome.pool_ids) != tuple(pool.worker_ids):
        raise DataError("genome block order differs from the pool")
    if not np.isin(genome.bits, (0, 1)).all():
        raise DataError("genome bits outside {0, 1}")
    mat = genome.bits.reshape(len(genome.pool_ids), genome.num_skills)
    if int(mat.sum()) != project.num_required:
        raise DataError("total ones differ from the required skill count")
    if (mat.sum(axis=1) > 1).any():
        raise DataError("worker block holds more than one skill")
    required = set(project.required_skills)
    for skill in range(genome.num_skills):
        count = int(mat[:, skill].sum())
        if skill in required and count != 1:
            raise DataError(f"required skill {skill} held {count} times")
        if skill not in required and count != 0:
            raise DataError(f"non-required skill {skill} is assigned")
    for pos, worker in enumerate(genome.pool_ids):
        for skill in np.flatnonzero(mat[pos]):
            if not pool.allowed(worker, int(skill)):
                raise DataError(f"worker {worker} locked out of skill {skill}")


# --- feasible sampling and repair ----------------------------------------------

def _allowed_columns(pool: CandidatePool, project: Project):
    """Eligibility mask (pool position x slot) and per-slot position lists."""
    n, s = len(pool), project.num_required
    mask = np.ones((n, s), dtype=bool)
    if pool.skill_tags is not None:
        for p, w in enumerate(pool.worker_ids):
            tags = pool.skill_tags.get(w, ())
            for j, k in enumerate(project.required_skills):
                mask[p, j] = k in tags
    cols = [np.flatnonzero(mask[:, j]) for j in range(s)]
    for j, c in enumerate(cols):
        if not len(c):
            raise InfeasibleError(
                f"no pool worker may fill skill {project.required_skills[j]}"
            )
    return mask, cols


def _backtrack_row(cols, gen: np.random.Generator) -> np.ndarray:
    """Any feasible row, searching scarcest slots first; random tie order."""
    s = len(cols)
    order = sorted(range(s), key=lambda j: len(cols[j]))
    row = np.full(s, -1, dtype=np.int64)
    used: set[int] = set()

    def rec(i: int) -> bool:
        if i == s:
            return True
        j = order[i]
        for cand in gen.permutation(cols[j]):
            if cand in used:
                continue
            used.add(int(cand))
            row[j] = cand
            if rec(i + 1):
                return True
            used.discard(int(cand))
        row[j] = -1
        return False

    if not rec(0):
        raise InfeasibleError("pool admits no feasible assignment")
    return row


def _sample_rows(count: int, mask: np.ndarray, cols,
                 gen: np.random.Generator) -> np.ndarray:
    """Uniform feasible rows: permutations when unrestricted, else
    per-slot rejection sampling with a backtracking fallback."""
    n, s = mask.shape
    if mask.all():
        base = np.tile(np.arange(n), (count, 1))
        return gen.permuted(base, axis=1)[:, :s].astype(np.int64)
    rows = np.empty((count, s), dtype=np.int64)
    pending = np.arange(count)
    tries = 0
    while len(pending):
        if tries >= _RESAMPLE_CAP:
            for i in pending:
                rows[i] = _backtrack_row(cols, gen)
            break
        for j, c in enumerate(cols):
            rows[pending, j] = c[gen.integers(0, len(c), size=len(pending))]
        srt = np.sort(rows[pending], axis=1)
        pending = pending[(srt[:, 1:] == srt[:, :-1]).any(axis=1)]
        tries += 1
    return rows


def _fill_missing(child: np.ndarray, used: np.ndarray, mask: np.ndarray,
                  cols, gen: np.random.Generator) -> None:
    """Assign every empty slot a uniformly chosen eligible unused worker.

    Rows where some slot has no eligible worker left are rebuilt whole via
    backtracking, which keeps the repair total.
    """
    m, s = child.shape
    ar = np.arange(m)
    for j in range(s):
        need = child[:, j] < 0
        if not need.any():
            continue
        elig = mask[:, j][None, :] & ~used[need]
        counts = elig.sum(axis=1)
        r = gen.integers(0, np.maximum(counts, 1))
        sel = np.argmax(np.cumsum(elig, axis=1) > r[:, None], axis=1)
        rows_idx = ar[need]
        good = counts > 0
        child[rows_idx[good], j] = sel[good]
        used[rows_idx[good], sel[good]] = True
        for i in rows_idx[~good]:
            child[i] = _backtrack_row(cols, gen)
            used[i] = False
            used[i, child[i]] = True


def _repair(first: np.ndarray, second: np.ndarray, mask: np.ndarray,
            cols, gen: np.random.Generator) -> np.ndarray:
    """Merge two per-slot candidate layers into feasible rows.

    Slot by slot, the first layer's candidate wins if unused, then the
    second's; leftovers are filled uniformly.  -1 marks an absent candidate.
    """
    m, s = first.shape
    n = mask.shape[0]
    child = np.full((m, s), -1, dtype=np.int64)
    used = np.zeros((m, n), dtype=bool)
    ar = np.arange(m)
    for j in range(s):
        for layer in (first, second):
            c = layer[:, j]
            ok = (child[:, j] < 0) & (c >= 0)
            ok &= ~used[ar, np.clip(c, 0, n - 1)]
            child[ok, j] = c[ok]
            used[ok, c[ok]] = True
    _fill_missing(child, used, mask, cols, gen)
    return child


def _crossover(a: np.ndarray, b: np.ndarray, cuts: np.ndarray,
               mask: np.ndarray, cols, gen: np.random.Generator):
    """Single-point crossover at a worker-block boundary, then repair.

    In bit-string terms child one takes the blocks of pool positions below
    the cut from parent A and the rest from parent B; a slot can end up
    with zero or two candidates, which the repair resolves.
    """
    cut = cuts[:, None]
    ca = _repair(np.where(a < cut, a, -1), np.where(b >= cut, b, -1), mask, cols, gen)
    cb = _repair(np.where(b < cut, b, -1), np.where(a >= cut, a, -1), mask, cols, gen)
    return ca, cb


def _mutate_inplace(rows: np.ndarray, mask: np.ndarray,
                    gen: np.random.Generator, rate: float) -> None:
    """Per-individual swap mutation: one slot gets an unused eligible worker."""
    m, s = rows.shape
    if m == 0 or rate <= 0.0:
        return
    do = gen.random(m) < rate
    slots = gen.integers(0, s, size=m)
    idx = np.flatnonzero(do)
    if not len(idx):
        return
    n = mask.shape[0]
    used = np.zeros((len(idx), n), dtype=bool)
    used[np.arange(len(idx))[:, None], rows[idx]] = True
    elig = mask.T[slots[idx]] & ~used
    counts = elig.sum(axis=1)
    r = gen.integers(0, np.maximum(counts, 1))
    sel = np.argmax(np.cumsum(elig, axis=1) > r[:, None], axis=1)
    ok = counts > 0
    rows[idx[ok], slots[idx[ok]]] = sel[ok]


# --- public API -----------------------------------------------------------------

def init_population(pool: CandidatePool, project: Project, cfg: GaConfig) -> Population:
    """Uniform sample of feasible assignments, one row per individual."""
    if len(pool) < project.num_required:
        raise InfeasibleError(
            f"pool of {len(pool)} cannot cover {project.num_required} skills"
        )
    mask, cols = _allowed_columns(pool, project)
    gen = rng.stream(cfg.seed, rng.GA, 0)
    rows = _sample_rows(cfg.population, mask, cols, gen)
    return Population(pool, project, rows)


def _default_fitness(pool: CandidatePool, project: Project, view: RecruiterView,
                     weights: ObjectiveWeights):
    row_map = np.array([view.index[w] for w in pool.worker_ids], dtype=np.intp)

    def fitness(rows: np.ndarray) -> np.ndarray:
        return objective_batch(row_map[rows], project.required_skills, view, weights)

    return fitness


def _decode_team(row: np.ndarray, pool: CandidatePool, project: Project,
                 value: float) -> Team:
    assignment = tuple(
        (skill, pool.worker_ids[int(pos)])
        for skill, pos in zip(project.required_skills, row)
    )
    return Team(assignment, leader=None, objective_value=value)


def _next_generation(members: np.ndarray, fitness: np.ndarray, cfg: GaConfig,
                     mask: np.ndarray, cols, gen: np.random.Generator) -> np.ndarray:
    n_pool = mask.shape[0]
    count = len(members)
    out = np.empty_like(members)
    out[0] = members[int(np.argmax(fitness))]

    shifted = fitness - fitness.min()
    total = shifted.sum()
    probs = shifted / total if total > 0 else np.full(count, 1.0 / count)

    pairs = (count - 1 + 1) // 2
    parents = gen.choice(count, size=(pairs, 2), p=probs)
    a = members[parents[:, 0]].copy()
    b = members[parents[:, 1]].copy()
    do_cross = gen.random(pairs) < cfg.crossover_rate
    if n_pool >= 2 and do_cross.any():
        cuts = gen.integers(1, n_pool, size=pairs)
        which = np.flatnonzero(do_cross)
        ca, cb = _crossover(a[which], b[which], cuts[which], mask, cols, gen)
        a[which] = ca
        b[which] = cb
    children = np.empty((2 * pairs, members.shape[1]), dtype=members.dtype)
    children[0::2] = a
    children[1::2] = b
    children = children[:count - 1]
    _mutate_inplace(children, mask, gen, cfg.mutation_rate)
    out[1:] = children
    return out


def evolve(population: Population, view: RecruiterView, weights: ObjectiveWeights,
           cfg: GaConfig, fitness_fn=None) -> GaResult:
    """Run the GA for exactly ``cfg.iterations`` generations.

    Roulette selection over min-shifted fitness, block-boundary crossover
    with repair, swap mutation, elitism.  ``cfg.stall_generations`` without
    improvement reseeds the population (keeping the global best) up to
    ``cfg.restarts_max`` times.  The evaluation budget is always
    ``population * (iterations + 1)``.
    """
    pool, project = population.pool, population.project
    mask, cols = _allowed_columns(pool, project)
    if fitness_fn is None:
        fitness_fn = _default_fitness(pool, project, view, weights)
    gen = rng.stream(cfg.seed, rng.GA, 1)

    members = population.members.astype(np.int64, copy=True)
    if len(members) != cfg.population:
        raise DataError("population size differs from the configuration")
    fitness = np.asarray(fitness_fn(members), dtype=np.float64)
    evaluations = len(members)

    best = int(np.argmax(fitness))
    global_row = members[best].copy()
    global_fit = float(fitness[best])
    stall = 0
    restarts = 0
    epoch = 0
    trace: list[tuple[int, float, float, int]] = []

    for generation in range(1, cfg.iterations + 1):
        if stall >= cfg.stall_generations and restarts < cfg.restarts_max:
            members = _sample_rows(len(members), mask, cols, gen)
            members[0] = global_row
            restarts += 1
            epoch += 1
            stall = 0
        else:
            members = _next_generation(members, fitness, cfg, mask, cols, gen)
        fitness = np.asarray(fitness_fn(members), dtype=np.float64)
        evaluations += len(members)
        best = int(np.argmax(fitness))
        if fitness[best] > global_fit:
            global_fit = float(fitness[best])
            global_row = members[best].copy()
            stall = 0
        else:
            stall += 1
        trace.append((generation, float(fitness.max()), float(fitness.mean()), epoch))

    team = _decode_team(global_row, pool, project, global_fit)
    return GaResult(team, global_fit, tuple(trace), evaluations, restarts)


def _one_hot(rows: np.ndarray, n: int) -> np.ndarray:
    count, s = rows.shape
    bits = np.zeros((count, n, s), dtype=np.float64)
    bits[np.arange(count)[:, None], rows, np.arange(s)[None, :]] = 1.0
    return bits


def _rows_from_bits(sampled: np.ndarray, mask: np.ndarray, cols,
                    gen: np.random.Generator) -> np.ndarray:
    """Feasible rows from sampled bit tensors, via the shared repair.

    Per slot the lowest-position set bit that is still unused wins; slots
    left empty go through the uniform fill.
    """
    count, n, s = sampled.shape
    child = np.full((count, s), -1, dtype=np.int64)
    used = np.zeros((count, n), dtype=bool)
    for j in range(s):
        cand = sampled[:, :, j] & ~used
        has = cand.any(axis=1)
        sel = np.argmax(cand, axis=1)
        child[has, j] = sel[has]
        used[has, sel[has]] = True
    _fill_missing(child, used, mask, cols, gen)
    return child


def pso_baseline(pool: CandidatePool, project: Project, view: RecruiterView,
                 weights: ObjectiveWeights, cfg: GaConfig,
                 fitness_fn=None) -> GaResult:
    """Binary PSO with a sigmoid velocity transfer and the GA's repair.

    Particles move in the genome bit space; each sampled bit tensor is
    repaired to a feasible row before evaluation.  Runs for
    ``cfg.iterations`` rounds, matching the GA's evaluation budget exactly.
    """
    if len(pool) < project.num_required:
        raise InfeasibleError(
            f"pool of {len(pool)} cannot cover {project.num_required} skills"
        )
    mask, cols = _allowed_columns(pool, project)
    if fitness_fn is None:
        fitness_fn = _default_fitness(pool, project, view, weights)
    gen = rng.stream(cfg.seed, rng.PSO)

    n, s = mask.shape
    count = cfg.population
    rows = _sample_rows(count, mask, cols, gen)
    fitness = np.asarray(fitness_fn(rows), dtype=np.float64)
    evaluations = count

    pbest_rows = rows.copy()
    pbest_fit = fitness.copy()
    g = int(np.argmax(fitness))
    gbest_row = rows[g].copy()
    gbest_fit = float(fitness[g])
    velocity = gen.uniform(-1.0, 1.0, size=(count, n, s))
    trace: list[tuple[int, float, float, int]] = []

    for iteration in range(1, cfg.iterations + 1):
        bits = _one_hot(rows, n)
        pbits = _one_hot(pbest_rows, n)
        gbits = _one_hot(gbest_row[None, :], n)[0]
        r1 = gen.random((count, n, s))
        r2 = gen.random((count, n, s))
        velocity = (
            PSO_INERTIA * velocity
            + PSO_COGNITIVE * r1 * (pbits - bits)
            + PSO_SOCIAL * r2 * (gbits[None] - bits)
        )
        np.clip(velocity, -PSO_VMAX, PSO_VMAX, out=velocity)
        prob = 1.0 / (1.0 + np.exp(-velocity))
        sampled = (gen.random((count, n, s)) < prob) & mask[None, :, :]
        rows = _rows_from_bits(sampled, mask, cols, gen)
        fitness = np.asarray(fitness_fn(rows), dtype=np.float64)
        evaluations += count
        better = fitness > pbest_fit
        pbest_rows[better] = rows[better]
        pbest_fit[better] = fitness[better]
        g = int(np.argmax(pbest_fit))
        if pbest_fit[g] > gbest_fit:
            gbest_fit = float(pbest_fit[g])
            gbest_row = pbest_rows[g].copy()
        trace.append((iteration, gbest_fit, float(fitness.mean()), 0))

    team = _decode_team(gbest_row, pool, project, gbest_fit)
    return GaResult(team, gbest_fit, tuple(trace), evaluations, restarts=0)


def write_trace_csv(path, result: GaResult) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["generation", "best_fitness", "mean_fitness", "restart_epoch"])
        for generation, best, mean, epoch in result.trace:
            out.writerow([generation, repr(best), repr(mean), epoch])
