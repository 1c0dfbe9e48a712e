"""Workers, projects, recruiter views, and the team objective.

A recruiter (the platform or a candidate leader) never sees true skill
levels or true relationship weights; it sees values perturbed by noise whose
scale reflects how well it knows each worker.  All scoring happens against a
:class:`RecruiterView`.

The scalarized objective for a team sums, over assigned (worker, skill)
pairs, ``w_s * skill/skill_scale - w_u * uncertainty/uncertainty_scale -
w_c * cost/cost_scale`` and adds ``w_r / (|required| - 1)`` times the sum of
perceived relation weights over ordered pairs of distinct hired workers
(both directions, so each unordered pair counts twice).  Teams of one have
no pairwise term.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import rng
from .errors import DataError, InfeasibleError
from .graph import (
    PLATFORM,
    PerceivedRelation,
    RelationModel,
    perceive_relations,
    _recruiter_key,
)

DEFAULT_BASE_SIGMA = 0.3


@dataclass(frozen=True)
class SkillCatalog:
    """Ordered platform-wide skill list; index positions are skill ids."""

    skills: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.skills)) != len(self.skills):
            raise DataError("duplicate skill names")
        if not self.skills:
            raise DataError("empty skill catalog")

    def __len__(self) -> int:
        return len(self.skills)

    def index(self, name: str) -> int:
        try:
            return self.skills.index(name)
        except ValueError:
            raise DataError(f"unknown skill {name!r}") from None


DEFAULT_CATALOG = SkillCatalog(
    ("medical", "nursing", "firefighting", "it", "mechanical", "photography")
)


@dataclass(frozen=True, eq=False)
class Worker:
    id: int
    skill_levels: np.ndarray  # (|S|,) floats in [0, 1]
    costs: np.ndarray         # (|S|,) floats >= 0
    tenure_days: int = 0
    enter_time: float = 0.0
    leave_time: float = math.inf
    job_category: str = ""

    def __post_init__(self):
        s = np.asarray(self.skill_levels, dtype=np.float64)
        c = np.asarray(self.costs, dtype=np.float64)
        if s.ndim != 1 or c.shape != s.shape:
            raise DataError(f"worker {self.id}: skill/cost shape mismatch")
        if (s < 0).any() or (s > 1).any():
            raise DataError(f"worker {self.id}: skill levels outside [0, 1]")
        if (c < 0).any():
            raise DataError(f"worker {self.id}: negative cost")
        if self.tenure_days < 0:
            raise DataError(f"worker {self.id}: negative tenure")
        if self.leave_time < self.enter_time:
            raise DataError(f"worker {self.id}: leave before enter")
        object.__setattr__(self, "skill_levels", s)
        object.__setattr__(self, "costs", c)


@dataclass(frozen=True)
class Project:
    """A task needing one worker per required skill inside a time window."""

    id: int
    required_skills: tuple[int, ...]
    title: str = ""
    description: str = ""
    window: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        req = tuple(sorted(set(self.required_skills)))
        if not req:
            raise DataError("project requires no skills")
        if any(k < 0 for k in req):
            raise DataError("negative skill index")
        if self.window[1] < self.window[0]:
            raise DataError("project window ends before it starts")
        object.__setattr__(self, "required_skills", req)

    @property
    def num_required(self) -> int:
        return len(self.required_skills)

    def requires(self, skill_index: int) -> bool:
        return skill_index in self.required_skills


@dataclass(frozen=True)
class ObjectiveWeights:
    """Objective weights (must sum to 1) and normalization scales."""

    skill: float = 0.25
    uncertainty: float = 0.25
    cost: float = 0.25
    relation: float = 0.25
    skill_scale: float = 1.0
    uncertainty_scale: float = 1.0
    cost_scale: float = 1.0
    relation_scale: float = 1.0

    def __post_init__(self):
        w = (self.skill, self.uncertainty, self.cost, self.relation)
        if any(x < 0 for x in w):
            raise DataError("negative objective weight")
        if abs(sum(w) - 1.0) > 1e-9:
            raise DataError(f"objective weights sum to {sum(w)}, expected 1")
        scales = (self.skill_scale, self.uncertainty_scale,
                  self.cost_scale, self.relation_scale)
        if any(s <= 0 for s in scales):
            raise DataError("normalization scales must be positive")

    @property
    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.skill, self.uncertainty, self.cost, self.relation)


@dataclass(frozen=True, eq=False)
class RecruiterView:
    """Everything a recruiter knows (or believes) about a worker pool."""

    recruiter: int
    worker_ids: tuple[int, ...]
    perceived_skills: np.ndarray   # (n, |S|) in [0, 1]
    costs: np.ndarray              # (n, |S|) true asking costs
    uncertainty: np.ndarray        # (n,) noise variance per worker
    perceived_relations: PerceivedRelation

    def __post_init__(self):
        n = len(self.worker_ids)
        if self.perceived_skills.shape[0] != n or self.costs.shape != self.perceived_skills.shape:
            raise DataError("view skill/cost shape mismatch")
        if self.uncertainty.shape != (n,):
            raise DataError("view uncertainty shape mismatch")
        if tuple(self.perceived_relations.node_ids) != tuple(self.worker_ids):
            raise DataError("view relations cover a different worker set")

    @cached_property
    def index(self) -> dict[int, int]:
        return {w: i for i, w in enumerate(self.worker_ids)}

    @property
    def num_workers(self) -> int:
        return len(self.worker_ids)


@dataclass(frozen=True)
class Team:
    """An injective assignment of required skills to workers."""

    assignment: tuple[tuple[int, int], ...]  # (skill_index, worker_id)
    leader: int | None = None
    objective_value: float = float("nan")

    def __post_init__(self):
        object.__setattr__(
            self, "assignment", tuple(sorted((int(k), int(w)) for k, w in self.assignment))
        )

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(w for _, w in self.assignment)

    @property
    def skills(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.assignment)

    def worker_for(self, skill_index: int) -> int:
        for k, w in self.assignment:
            if k == skill_index:
                return w
        raise KeyError(skill_index)

    def as_dict(self) -> dict[int, int]:
        return dict(self.assignment)


def validate_team(team: Team, project: Project, worker_ids=None) -> None:
    """Check exact skill cover, injectivity, and leader membership."""
    skills = team.skills
    if skills != project.required_skills:
        raise DataError(
            f"team covers skills {skills}, project requires {project.required_skills}"
        )
    members = team.members
    if len(set(members)) != len(members):
        raise DataError("worker assigned to more than one skill")
    if worker_ids is not None:
        unknown = set(members) - set(worker_ids)
        if unknown:
            raise DataError(f"team members {sorted(unknown)} not in pool")
    if team.leader is not None and team.leader not in members:
        raise DataError(f"leader {team.leader} holds no required skill")


# --- perception ---------------------------------------------------------------

def platform_noise_sigma(workers, base_sigma: float = DEFAULT_BASE_SIGMA) -> np.ndarray:
    """Platform-side noise scale: shrinks linearly with worker tenure."""
    tenure = np.array([w.tenure_days for w in workers], dtype=np.float64)
    top = tenure.max() if len(tenure) else 0.0
    ratio = tenure / top if top > 0 else np.zeros_like(tenure)
    return base_sigma * (1.0 - ratio)


def leader_noise_sigma(rel: RelationModel, leader: int,
                       base_sigma: float = DEFAULT_BASE_SIGMA) -> np.ndarray:
    """Leader-side noise scale: grows with social distance, zero toward self."""
    if leader not in rel.index:
        raise DataError(f"leader {leader} not in relation model")
    i = rel.index[leader]
    sigma = base_sigma * (1.0 - rel.weights[i])
    sigma = np.asarray(sigma, dtype=np.float64).copy()
    sigma[i] = 0.0
    return sigma


def perceive_skills(workers, recruiter: int, noise_sigma, seed: int):
    """Noisy skill matrix and per-worker noise variance.

    One noise draw per (recruiter, worker), shared across that worker's
    skills; perceived levels are clamped to [0, 1].  Returns
    (perceived (n, |S|), variance (n,)).
    """
    noise_sigma = np.asarray(noise_sigma, dtype=np.float64)
    if noise_sigma.shape != (len(workers),):
        raise DataError("noise_sigma must have one entry per worker")
    true = np.stack([w.skill_levels for w in workers])
    noise = np.empty(len(workers), dtype=np.float64)
    rk = _recruiter_key(recruiter)
    for i, w in enumerate(workers):
        gen = rng.stream(seed, rng.SKILL_NOISE, rk, w.id)
        noise[i] = gen.standard_normal() * noise_sigma[i]
    perceived = np.clip(true + noise[:, None], 0.0, 1.0)
    return perceived, noise_sigma**2


def make_view(workers, relations: RelationModel, recruiter: int, seed: int,
              base_sigma: float = DEFAULT_BASE_SIGMA) -> RecruiterView:
    """Assemble a RecruiterView for the platform or a candidate leader.

    Workers must cover exactly the relation model's node set.  The same
    per-worker noise scale drives both skill and relation perception;
    setting ``base_sigma=0`` yields a ground-truth view.
    """
    by_id = {w.id: w for w in workers}
    if set(by_id) != set(relations.node_ids):
        raise DataError("worker set differs from relation model nodes")
    ordered = [by_id[i] for i in relations.node_ids]
    if recruiter == PLATFORM:
        sigma = platform_noise_sigma(ordered, base_sigma)
    else:
        if recruiter not in by_id:
            raise DataError(f"unknown recruiter id {recruiter}")
        sigma = leader_noise_sigma(relations, recruiter, base_sigma)
    perceived, variance = perceive_skills(ordered, recruiter, sigma, seed)
    rel_hat = perceive_relations(relations.with_noise(sigma), recruiter, seed)
    costs = np.stack([w.costs for w in ordered])
    return RecruiterView(
        recruiter=recruiter,
        worker_ids=tuple(relations.node_ids),
        perceived_skills=perceived,
        costs=costs,
        uncertainty=variance,
        perceived_relations=rel_hat,
    )


def filter_available(workers, project: Project):
    """Workers whose availability window covers the whole project window."""
    start, end = project.window
    return [w for w in workers if w.enter_time <= start and w.leave_time >= end]


# --- objective ----------------------------------------------------------------

def objective_batch(members: np.ndarray, skill_cols, view: RecruiterView,
                    weights: ObjectiveWeights) -> np.ndarray:
    """Objective values for a batch of teams.

    ``members`` holds view row indices, one row per team, column j giving
    the worker assigned to ``skill_cols[j]``.  The GA fitness path and
    ``team_objective`` both run through here, so a decoded genome's
    objective equals its fitness bit for bit.
    """
    members = np.asarray(members)
    if members.ndim == 1:
        members = members[None, :]
    cols = np.asarray(skill_cols, dtype=np.intp)
    s = len(cols)
    lin = (
        weights.skill * view.perceived_skills[members, cols] / weights.skill_scale
        - weights.uncertainty * view.uncertainty[members] / weights.uncertainty_scale
        - weights.cost * view.costs[members, cols] / weights.cost_scale
    )
    total = lin.sum(axis=1)
    if s > 1:
        rel = view.perceived_relations.values
        sub = rel[members[:, :, None], members[:, None, :]]
        diag = np.arange(s)
        pair_sum = sub.sum(axis=(1, 2)) - sub[:, diag, diag].sum(axis=1)
        total = total + weights.relation / (s - 1) * pair_sum / weights.relation_scale
    return total


def team_objective(team: Team, view: RecruiterView, weights: ObjectiveWeights,
                   project: Project) -> float:
    """Scalar objective of a full team under a recruiter's view."""
    validate_team(team, project, view.worker_ids)
    members = np.array([view.index[w] for _, w in team.assignment], dtype=np.intp)
    return float(objective_batch(members, project.required_skills, view, weights)[0])


def efficiency(worker_id: int, skill_index: int, team: Team, view: RecruiterView,
               weights: ObjectiveWeights) -> float:
    """Per-worker recruitment efficiency within a team context.

    The relation term averages perceived weights toward the other team
    members; a one-worker team has no relation term.
    """
    wi = view.index[worker_id]
    lin = (
        weights.skill * view.perceived_skills[wi, skill_index] / weights.skill_scale
        - weights.uncertainty * view.uncertainty[wi] / weights.uncertainty_scale
        - weights.cost * view.costs[wi, skill_index] / weights.cost_scale
    )
    others = [w for w in team.members if w != worker_id]
    if not others:
        return float(lin)
    rel = view.perceived_relations.values
    acc = 0.0
    for other in others:
        acc += rel[wi, view.index[other]]
    return float(lin + weights.relation / len(others) * acc / weights.relation_scale)


def default_normalizers(workers, view: RecruiterView,
                        weights: ObjectiveWeights | None = None) -> ObjectiveWeights:
    """Weights with scales set from the pool: max cost and max uncertainty.

    Skill and relation scales stay 1 (both quantities already live in
    [0, 1]); zero maxima fall back to 1 so the objective stays finite.
    """
    base = weights or ObjectiveWeights()
    cost_top = float(view.costs.max()) if view.costs.size else 0.0
    unc_top = float(view.uncertainty.max()) if view.uncertainty.size else 0.0
    return ObjectiveWeights(
        skill=base.skill,
        uncertainty=base.uncertainty,
        cost=base.cost,
        relation=base.relation,
        skill_scale=1.0,
        uncertainty_scale=unc_top if unc_top > 0 else 1.0,
        cost_scale=cost_top if cost_top > 0 else 1.0,
        relation_scale=1.0,
    )


def pairwise_hired_indicator(team: Team, worker_ids) -> np.ndarray:
    """Symmetric 0/1 matrix: 1 where both workers are hired, zero diagonal."""
    ids = list(worker_ids)
    hired = np.array([1 if w in set(team.members) else 0 for w in ids], dtype=np.int8)
    v = np.outer(hired, hired)
    np.fill_diagonal(v, 0)
    return v


# --- worker CSV ---------------------------------------------------------------

def write_workers_csv(path, workers, catalog: SkillCatalog | None = None) -> None:
    """Worker table: id, category, tenure, window, then skill_i / cost_i."""
    if not workers:
        raise DataError("no workers to write")
    nskills = len(workers[0].skill_levels)
    header = (
        ["worker_id", "job_category", "tenure_days", "enter", "leave"]
        + [f"skill_{i}" for i in range(nskills)]
        + [f"cost_{i}" for i in range(nskills)]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for w in sorted(workers, key=lambda x: x.id):
            leave = "inf" if math.isinf(w.leave_time) else repr(float(w.leave_time))
            row = [w.id, w.job_category, w.tenure_days, repr(float(w.enter_time)), leave]
            row += [repr(float(x)) for x in w.skill_levels]
            row += [repr(float(x)) for x in w.costs]
            writer.writerow(row)


def read_workers_csv(path):
    """Inverse of write_workers_csv; returns a list of Workers."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"worker table not found: {path}")
    workers = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"empty worker table {path}") from None
        skill_cols = [i for i, h in enumerate(header) if h.startswith("skill_")]
        cost_cols = [i for i, h in enumerate(header) if h.startswith("cost_")]
        expected = ["worker_id", "job_category", "tenure_days", "enter", "leave"]
        if header[:5] != expected or not skill_cols or len(skill_cols) != len(cost_cols):
            raise DataError(f"unexpected worker-table header in {path}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                workers.append(Worker(
                    id=int(row[0]),
                    job_category=row[1],
                    tenure_days=int(row[2]),
                    enter_time=float(row[3]),
                    leave_time=float(row[4]),
                    skill_levels=np.array([float(row[i]) for i in skill_cols]),
                    costs=np.array([float(row[i]) for i in cost_cols]),
                ))
            except (ValueError, IndexError):
                raise DataError(f"{path}: malformed worker row at line {lineno}") from None
    if not workers:
        raise DataError(f"no workers in {path}")
    return workers
