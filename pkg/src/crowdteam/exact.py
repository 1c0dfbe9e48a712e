"""Exact recruitment: branch-and-bound search and a full-enumeration oracle.

Both strategies maximize the perceived team objective.  The platform solves
once against its own view; the leader-based strategy solves once per
candidate leader (each with that leader's view, and with the leader forced
to hold one required skill) and keeps the best.

Tie-breaking is deterministic: among objective-equal teams the one whose
worker-id tuple (in required-skill order) is lexicographically smallest
wins; among objective-equal leaders the lowest leader id wins.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .domain import (
    ObjectiveWeights,
    Project,
    RecruiterView,
    Team,
    objective_batch,
    team_objective,
)
from .errors import BudgetExceededError, DataError, InfeasibleError, TimeLimitError

BOUND_NONE = "none"
BOUND_GREEDY_UPPER = "greedy_upper"

PLATFORM_STRATEGY = "platform"
LEADER_STRATEGY = "leader"

#: Enumeration budget for the oracle (injective assignments).
ORACLE_BUDGET = 10_000_000

# Slack subtracted from the incumbent before pruning, so float dust in the
# bound arithmetic can never prune an objective-equal (tie-relevant) team.
_PRUNE_MARGIN = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    strategy: str = PLATFORM_STRATEGY
    bound_mode: str = BOUND_GREEDY_UPPER
    time_limit: float | None = None   # seconds
    big_m: float | None = None        # documentation of the ILP constant only

    def __post_init__(self):
        if self.strategy not in (PLATFORM_STRATEGY, LEADER_STRATEGY):
            raise DataError(f"unknown strategy {self.strategy!r}")
        if self.bound_mode not in (BOUND_NONE, BOUND_GREEDY_UPPER):
            raise DataError(f"unknown bound mode {self.bound_mode!r}")
        if self.time_limit is not None and self.time_limit <= 0:
            raise DataError("time limit must be positive")

    def effective_big_m(self, num_workers: int, num_required: int) -> float:
        # The search never materializes big-M constraints; the value is kept
        # for reporting and validated against its lower bound.
        value = self.big_m if self.big_m is not None else float(num_workers * num_required)
        if value < num_workers * num_required:
            raise DataError(
                f"big_m {value} below |pool| * |required| = {num_workers * num_required}"
            )
        return value


def _pool_ids(pool) -> list[int]:
    ids = sorted(w.id if hasattr(w, "id") else int(w) for w in pool)
    if len(set(ids)) != len(ids):
        raise DataError("duplicate worker ids in pool")
    return ids


def _search(view: RecruiterView, weights: ObjectiveWeights, skill_cols,
            candidate_ids, forced_id=None, bound_mode=BOUND_GREEDY_UPPER,
            deadline=None):
    """Depth-first max search over injective slot assignments.

    Slots follow required-skill catalog order.  Returns (value, worker-id
    tuple) for the best team, with the lexicographic tie-break applied
    against the id tuple regardless of exploration order.
    """
    s = len(skill_cols)
    ids = list(candidate_ids)
    n = len(ids)
    rows = [view.index[w] for w in ids]
    rel_scale = weights.relation_scale

    # Slot-major linear terms as plain lists: the inner loop is pure Python.
    skills = view.perceived_skills
    costs = view.costs
    unc = view.uncertainty
    lin = []
    for k in skill_cols:
        lin.append([
            weights.skill * skills[r, k] / weights.skill_scale
            - weights.uncertainty * unc[r] / weights.uncertainty_scale
            - weights.cost * costs[r, k] / weights.cost_scale
            for r in rows
        ])
    rel = view.perceived_relations.values[np.ix_(rows, rows)].tolist()
    pair_coef = weights.relation / ((s - 1) * rel_scale) if s > 1 else 0.0

    # Candidate order per slot: best linear term first for early incumbents;
    # the accept rule keeps the result order-independent.
    order = [sorted(range(n), key=lambda i, col=j: (-lin[col][i], ids[i]))
             for j in range(s)]

    use_bound = bound_mode == BOUND_GREEDY_UPPER
    if use_bound:
        best_lin = [max(lin[j]) for j in range(s)]
        suffix = [0.0] * (s + 1)
        for j in range(s - 1, -1, -1):
            suffix[j] = suffix[j + 1] + best_lin[j]
        total_pairs = s * (s - 1)

        def remainder_bound(depth: int) -> float:
            # Open slots contribute at most their best linear term; unknown
            # ordered relation pairs are bounded by weight 1 (post-clamp max).
            open_rel = total_pairs - depth * (depth - 1)
            return suffix[depth] + pair_coef * open_rel

    forced_idx = ids.index(forced_id) if forced_id is not None else None

    best_val = -np.inf
    best_team: tuple[int, ...] | None = None
    used = [False] * n
    chosen = [0] * s
    visits = 0

    def rec(depth: int, acc: float):
        nonlocal best_val, best_team, visits
        visits += 1
        if deadline is not None and visits % 2048 == 0 and time.perf_counter() > deadline:
            best = None
            if best_team is not None:
                best = tuple(ids[i] for i in best_team)
            raise TimeLimitError("solver time limit exceeded", best=best)
        if depth == s:
            team = tuple(chosen)
            if acc > best_val or (
                acc == best_val
                and best_team is not None
                and tuple(ids[i] for i in team) < tuple(ids[i] for i in best_team)
            ):
                best_val = acc
                best_team = team
            return
        if use_bound and acc + remainder_bound(depth) < best_val - _PRUNE_MARGIN:
            return
        remaining = s - depth
        must_place_forced = (
            forced_idx is not None and not used[forced_idx] and remaining == 1
        )
        lin_j = lin[depth]
        for i in order[depth]:
            if used[i] or (must_place_forced and i != forced_idx):
                continue
            gain = lin_j[i]
            if depth and pair_coef:
                rel_i = rel[i]
                acc_rel = 0.0
                for d in range(depth):
                    acc_rel += rel_i[chosen[d]]
                gain += 2.0 * pair_coef * acc_rel
            used[i] = True
            chosen[depth] = i
            rec(depth + 1, acc + gain)
            used[i] = False

    rec(0, 0.0)
    if best_team is None:
        raise InfeasibleError("search found no feasible assignment")
    return best_val, tuple(ids[i] for i in best_team)


def solve_platform(pool, project: Project, view: RecruiterView,
                   weights: ObjectiveWeights, cfg: SolverConfig | None = None) -> Team:
    """Best team under the platform's view; leaderless."""
    cfg = cfg or SolverConfig()
    ids = _pool_ids(pool)
    s = project.num_required
    if len(ids) < s:
        raise InfeasibleError(
            f"pool of {len(ids)} cannot cover {s} required skills"
        )
    cfg.effective_big_m(len(ids), s)
    deadline = time.perf_counter() + cfg.time_limit if cfg.time_limit else None
    _, members = _search(
        view, weights, project.required_skills, ids,
        bound_mode=cfg.bound_mode, deadline=deadline,
    )
    team = Team(tuple(zip(project.required_skills, members)))
    value = team_objective(team, view, weights, project)
    return Team(team.assignment, leader=None, objective_value=value)


def solve_leader(pool, project: Project, view_factory, weights: ObjectiveWeights,
                 cfg: SolverConfig | None = None) -> Team:
    """Best team over all candidate leaders, each forced into the team.

    ``view_factory(leader_id)`` supplies that leader's perception.  Each
    leader's solve maximizes its own perceived objective; the best perceived
    value across leaders wins, ties going to the lowest leader id.
    """
    cfg = cfg or SolverConfig()
    ids = _pool_ids(pool)
    s = project.num_required
    if len(ids) < s:
        raise InfeasibleError(
            f"pool of {len(ids)} cannot cover {s} required skills"
        )
    cfg.effective_big_m(len(ids), s)
    deadline = time.perf_counter() + cfg.time_limit if cfg.time_limit else None
    best_val = -np.inf
    best: tuple[int, tuple[int, ...], RecruiterView] | None = None
    for leader in ids:
        view = view_factory(leader)
        val, members = _search(
            view, weights, project.required_skills, ids, forced_id=leader,
            bound_mode=cfg.bound_mode, deadline=deadline,
        )
        if val > best_val or (
            val == best_val and best is not None and (leader, members) < best[:2]
        ):
            best_val = val
            best = (leader, members, view)
    assert best is not None
    leader, members, view = best
    team = Team(tuple(zip(project.required_skills, members)), leader=leader)
    value = team_objective(team, view, weights, project)
    return Team(team.assignment, leader=leader, objective_value=value)


@lru_cache(maxsize=8)
def _permutation_table(n: int, s: int) -> np.ndarray:
    dtype = np.int8 if n < 128 else np.int16
    return np.array(list(itertools.permutations(range(n), s)), dtype=dtype)


def enumerate_oracle(pool, project: Project, view: RecruiterView,
                     weights: ObjectiveWeights, leader: int | None = None) -> Team:
    """Exact maximum by full enumeration; validation reference for solvers.

    With ``leader`` set, only teams containing that worker count (the view
    should then be that leader's).  Refuses instances beyond ORACLE_BUDGET
    assignments.
    """
    ids = _pool_ids(pool)
    s = project.num_required
    n = len(ids)
    if n < s:
        raise InfeasibleError(f"pool of {n} cannot cover {s} required skills")
    count = 1
    for i in range(s):
        count *= n - i
    if count > ORACLE_BUDGET:
        raise BudgetExceededError(
            f"{count} assignments exceed the enumeration budget {ORACLE_BUDGET}"
        )
    perms = _permutation_table(n, s)
    row_map = np.array([view.index[w] for w in ids], dtype=np.intp)
    if leader is not None:
        if leader not in ids:
            raise DataError(f"leader {leader} not in pool")
        keep = (perms == ids.index(leader)).any(axis=1)
        perms = perms[keep]
        if not len(perms):
            raise InfeasibleError("no assignment contains the leader")
    best_val = -np.inf
    best_row: np.ndarray | None = None
    chunk = 200_000
    for lo in range(0, len(perms), chunk):
        block = perms[lo:lo + chunk].astype(np.intp)
        vals = objective_batch(row_map[block], project.required_skills, view, weights)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val = float(vals[i])
            best_row = block[i]
    assert best_row is not None
    members = tuple(ids[int(i)] for i in best_row)
    team = Team(tuple(zip(project.required_skills, members)), leader=leader)
    value = team_objective(team, view, weights, project)
    return Team(team.assignment, leader=leader, objective_value=value)
