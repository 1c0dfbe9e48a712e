"""Worker domain: perception, views, and the team objective."""

import math

import numpy as np
import pytest

from crowdteam.domain import (
    DEFAULT_CATALOG,
    ObjectiveWeights,
    Project,
    SkillCatalog,
    Team,
    Worker,
    default_normalizers,
    efficiency,
    filter_available,
    leader_noise_sigma,
    make_view,
    objective_batch,
    pairwise_hired_indicator,
    perceive_skills,
    platform_noise_sigma,
    read_workers_csv,
    team_objective,
    validate_team,
    write_workers_csv,
)
from crowdteam.errors import DataError
from crowdteam.graph import PLATFORM, all_pairs_hops, make_graph, relation_weights


def objective_oracle(team, view, weights, project):
    """Scalar objective recomputed the slow way, term by term."""
    total = 0.0
    for skill, worker in team.assignment:
        i = view.index[worker]
        total += weights.skill * view.perceived_skills[i, skill] / weights.skill_scale
        total -= weights.uncertainty * view.uncertainty[i] / weights.uncertainty_scale
        total -= weights.cost * view.costs[i, skill] / weights.cost_scale
    s = len(project.required_skills)
    if s > 1:
        rel = view.perceived_relations.values
        pair = 0.0
        for u in team.members:
            for v in team.members:
                if u != v:
                    pair += rel[view.index[u], view.index[v]]
        total += weights.relation / (s - 1) * pair / weights.relation_scale
    return total


def simple_workers(n, num_skills=4, seed=0):
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


def instance(n=8, num_skills=4, seed=3, base_sigma=0.3, recruiter=PLATFORM):
    workers = simple_workers(n, num_skills, seed)
    gen = np.random.default_rng(seed + 1)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if gen.random() < 0.45]
    g = make_graph(range(n), edges)
    rel = relation_weights(all_pairs_hops(g))
    view = make_view(workers, rel, recruiter, seed=seed, base_sigma=base_sigma)
    return workers, rel, view


# --- value types -----------------------------------------------------------------

def test_catalog_lookup_and_validation():
    assert DEFAULT_CATALOG.index("it") == 3
    with pytest.raises(DataError):
        DEFAULT_CATALOG.index("juggling")
    with pytest.raises(DataError):
        SkillCatalog(("a", "a"))
    with pytest.raises(DataError):
        SkillCatalog(())


def test_worker_validation():
    with pytest.raises(DataError):
        Worker(0, np.array([1.2]), np.array([1.0]))
    with pytest.raises(DataError):
        Worker(0, np.array([0.5]), np.array([-1.0]))
    with pytest.raises(DataError):
        Worker(0, np.array([0.5]), np.array([1.0, 2.0]))
    with pytest.raises(DataError):
        Worker(0, np.array([0.5]), np.array([1.0]), tenure_days=-1)


def test_project_sorts_and_dedupes_skills():
    p = Project(id=1, required_skills=(3, 1, 3, 2))
    assert p.required_skills == (1, 2, 3)
    assert p.num_required == 3
    assert p.requires(2) and not p.requires(0)
    with pytest.raises(DataError):
        Project(id=2, required_skills=())
    with pytest.raises(DataError):
        Project(id=3, required_skills=(-1, 0))


def test_objective_weights_validation():
    with pytest.raises(DataError):
        ObjectiveWeights(skill=0.5, uncertainty=0.5, cost=0.5, relation=0.5)
    with pytest.raises(DataError):
        ObjectiveWeights(cost_scale=0.0)
    w = ObjectiveWeights()
    assert w.as_tuple == (0.25, 0.25, 0.25, 0.25)


def test_team_sorts_assignment():
    t = Team(assignment=((2, 9), (0, 4), (1, 7)))
    assert t.assignment == ((0, 4), (1, 7), (2, 9))
    assert t.members == (4, 7, 9)
    assert t.worker_for(1) == 7
    assert t.as_dict() == {0: 4, 1: 7, 2: 9}


def test_validate_team_errors():
    project = Project(id=1, required_skills=(0, 1))
    validate_team(Team(((0, 3), (1, 5))), project)
    with pytest.raises(DataError):
        validate_team(Team(((0, 3),)), project)              # missing skill
    with pytest.raises(DataError):
        validate_team(Team(((0, 3), (1, 3))), project)       # duplicate worker
    with pytest.raises(DataError):
        validate_team(Team(((0, 3), (1, 5)), leader=9), project)
    with pytest.raises(DataError):
        validate_team(Team(((0, 3), (1, 5))), project, worker_ids=[3])


def test_filter_available():
    w_in = Worker(0, np.array([0.5]), np.array([1.0]), enter_time=0.0, leave_time=10.0)
    w_out = Worker(1, np.array([0.5]), np.array([1.0]), enter_time=3.0, leave_time=10.0)
    p = Project(id=1, required_skills=(0,), window=(1.0, 5.0))
    assert filter_available([w_in, w_out], p) == [w_in]


# --- perception ----------------------------------------------------------------

def test_platform_noise_shrinks_with_tenure():
    workers = [
        Worker(0, np.array([0.5]), np.array([1.0]), tenure_days=0),
        Worker(1, np.array([0.5]), np.array([1.0]), tenure_days=1825),
        Worker(2, np.array([0.5]), np.array([1.0]), tenure_days=3650),
    ]
    sigma = platform_noise_sigma(workers, base_sigma=0.3)
    assert sigma[0] == pytest.approx(0.3)
    assert sigma[1] == pytest.approx(0.15)
    assert sigma[2] == pytest.approx(0.0)


def test_leader_noise_grows_with_distance(path_graph):
    rel = relation_weights(all_pairs_hops(path_graph))
    sigma = leader_noise_sigma(rel, leader=0, base_sigma=0.3)
    assert sigma[0] == 0.0                       # self
    assert sigma[1] == pytest.approx(0.0)        # direct friend, R = 1
    assert sigma[2] == pytest.approx(0.3 * (1 - 1 / 3))
    assert sigma[3] == pytest.approx(0.3 * (1 - 1 / 4))
    with pytest.raises(DataError):
        leader_noise_sigma(rel, leader=44)


def test_perceive_skills_shared_draw_across_skills():
    """One draw per worker: the perturbation is constant across skill columns."""
    workers = simple_workers(5, num_skills=4, seed=2)
    # mid-range levels so the clip stays inactive
    workers = [
        Worker(w.id, np.full(4, 0.5), w.costs, tenure_days=w.tenure_days)
        for w in workers
    ]
    perceived, variance = perceive_skills(workers, PLATFORM, np.full(5, 0.1), seed=4)
    delta = perceived - 0.5
    assert np.allclose(delta, delta[:, :1])
    assert np.allclose(variance, 0.01)


def test_perceive_skills_clip_and_determinism():
    workers = simple_workers(6, seed=5)
    a, _ = perceive_skills(workers, PLATFORM, np.full(6, 0.8), seed=9)
    b, _ = perceive_skills(workers, PLATFORM, np.full(6, 0.8), seed=9)
    assert np.array_equal(a, b)
    assert np.all(a >= 0.0) and np.all(a <= 1.0)
    c, _ = perceive_skills(workers, 2, np.full(6, 0.8), seed=9)
    assert not np.array_equal(a, c)


def test_make_view_zero_sigma_is_ground_truth():
    workers, rel, view = instance(base_sigma=0.0)
    true = np.stack([w.skill_levels for w in workers])
    assert np.array_equal(view.perceived_skills, true)
    assert np.array_equal(view.perceived_relations.values, rel.weights)
    assert np.all(view.uncertainty == 0.0)


def test_make_view_worker_set_mismatch():
    workers, rel, _ = instance()
    with pytest.raises(DataError):
        make_view(workers[:-1], rel, PLATFORM, seed=0)


def test_make_view_leader_self_sees_truth():
    workers, rel, view = instance(recruiter=2, base_sigma=0.3)
    i = view.index[2]
    assert view.uncertainty[i] == 0.0
    assert np.array_equal(view.perceived_skills[i], workers[2].skill_levels)


# --- objective -------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(6))
def test_objective_matches_oracle(seed):
    workers, rel, view = instance(n=9, seed=seed)
    project = Project(id=1, required_skills=(0, 1, 3))
    weights = ObjectiveWeights(uncertainty_scale=0.09, cost_scale=10.0)
    gen = np.random.default_rng(seed)
    for _ in range(20):
        members = gen.choice(9, size=3, replace=False)
        team = Team(tuple(zip(project.required_skills, (int(w) for w in members))))
        got = team_objective(team, view, weights, project)
        assert got == pytest.approx(
            objective_oracle(team, view, weights, project), abs=1e-12
        )


def test_objective_single_skill_has_no_pair_term():
    workers, rel, view = instance(n=5)
    project = Project(id=1, required_skills=(2,))
    weights = ObjectiveWeights()
    team = Team(((2, 1),))
    expect = (
        0.25 * view.perceived_skills[1, 2]
        - 0.25 * view.uncertainty[1]
        - 0.25 * view.costs[1, 2]
    )
    assert team_objective(team, view, weights, project) == pytest.approx(expect)


def test_objective_batch_matches_scalar_path():
    workers, rel, view = instance(n=10, seed=8)
    project = Project(id=1, required_skills=(0, 2, 3))
    weights = ObjectiveWeights(cost_scale=12.0)
    gen = np.random.default_rng(0)
    members = np.stack([gen.choice(10, size=3, replace=False) for _ in range(40)])
    batch = objective_batch(members, project.required_skills, view, weights)
    for row, value in zip(members, batch):
        team = Team(tuple(zip(project.required_skills, (int(w) for w in row))))
        assert team_objective(team, view, weights, project) == value


def test_efficiency_sums_to_linear_part_of_objective():
    """Summing per-member efficiencies reproduces the team objective."""
    workers, rel, view = instance(n=7, seed=11)
    project = Project(id=1, required_skills=(0, 1, 2))
    weights = ObjectiveWeights(cost_scale=10.0)
    team = Team(((0, 1), (1, 4), (2, 6)))
    total = sum(
        efficiency(w, k, team, view, weights) for k, w in team.assignment
    )
    # efficiency averages relations over |T|-1 peers; the objective divides
    # by |required|-1, which is the same number here, so the sums agree.
    assert total == pytest.approx(team_objective(team, view, weights, project))


def test_default_normalizers_use_pool_maxima():
    workers, rel, view = instance(n=6, seed=1)
    w = default_normalizers(workers, view)
    assert w.cost_scale == pytest.approx(float(view.costs.max()))
    assert w.uncertainty_scale == pytest.approx(float(view.uncertainty.max()))
    assert w.skill_scale == 1.0


def test_pairwise_hired_indicator():
    team = Team(((0, 2), (1, 5)))
    v = pairwise_hired_indicator(team, [2, 3, 5])
    expect = np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]], dtype=np.int8)
    assert np.array_equal(v, expect)


# --- worker CSV -------------------------------------------------------------------

def test_workers_csv_round_trip(tmp_path):
    workers = simple_workers(5, seed=3)
    path = tmp_path / "workers.csv"
    write_workers_csv(path, workers, DEFAULT_CATALOG)
    back = read_workers_csv(path)
    assert len(back) == 5
    for orig, copy in zip(workers, back):
        assert copy.id == orig.id
        assert np.array_equal(copy.skill_levels, orig.skill_levels)
        assert np.array_equal(copy.costs, orig.costs)
        assert copy.tenure_days == orig.tenure_days
        assert math.isinf(copy.leave_time)


def test_workers_csv_errors(tmp_path):
    with pytest.raises(DataError):
        read_workers_csv(tmp_path / "missing.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("worker_id,job_category\n")
    with pytest.raises(DataError):
        read_workers_csv(bad)
    malformed = tmp_path / "mal.csv"
    malformed.write_text(
        "worker_id,job_category,tenure_days,enter,leave,skill_0,cost_0\n"
        "0,cat,10,0.0,inf,0.5,oops\n"
    )
    with pytest.raises(DataError, match="line 2"):
        read_workers_csv(malformed)
