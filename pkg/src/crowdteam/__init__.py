"""Team recruitment over a social worker graph.

The pieces compose in rough dependency order: ``graph`` (edge lists, hop
distances, relation strengths), ``domain`` (workers, projects, recruiter
views, the team objective), ``exact`` (branch-and-bound recruiter),
``embed`` (random-walk and attribute embeddings), ``clustering`` (k-means
and candidate pools), ``ga`` (genetic recruiter plus a PSO baseline),
``dataset`` (synthetic population), ``bench`` (experiment runners) and
``cli`` (the ``crowdteam`` entry point).
"""

__version__ = "0.1.0"

from .domain import (
    ObjectiveWeights,
    Project,
    Team,
    Worker,
    make_view,
    team_objective,
)
from .errors import (
    CrowdTeamError,
    DataError,
    InfeasibleError,
    PoolShapeError,
    TimeLimitError,
)
from .exact import SolverConfig, enumerate_oracle, solve_leader, solve_platform
from .ga import GaConfig, evolve, init_population, pso_baseline
from .graph import (
    PLATFORM,
    SocialGraph,
    all_pairs_hops,
    load_edge_list,
    make_graph,
    relation_weights,
)

__all__ = [
    "__version__",
    "CrowdTeamError",
    "DataError",
    "GaConfig",
    "InfeasibleError",
    "ObjectiveWeights",
    "PLATFORM",
    "PoolShapeError",
    "Project",
    "SocialGraph",
    "SolverConfig",
    "Team",
    "TimeLimitError",
    "Worker",
    "all_pairs_hops",
    "enumerate_oracle",
    "evolve",
    "init_population",
    "load_edge_list",
    "make_graph",
    "make_view",
    "pso_baseline",
    "relation_weights",
    "solve_leader",
    "solve_platform",
    "team_objective",
]
