"""Managed shared-benefit games: equilibrium efforts, optimal coalitions and their stability."""

from .analysis import (
    DynamicsTrace,
    StabilityReport,
    best_deviation,
    fixed_effort_values,
    is_stable,
    myopic_removal_dynamics,
    vsr,
)
from .core import (
    Affine,
    Coalition,
    Indicator,
    LinearCost,
    LogCost,
    MsbGame,
    MultilinearBenefit,
    PowerForm,
    QuadraticCost,
    SqrtCost,
    ZeroCost,
    coalition_contribution,
    eval_contribution,
    eval_cost,
    linearize_in_player,
    player_utility,
    principal_utility,
    shared_benefit,
)
from .equilibrium import (
    EquilibriumResult,
    SolveConfig,
    best_response,
    dominant_equilibrium,
    least_equilibrium,
    price_of_generativity,
    solve_coalitions,
)
from .errors import (
    CapExceededError,
    DomainError,
    InstanceError,
    InvalidSharesError,
    MonotonicityError,
    MsbError,
    NotDecomposableError,
    NotLinearError,
    ZeroShareError,
)
from .experiment import ExperimentReport, GenConfig, emit_report, generate_instance, heatmap_bins, run_experiment
from .io import game_from_dict, game_to_dict, load_edge_list, load_game
from .search import (
    CliqueVerdict,
    CoalitionSolution,
    FcopConfig,
    SolverMethod,
    almost_linear_optimal,
    brute_force_optimal,
    build_clique_instance,
    clique_decision,
    clique_reduction,
    fcop_optimal,
    knapsack_select,
    standalone_best_contribution,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
