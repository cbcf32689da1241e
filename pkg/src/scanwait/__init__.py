"""Waiting-time and ending-pattern statistics for windowed success processes.

A process succeeds with probability p in each time step and every success
is kept for at most w steps; the package computes exact and approximate
statistics of the time until s successes coexist (the waiting time) and of
the arrangement they arrive in (the ending pattern), and applies them to
pick architecture parameters for a trap-based verified-delegation protocol.
"""

__version__ = "0.1.0"

from .algebra import TrialProbability, dagger, delta, star
from .approx import (
    ApproxReport,
    asymptotic_distribution,
    asymptotic_expectation,
    epsilon,
    infinite_tail_mass,
    p_star,
    true_p_star,
    true_w_star,
    w_star,
)
from .bqc import (
    BqcScenario,
    ColoredGraph,
    FeasibilityResult,
    NoiseModel,
    RatePoint,
    average_error,
    colored_graph,
    feasibility_threshold,
    fidelity_vector,
    optimize_rate,
    p_max,
    round_error,
    square_graph,
    test_round_success,
    w_max,
)
from .closed_forms import (
    InfiniteWindowStats,
    expectation_infinite,
    expectation_s2,
    infinite_stats,
    pattern_dist_s2,
    pattern_prob_infinite,
    pmf_infinite,
    variance_infinite,
    variance_s2,
)
from .patterns import EndingPattern, PatternSet, ages_from_pattern, enumerate_patterns
from .sim import SimConfig, SimResult, run_batch, run_one
from .solver import (
    WindowStats,
    dagger_matrix,
    solve_first_moment,
    solve_second_moment,
    star_matrix,
    std_dev,
)

__all__ = [
    "__version__",
    "TrialProbability", "delta", "star", "dagger",
    "EndingPattern", "PatternSet", "enumerate_patterns", "ages_from_pattern",
    "WindowStats", "solve_first_moment", "solve_second_moment", "std_dev",
    "star_matrix", "dagger_matrix",
    "InfiniteWindowStats", "infinite_stats", "pmf_infinite",
    "expectation_infinite", "variance_infinite", "pattern_prob_infinite",
    "expectation_s2", "variance_s2", "pattern_dist_s2",
    "ApproxReport", "epsilon", "w_star", "p_star", "true_w_star", "true_p_star",
    "asymptotic_expectation", "asymptotic_distribution", "infinite_tail_mass",
    "SimConfig", "SimResult", "run_one", "run_batch",
    "ColoredGraph", "colored_graph", "square_graph", "NoiseModel", "BqcScenario",
    "fidelity_vector", "test_round_success", "round_error", "average_error",
    "feasibility_threshold", "w_max", "p_max", "optimize_rate",
    "FeasibilityResult", "RatePoint",
]
