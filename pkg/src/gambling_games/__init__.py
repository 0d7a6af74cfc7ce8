"""Zero-sum gambling games: discounted values, reachable sets, limit-value
checks and the oscillating counterexample."""

from .actions import ActionSet
from .builders import BUILDERS, build
from .charact import (
    CharacterizationReport, characterize, check_balanced, check_depressive,
    check_E, check_excessive, check_MZ, check_P, limit_value, one_player_limit,
    reduite_dep, reduite_exc,
)
from .core import (
    CheckResult, Distribution, GamblingGame, GamblingHouse, MetricSpace,
    TransitionPolytope, check_leavable, check_nonexpansive, kr_distance,
)
from .counterexample import (
    cross_validate_full, divergence_scan, solve_reduced, verify_dominance, z_closed_form,
)
from .errors import InputError, NumericalError, ResourceLimitError
from .minimax import solve_matrix_game
from .playbook import Strategy, guarantee_estimate, simulate, variation_probe
from .reach import (
    check_idempotent, check_strongly_acyclic, check_weakly_acyclic, reachable_set,
    reachable_sets, synthesize_potential,
)
from .scenario import Scenario, parse_scenario
from .shapley import lambda_sweep, n_stage_values, shapley_operator, solve_discounted

__version__ = "0.1.0"

__all__ = [
    "ActionSet", "build", "BUILDERS", "CharacterizationReport", "characterize",
    "check_balanced", "check_depressive", "check_E", "check_excessive",
    "check_idempotent", "check_leavable", "check_MZ", "check_nonexpansive",
    "check_P", "check_strongly_acyclic", "check_weakly_acyclic", "CheckResult",
    "cross_validate_full", "Distribution", "divergence_scan", "GamblingGame",
    "GamblingHouse", "guarantee_estimate", "InputError", "kr_distance",
    "lambda_sweep", "limit_value", "MetricSpace", "n_stage_values",
    "NumericalError", "one_player_limit", "parse_scenario", "reachable_set",
    "reachable_sets", "reduite_dep", "reduite_exc", "ResourceLimitError",
    "Scenario", "shapley_operator", "simulate", "solve_discounted",
    "solve_matrix_game", "solve_reduced", "Strategy", "synthesize_potential",
    "TransitionPolytope", "variation_probe", "verify_dominance", "z_closed_form",
]
