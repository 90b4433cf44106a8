"""Optimal consumption, investment and fixed-term asset allocation under guarantees."""
from .errors import (FixedTermError, InfeasibleCapitalError, InvalidArgumentError, InvalidSpecError,
                     NoFreeCapital, NumericalError, UndefinedStrategyError)
from .kernels import BACKEND
from .market import (Attractiveness, Constraints, IlliquidSpec, MarketSpec, MarketState, NumericsConfig,
                     Preferences, Scenario, classify_nonredundancy, simulate_paths)
from .policy import (PolicySolution, evaluate_policy, geug, liquid_only_value, osiw, solve_policy, svf)
from .split import SplitResult, solve_split, split_capital, v0_min
from .uoc import UoCSolution, solve_uoc
from .uow import CaseTag, UoWSolution, optimize_psi2, solve_uow
from .xi import XiArgs, xi, xi_dz

__all__ = [
    "Attractiveness", "BACKEND", "CaseTag", "Constraints", "FixedTermError", "IlliquidSpec",
    "InfeasibleCapitalError", "InvalidArgumentError", "InvalidSpecError", "MarketSpec", "MarketState",
    "NoFreeCapital", "NumericalError", "NumericsConfig", "PolicySolution", "Preferences", "Scenario",
    "SplitResult", "UndefinedStrategyError", "UoCSolution", "UoWSolution", "XiArgs",
    "classify_nonredundancy", "evaluate_policy", "geug", "liquid_only_value", "optimize_psi2", "osiw",
    "simulate_paths", "solve_policy", "solve_split", "solve_uoc", "solve_uow", "split_capital", "svf",
    "v0_min", "xi", "xi_dz",
]
