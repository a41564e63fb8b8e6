"""Growth dynamics of two competing firms under taxation.

Simulation of the competing-firm, Lotka-Volterra and taxed systems, their
closed-form logistic solutions, finite-horizon incomes, and the minimax
compromise tax rate between the firms and the state.
"""
__version__ = "0.1.0"

from .model import (
    DemandSpec,
    FirmParams,
    LumpSum,
    NoTax,
    Proportional,
    Scenario,
    SolverSettings,
    SystemKind,
    ValidationError,
    rhs,
    validate,
)
from .ode import IntegrationError, Trajectory, integrate, resample
from .closed_form import (
    LogisticSolution,
    Survivor,
    UnreachableError,
    equilibrium_single,
    logistic_solution,
    ratio_law,
    survivor,
    taxed_pair_solution,
    time_to_reach,
)
from .lotka_volterra import (
    LVAnalysis,
    analyze,
    detect_period,
    first_integral,
    lv_equilibrium,
    time_averages,
)
from .income import (
    IncomeReport,
    income_at,
    income_closed_form,
    income_numeric,
    total_income_untaxed,
)
from .compromise import CompromiseResult, compromise_point, deviations, max_incomes

