"""Analytic results for the competing-firm and taxed logistic models.

All logistic solutions are for the decoupled law

    V' = V (r - k V),     r = rho - x,  k = kappa * lambda

whose solution, with D = V0 / (r - k V0), is

    V(t) = r D e^{r t} / (1 + k D e^{r t}) = V0 / (e^{-r t} + k V0 (1 - e^{-r t}) / r).

The second form is the one evaluated; it stays finite for r <= 0 and at the
equilibrium start where D is infinite.
"""
from __future__ import annotations

import enum
import math
import sys
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .model import LumpSum, Scenario, SystemKind, ValidationError


class UnreachableError(ValueError):
    """The requested capital level is never attained in finite forward time."""


def _phi(r: float, t):
    """(1 - e^{-r t}) / r, continuous through r = 0."""
    t = np.asarray(t, dtype=float)
    if r == 0.0:
        return t
    return -np.expm1(-r * t) / r


@dataclass(frozen=True)
class LogisticSolution:
    """Solution of V' = V (rho_eff - kappa_sq V) with V(0) = v0.

    ``d_const`` is D = v0 / (rho_eff - kappa_sq v0); it is infinite when v0
    sits at the equilibrium, in which case the solution is constant.
    """

    rho_eff: float
    kappa_sq: float
    d_const: float
    v0: float
    mode: str = "decoupled"

    @property
    def equilibrium(self) -> float:
        return self.rho_eff / self.kappa_sq

    @property
    def is_constant(self) -> bool:
        return self.v0 == 0.0 or math.isinf(self.d_const)

    def value(self, t):
        """V(t); scalar in, scalar out, array in, array out."""
        scalar = np.ndim(t) == 0
        t = np.asarray(t, dtype=float)
        if self.is_constant:
            out = np.full_like(t, self.v0)
        else:
            r, k, v0 = self.rho_eff, self.kappa_sq, self.v0
            with np.errstate(over="ignore"):
                denom = np.exp(-r * t) + k * v0 * _phi(r, t)
            out = v0 / denom
            out = np.where(t == 0, v0, out)
        return float(out) if scalar else out

    __call__ = value

    def limit(self) -> float:
        """Value as t -> infinity."""
        if self.v0 == 0.0:
            return 0.0
        return max(self.equilibrium, 0.0) if not self.is_constant else self.v0

    def integral(self, horizon: float) -> float:
        """Exact value of the integral of V over [0, horizon].

        Uses the antiderivative (1/k) ln(1 + k v0 (e^{r t} - 1) / r), rewritten
        for r > 0 so that large r*t never overflows.
        """
        r, k, v0 = self.rho_eff, self.kappa_sq, self.v0
        if v0 == 0.0:
            return 0.0
        if self.is_constant:
            return v0 * horizon
        if r > 0:
            q = k * v0 / r
            return (r * horizon + math.log(q + (1.0 - q) * math.exp(-r * horizon))) / k
        growth = float(np.expm1(r * horizon) / r) if r != 0 else horizon
        return math.log1p(k * v0 * growth) / k

    def alternative_value(self, t, rho: float, x: float):
        """Diagnostic only: a commonly quoted taxed form with an x-free constant.

        Evaluates (rho - x) / (k + e^{t (x - rho)} D0 (rho - x)) with
        D0 = v0 / (rho - k v0). It does not satisfy V(0) = v0 for general
        parameters and is never used for results.
        """
        k = self.kappa_sq
        d0 = self.v0 / (rho - k * self.v0)
        t = np.asarray(t, dtype=float)
        return (rho - x) / (k + np.exp(t * (x - rho)) * d0 * (rho - x))


def equilibrium_single(rho: float, kappa: float, lam: float) -> float:
    """Carrying capacity rho / (kappa * lambda) of a firm alone on the market."""
    if rho <= 0 or kappa <= 0 or lam <= 0:
        raise ValidationError("rho, kappa and lambda must be positive")
    return rho / (kappa * lam)


def logistic_solution(rho: float, kappa_sq: float, x: float, v0: float) -> LogisticSolution:
    """Closed-form solution of V' = V (rho - x - kappa_sq V), V(0) = v0."""
    if v0 < 0:
        raise ValidationError("v0 must be nonnegative")
    if kappa_sq <= 0:
        raise ValidationError("kappa_sq must be positive")
    r = rho - x
    gap = r - kappa_sq * v0
    d = math.inf if gap == 0 else v0 / gap
    return LogisticSolution(r, kappa_sq, d, v0)


def _shared_demand_rates(scenario: Scenario) -> Tuple[float, float]:
    if scenario.system not in (SystemKind.COMPETING, SystemKind.LINEAR_DEMAND, SystemKind.TAXED):
        raise ValidationError("ratio law needs a shared-demand system")
    if scenario.decoupled:
        raise ValidationError("ratio law needs the coupled system")
    if isinstance(scenario.tax, LumpSum):
        raise ValidationError("ratio law does not hold under lump-sum tax")
    x = scenario.tax_rate
    return scenario.firm1.rho - x, scenario.firm2.rho - x


def ratio_exponent(scenario: Scenario) -> float:
    """Growth exponent of V1^kappa2 / V2^kappa1, i.e. rho1 kappa2 - rho2 kappa1.

    Under proportional taxation both rates are reduced by x.
    """
    r1, r2 = _shared_demand_rates(scenario)
    return r1 * scenario.firm2.kappa - r2 * scenario.firm1.kappa


def ratio_law(scenario: Scenario, t) -> float:
    """V1^kappa2 / V2^kappa1 at time ``t`` for a shared-demand system."""
    f1, f2 = scenario.firm1, scenario.firm2
    if f1.v0 <= 0 or f2.v0 <= 0:
        raise ValidationError("ratio law needs positive initial capital")
    c = ratio_exponent(scenario)
    initial = f1.v0 ** f2.kappa / f2.v0 ** f1.kappa
    return initial * np.exp(c * np.asarray(t, dtype=float))


def log_ratio(scenario: Scenario, t):
    """kappa2 ln V1 - kappa1 ln V2 predicted by the ratio law."""
    f1, f2 = scenario.firm1, scenario.firm2
    if f1.v0 <= 0 or f2.v0 <= 0:
        raise ValidationError("ratio law needs positive initial capital")
    c = ratio_exponent(scenario)
    return f2.kappa * math.log(f1.v0) - f1.kappa * math.log(f2.v0) + c * np.asarray(t, dtype=float)


class Survivor(str, enum.Enum):
    FIRM1_PERSISTS = "firm1_persists"
    FIRM2_PERSISTS = "firm2_persists"
    COEXISTENCE = "coexistence"


def survivor(scenario: Scenario) -> Survivor:
    """Which firm keeps its capital in the long run, from the ratio exponent's sign."""
    c = ratio_exponent(scenario)
    if c > 0:
        return Survivor.FIRM1_PERSISTS
    if c < 0:
        return Survivor.FIRM2_PERSISTS
    return Survivor.COEXISTENCE


def time_to_reach(rho: float, kappa_sq: float, x: float, v_from: float, v_to: float) -> float:
    """Time for the logistic law to carry capital from ``v_from`` to ``v_to``.

    Raises:
        UnreachableError: if the levels straddle or touch the equilibrium, or
            ``v_to`` lies behind ``v_from`` along the flow.
        ValidationError: for nonpositive capital.
    """
    if v_from <= 0 or v_to <= 0:
        raise ValidationError("capital levels must be positive")
    if v_to == v_from:
        return 0.0
    r = rho - x
    g_from = r - kappa_sq * v_from
    g_to = r - kappa_sq * v_to
    # Levels within rounding of the equilibrium count as the equilibrium.
    at_eq = 8 * sys.float_info.epsilon * max(abs(r), kappa_sq * max(v_from, v_to))
    if abs(g_from) <= at_eq or abs(g_to) <= at_eq or (g_from > 0) != (g_to > 0):
        raise UnreachableError("unreachable: target on or beyond the equilibrium")
    # dV/dt has the sign of g, so the flow moves toward the equilibrium.
    if (v_to - v_from) * g_from < 0:
        raise UnreachableError("unreachable: target lies against the flow")
    if r == 0:
        return (1.0 / v_to - 1.0 / v_from) / kappa_sq
    return math.log(abs((v_to / g_to) * (g_from / v_from))) / r


def taxed_pair_solution(scenario: Scenario) -> Tuple[LogisticSolution, LogisticSolution]:
    """Decoupled closed forms of both firms under the scenario's proportional rate.

    NoTax is treated as x = 0. The cross-saturation terms are ignored, which
    is the only reading under which closed forms exist.
    """
    if isinstance(scenario.tax, LumpSum):
        raise ValidationError("closed forms need proportional or no taxation")
    if scenario.system is SystemKind.LOTKA_VOLTERRA:
        raise ValidationError("closed forms do not apply to LotkaVolterra")
    x = scenario.tax_rate
    l1, l2 = scenario.lambdas
    f1, f2 = scenario.firm1, scenario.firm2
    return (
        logistic_solution(f1.rho, f1.kappa * l1, x, f1.v0),
        logistic_solution(f2.rho, f2.kappa * l2, x, f2.v0),
    )

