"""Conserved quantity, period and time averages of the Lotka-Volterra regime.

Uses the classical sign convention V1' = V1 (rho1 - kappa2 V2),
V2' = V2 (-rho2 + kappa1 V1), with interior equilibrium
(rho2/kappa1, rho1/kappa2).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from .model import Scenario, SystemKind, ValidationError
from .ode import Trajectory, integrate, resample


class PeriodDetectionError(RuntimeError):
    """No full oscillation could be identified in a trajectory."""


class AtEquilibrium(PeriodDetectionError):
    """The trajectory does not oscillate."""


def _rates(params) -> Tuple[float, float, float, float]:
    if isinstance(params, Scenario):
        return params.firm1.rho, params.firm2.rho, params.firm1.kappa, params.firm2.kappa
    rho1, rho2, kappa1, kappa2 = params
    return rho1, rho2, kappa1, kappa2


def lv_equilibrium(params) -> Tuple[float, float]:
    """Interior equilibrium (rho2/kappa1, rho1/kappa2).

    ``params`` is a Scenario or a (rho1, rho2, kappa1, kappa2) tuple.
    """
    rho1, rho2, kappa1, kappa2 = _rates(params)
    return rho2 / kappa1, rho1 / kappa2


def first_integral(state, params):
    """rho2 ln V1 - kappa1 V1 + rho1 ln V2 - kappa2 V2, constant along orbits."""
    rho1, rho2, kappa1, kappa2 = _rates(params)
    v1 = np.asarray(state[0], dtype=float)
    v2 = np.asarray(state[1], dtype=float)
    if np.any(v1 <= 0) or np.any(v2 <= 0):
        raise ValidationError("first integral needs positive capital")
    out = rho2 * np.log(v1) - kappa1 * v1 + rho1 * np.log(v2) - kappa2 * v2
    return float(out) if out.ndim == 0 else out


def h_component(v1, params):
    """H(V1) = V1bar ln V1 - V1; kappa1 * H is firm 1's share of the invariant."""
    bar1, _ = lv_equilibrium(params)
    return bar1 * np.log(v1) - v1


def g_component(v2, params):
    """G(V2) = V2bar ln V2 - V2; kappa2 * G is firm 2's share of the invariant."""
    _, bar2 = lv_equilibrium(params)
    return bar2 * np.log(v2) - v2


def h_second_derivative(v1, params):
    bar1, _ = lv_equilibrium(params)
    return -bar1 / np.asarray(v1, dtype=float) ** 2


def g_second_derivative(v2, params):
    _, bar2 = lv_equilibrium(params)
    return -bar2 / np.asarray(v2, dtype=float) ** 2


def section_crossings(trajectory: Trajectory, level: float) -> np.ndarray:
    """Times where V2 crosses ``level`` upward, refined on the Hermite interpolant."""
    spline = trajectory.interpolant()
    t, v2 = trajectory.t, trajectory.v2 - level
    idx = np.nonzero((v2[:-1] < 0) & (v2[1:] >= 0))[0]
    out = []
    for i in idx:
        if v2[i + 1] == 0:
            out.append(t[i + 1])
            continue
        out.append(brentq(lambda s: spline(s)[1] - level, t[i], t[i + 1], xtol=1e-14, rtol=1e-15))
    return np.asarray(out)


def detect_period(trajectory: Trajectory, params, amplitude_floor: float = 1e-9,
                  spread_tol: float = 1e-4) -> float:
    """Oscillation period from upward crossings of the section V2 = V2bar.

    The section passes through the equilibrium, so every closed orbit crosses
    it transversally exactly once per period in the upward direction.

    Raises:
        AtEquilibrium: if the trajectory stays within ``amplitude_floor`` of
            the equilibrium.
        PeriodDetectionError: "no return found" when fewer than two crossings
            fit in the horizon, or when successive returns disagree by more
            than ``spread_tol`` relative.
    """
    bar = np.array(lv_equilibrium(params))
    if np.max(np.abs(trajectory.v - bar)) < amplitude_floor:
        raise AtEquilibrium("at equilibrium")
    crossings = section_crossings(trajectory, bar[1])
    if len(crossings) < 2:
        raise PeriodDetectionError("no return found")
    returns = np.diff(crossings)
    period = float(np.mean(returns))
    if len(returns) > 1 and np.ptp(returns) / period > spread_tol:
        raise PeriodDetectionError(
            f"returns disagree ({np.ptp(returns) / period:.2e} relative spread)"
        )
    return period


def time_averages(trajectory: Trajectory, period: float, start: float = 0.0,
                  points: int = 4001) -> Tuple[float, float]:
    """Mean (V1, V2) over [start, start + period] by Simpson's rule."""
    if period <= 0:
        raise ValueError("period must be positive")
    grid = np.linspace(start, start + period, points)
    values = resample(trajectory, grid)
    means = simpson(values, x=grid, axis=0) / period
    return float(means[0]), float(means[1])


def linearized_period(params) -> float:
    """Small-amplitude period 2 pi / sqrt(rho1 rho2)."""
    rho1, rho2, _, _ = _rates(params)
    return 2 * np.pi / np.sqrt(rho1 * rho2)


@dataclass(frozen=True)
class LVAnalysis:
    """Equilibrium, invariant, period and period means of one run.

    ``period`` is None when the run starts at the equilibrium; ``averages``
    then equals the equilibrium.
    """

    equilibrium: Tuple[float, float]
    x_invariant: float
    invariant_drift: float
    period: Optional[float]
    averages: Tuple[float, float]
    at_equilibrium: bool = False


def analyze(scenario: Scenario, trajectory: Optional[Trajectory] = None) -> LVAnalysis:
    """Integrate (unless given a trajectory) and run the full analysis."""
    if scenario.system is not SystemKind.LOTKA_VOLTERRA:
        raise ValidationError("analysis needs the lotka_volterra system")
    if trajectory is None:
        trajectory = integrate(scenario)
    eq = lv_equilibrium(scenario)
    x0 = first_integral((scenario.firm1.v0, scenario.firm2.v0), scenario)
    inv = first_integral((trajectory.v1, trajectory.v2), scenario)
    drift = float(np.max(np.abs(inv - x0)))
    try:
        period = detect_period(trajectory, scenario)
    except AtEquilibrium:
        return LVAnalysis(eq, x0, drift, None, eq, at_equilibrium=True)
    return LVAnalysis(eq, x0, drift, period, time_averages(trajectory, period))
