"""Minimax compromise tax rate between two firms and the state.

Each agent's best attainable income C_i is found over the admissible rates,
its deviation at rate x is C_i - h_i(x), and the compromise rate minimises
the largest deviation. The search scans a uniform grid over [0, 1 - 1/N] and
polishes the best grid point by golden-section search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .income import MODES, IncomeReport, income_at, sweep
from .model import Scenario, ValidationError

_INV_PHI = (math.sqrt(5) - 1) / 2
TIE_TOL = 1e-12


def golden_section(f: Callable[[float], float], a: float, b: float,
                   tol: float = 1e-6) -> Tuple[float, float]:
    """Minimise ``f`` on [a, b] until the bracket is narrower than ``tol``.

    Returns the best point evaluated and its value.
    """
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def rate_grid(grid_size: int) -> np.ndarray:
    """Rates k/N for k = 0..N-1, i.e. N points spanning [0, 1 - 1/N]."""
    if grid_size < 11:
        raise ValidationError("grid_size must be at least 11")
    return np.arange(grid_size) / grid_size


@dataclass(frozen=True)
class MaxIncomes:
    """Best attainable incomes; ``c3`` follows the selected convention."""

    c1: float
    c2: float
    c3: float
    c3_last_rate: float
    c3_empirical: float
    x_state_best: float
    convention: str = "empirical"

    @property
    def values(self) -> Tuple[float, float, float]:
        return self.c1, self.c2, self.c3


def _state_income(scenario: Scenario, mode: str) -> Callable[[float], float]:
    return lambda x: income_at(scenario, x, mode).h3


def max_incomes(scenario: Scenario, mode: str = "decoupled", grid_size: int = 101,
                convention: str = "empirical", reports=None, tol: float = 1e-6) -> MaxIncomes:
    """C1 = h1(0), C2 = h2(0) and the state's best income C3.

    The ``last_rate`` convention takes h3 at the largest grid rate 1 - 1/N. The
    ``empirical`` convention takes the largest h3 over the grid, polished by
    golden-section search on the neighbouring cells.
    """
    if convention not in ("empirical", "last_rate"):
        raise ValidationError(f"unknown C3 convention {convention!r}")
    xs = rate_grid(grid_size)
    if reports is None:
        reports = sweep(scenario, xs, mode)
    h3 = np.array([r.h3 for r in reports])
    k = int(np.argmax(h3))
    lo, hi = float(xs[max(k - 1, 0)]), float(xs[min(k + 1, len(xs) - 1)])
    f = _state_income(scenario, mode)
    x_ref, neg = golden_section(lambda x: -f(x), lo, hi, tol)
    if -neg > h3[k]:
        x_best, c3_emp = x_ref, float(-neg)
    else:
        x_best, c3_emp = float(xs[k]), float(h3[k])
    c3_last_rate = float(h3[-1])
    c3 = c3_emp if convention == "empirical" else c3_last_rate
    return MaxIncomes(reports[0].h1, reports[0].h2, c3, c3_last_rate, c3_emp, x_best, convention)


def deviations(scenario: Scenario, x: float, c_values, mode: str = "decoupled",
               report: Optional[IncomeReport] = None) -> Tuple[float, float, float]:
    """Shortfalls (C1 - h1(x), C2 - h2(x), C3 - h3(x))."""
    r = report if report is not None else income_at(scenario, x, mode)
    c1, c2, c3 = c_values
    return c1 - r.h1, c2 - r.h2, c3 - r.h3


@dataclass(frozen=True)
class CompromiseResult:
    """Minimax rate, the deviations there, and the grid it was found on.

    ``grid_max_deviation[i]`` is max_i(C_i - h_i) at ``grid_x[i]`` and
    ``grid_min_excess[i]`` is min_i(h_i - C_i); one is the negation of the
    other.
    """

    x_star: float
    max_deviation: float
    deviations: Tuple[float, float, float]
    c_values: Tuple[float, float, float]
    c3_last_rate: float
    c3_empirical: float
    grid_size: int
    mode: str
    include_state: bool
    c3_convention: str
    grid_x: np.ndarray = field(repr=False)
    grid_reports: Tuple[IncomeReport, ...] = field(repr=False)
    grid_max_deviation: np.ndarray = field(repr=False)
    grid_min_excess: np.ndarray = field(repr=False)
    refined: bool = False

    def as_dict(self) -> dict:
        return {
            "x_star": self.x_star,
            "max_deviation": self.max_deviation,
            "deviations": list(self.deviations),
            "c_values": list(self.c_values),
            "c3_last_rate": self.c3_last_rate,
            "c3_empirical": self.c3_empirical,
            "c3_convention": self.c3_convention,
            "include_state": self.include_state,
            "grid": {"size": self.grid_size, "mode": self.mode, "refined": self.refined},
        }


def _agent_mask(include_state: bool) -> np.ndarray:
    return np.array([True, True, include_state])


def compromise_point(scenario: Scenario, grid_size: int = 101, mode: str = "decoupled",
                     include_state: bool = True, c3_convention: str = "empirical",
                     tol: float = 1e-6, workers: int = 1) -> CompromiseResult:
    """Tax rate minimising the largest deviation among the agents.

    Ties on the grid (within 1e-12) go to the smallest rate. With
    ``include_state=False`` only the two firms are compared.
    """
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {sorted(MODES)}")
    xs = rate_grid(grid_size)
    reports = tuple(sweep(scenario, xs, mode, workers=workers))
    cmax = max_incomes(scenario, mode, grid_size, c3_convention, reports, tol)
    c = np.array(cmax.values)
    mask = _agent_mask(include_state)

    h = np.array([[r.h1, r.h2, r.h3] for r in reports])
    dev = c - h
    grid_max = dev[:, mask].max(axis=1)
    grid_min_excess = (h - c)[:, mask].min(axis=1)

    best = float(grid_max.min())
    k = int(np.flatnonzero(grid_max <= best + TIE_TOL)[0])
    x_star, f_star, report_star = float(xs[k]), float(grid_max[k]), reports[k]

    def objective(x: float) -> float:
        return max(d for d, m in zip(deviations(scenario, x, c, mode), mask) if m)

    lo, hi = float(xs[max(k - 1, 0)]), float(xs[min(k + 1, len(xs) - 1)])
    x_ref, f_ref = golden_section(objective, lo, hi, tol)
    refined = bool(f_ref < f_star - TIE_TOL)
    if refined:
        x_star, f_star = x_ref, f_ref
        report_star = income_at(scenario, x_star, mode)

    d_star = deviations(scenario, x_star, c, mode, report_star)
    d_star = tuple(float(d) for d in d_star)
    max_dev = max(d for d, m in zip(d_star, mask) if m)
    return CompromiseResult(
        x_star=x_star,
        max_deviation=max_dev,
        deviations=d_star,
        c_values=tuple(float(v) for v in c),
        c3_last_rate=cmax.c3_last_rate,
        c3_empirical=cmax.c3_empirical,
        grid_size=grid_size,
        mode=MODES[mode],
        include_state=include_state,
        c3_convention=c3_convention,
        grid_x=xs,
        grid_reports=reports,
        grid_max_deviation=grid_max,
        grid_min_excess=grid_min_excess,
        refined=refined,
    )
