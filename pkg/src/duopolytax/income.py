"""Finite-horizon incomes of the two firms and of the state.

h1 and h2 are the time integrals of each firm's capital over [0, T]; h3 is
the integral of the tax flow x (V1 + V2). They are computed either by
Simpson's rule on an integrated trajectory or, for the decoupled logistic
reading, from the exact antiderivative.
"""
from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable, List, Sequence

import numpy as np
from scipy.integrate import simpson

from .closed_form import taxed_pair_solution
from .model import LumpSum, Scenario, SystemKind, ValidationError
from .ode import IntegrationError, Trajectory, format_float, integrate

COUPLED_NUMERIC = "coupled-numeric"
DECOUPLED_NUMERIC = "decoupled-numeric"
DECOUPLED_CLOSED_FORM = "decoupled-closed-form"

# CLI-level names of the two evaluation routes.
MODES = {"coupled": COUPLED_NUMERIC, "decoupled": DECOUPLED_CLOSED_FORM}


@dataclass(frozen=True)
class IncomeReport:
    x: float
    mode: str
    h1: float
    h2: float
    h3: float

    @property
    def total(self) -> float:
        return self.h1 + self.h2 + self.h3

    def as_dict(self) -> dict:
        out = asdict(self)
        out["total"] = self.total
        return out


def _check_taxable(scenario: Scenario) -> float:
    if scenario.system is SystemKind.LOTKA_VOLTERRA:
        raise ValidationError("incomes are defined for the competing systems only")
    if isinstance(scenario.tax, LumpSum):
        raise ValidationError("incomes need proportional or no taxation")
    return scenario.tax_rate


def trajectory_incomes(trajectory: Trajectory, x: float):
    """(h1, h2, h3) of a sampled trajectory by composite Simpson quadrature."""
    h1 = float(simpson(trajectory.v1, x=trajectory.t))
    h2 = float(simpson(trajectory.v2, x=trajectory.t))
    return h1, h2, x * (h1 + h2)


def simpson_halving_error(t: np.ndarray, y: np.ndarray) -> float:
    """Richardson estimate |S(h) - S(2h)| / 15 of Simpson's error on ``y(t)``."""
    fine = simpson(y, x=t)
    coarse = simpson(y[::2], x=t[::2]) if len(t) % 2 else simpson(
        np.append(y[:-1:2], y[-1]), x=np.append(t[:-1:2], t[-1])
    )
    return float(abs(fine - coarse) / 15)


def income_numeric(scenario: Scenario) -> IncomeReport:
    """Integrate the scenario and take Simpson integrals of the samples.

    The scenario's ``decoupled`` flag selects the system; the report's mode
    says which one was used.
    """
    x = _check_taxable(scenario)
    traj = integrate(scenario)
    mode = DECOUPLED_NUMERIC if scenario.decoupled else COUPLED_NUMERIC
    return IncomeReport(x, mode, *trajectory_incomes(traj, x))


def income_closed_form(scenario: Scenario) -> IncomeReport:
    """Incomes of the decoupled logistic solutions, from their antiderivative."""
    x = _check_taxable(scenario)
    s1, s2 = taxed_pair_solution(scenario)
    h1 = float(s1.integral(scenario.horizon))
    h2 = float(s2.integral(scenario.horizon))
    return IncomeReport(x, DECOUPLED_CLOSED_FORM, h1, h2, x * (h1 + h2))


def total_income_untaxed(scenario: Scenario) -> float:
    """h1 + h2 of the decoupled firms without taxation."""
    report = income_closed_form(scenario.with_tax_rate(0.0))
    return report.h1 + report.h2


def income_at(scenario: Scenario, x: float, mode: str = "decoupled") -> IncomeReport:
    """Incomes with the scenario taxed proportionally at rate ``x``.

    ``mode`` is "coupled" (integrate the full system), "decoupled"
    (closed form) or "decoupled-numeric" (integrate the decoupled system).
    """
    taxed = scenario.with_tax_rate(x)
    try:
        if mode in ("coupled", COUPLED_NUMERIC):
            return income_numeric(taxed)
        if mode in ("decoupled", DECOUPLED_CLOSED_FORM):
            return income_closed_form(taxed)
        if mode == DECOUPLED_NUMERIC:
            return income_numeric(taxed.as_decoupled())
    except IntegrationError as exc:
        raise IntegrationError(f"at x={x!r}: {exc}") from exc
    raise ValidationError(f"unknown mode {mode!r}")


def _income_task(args):
    scenario, x, mode = args
    return income_at(scenario, x, mode)


def sweep(scenario: Scenario, xs: Iterable[float], mode: str = "decoupled",
          workers: int = 1) -> List[IncomeReport]:
    """Incomes at each rate in ``xs``, returned in grid order."""
    tasks = [(scenario, float(x), mode) for x in xs]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_income_task, tasks))
    return [_income_task(task) for task in tasks]


SWEEP_HEADER = ["x", "h1", "h2", "h3", "total"]


def write_sweep_csv(reports: Sequence[IncomeReport], dest) -> None:
    """Write ``x,h1,h2,h3,total`` rows to a path or text stream."""
    if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            write_sweep_csv(reports, fh)
        return
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for r in reports:
        writer.writerow([format_float(v) for v in (r.x, r.h1, r.h2, r.h3, r.total)])
