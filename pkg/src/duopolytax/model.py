"""Domain types and right-hand sides for the duopoly growth systems.

Capital and time are dimensionless throughout. Four systems are supported:

* ``COMPETING``       V1' = V1 (rho1 - kappa1 F),  V2' = V2 (rho2 - kappa2 F)
                      with the shared demand F = kappa1 V1 + kappa2 V2
* ``LINEAR_DEMAND``   same shape with F = lambda1 V1 + lambda2 V2
* ``LOTKA_VOLTERRA``  V1' = V1 (rho1 - kappa2 V2),  V2' = V2 (-rho2 + kappa1 V1)
* ``TAXED``           the competing system minus a tax flow (lump-sum U_i or
                      proportional x V_i)

A tax policy attached to ``COMPETING`` or ``LINEAR_DEMAND`` is applied the same
way; ``TAXED`` merely insists that one is present. ``LOTKA_VOLTERRA`` ignores
taxation.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple, Union


class ValidationError(ValueError):
    """A scenario violates one of its invariants."""


@dataclass(frozen=True)
class FirmParams:
    """Growth rate, saturation coefficient and initial capital of one firm."""

    rho: float
    kappa: float
    v0: float

    def validate(self, name: str = "firm") -> "FirmParams":
        for attr in ("rho", "kappa", "v0"):
            if not math.isfinite(getattr(self, attr)):
                raise ValidationError(f"{name}.{attr} must be finite")
        if self.rho <= 0:
            raise ValidationError(f"{name}.rho must be positive")
        if self.kappa <= 0:
            raise ValidationError(f"{name}.kappa must be positive")
        if self.v0 < 0:
            raise ValidationError(f"{name}.v0 must be nonnegative")
        return self


@dataclass(frozen=True)
class DemandSpec:
    """Weights of the linear demand F = lambda1 V1 + lambda2 V2."""

    lambda1: float
    lambda2: float

    def validate(self) -> "DemandSpec":
        for attr in ("lambda1", "lambda2"):
            value = getattr(self, attr)
            if not math.isfinite(value) or value <= 0:
                raise ValidationError(f"{attr} must be positive")
        return self


@dataclass(frozen=True)
class NoTax:
    def validate(self) -> "NoTax":
        return self


@dataclass(frozen=True)
class LumpSum:
    """Constant tax flows ``u1``, ``u2`` withdrawn per unit time."""

    u1: float
    u2: float

    def validate(self) -> "LumpSum":
        for attr in ("u1", "u2"):
            value = getattr(self, attr)
            if not math.isfinite(value) or value < 0:
                raise ValidationError(f"{attr} must be nonnegative and finite")
        return self


@dataclass(frozen=True)
class Proportional:
    """Tax equal to the share ``x`` of capital per unit time."""

    x: float

    def validate(self) -> "Proportional":
        if not (math.isfinite(self.x) and 0.0 <= self.x < 1.0):
            raise ValidationError("x out of [0,1)")
        return self


TaxPolicy = Union[NoTax, LumpSum, Proportional]


class SystemKind(str, enum.Enum):
    COMPETING = "competing"
    LINEAR_DEMAND = "linear_demand"
    LOTKA_VOLTERRA = "lotka_volterra"
    TAXED = "taxed"


@dataclass(frozen=True)
class SolverSettings:
    """Tolerances and sampling of the reference integrator.

    ``max_step`` and ``sample_dt`` default to ``horizon/100`` and
    ``horizon/1000``; use :meth:`resolve` to obtain concrete values.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: Optional[float] = None
    sample_dt: Optional[float] = None

    def resolve(self, horizon: float) -> "SolverSettings":
        return replace(
            self,
            max_step=horizon / 100 if self.max_step is None else self.max_step,
            sample_dt=horizon / 1000 if self.sample_dt is None else self.sample_dt,
        )

    def validate(self, horizon: float) -> "SolverSettings":
        s = self.resolve(horizon)
        if not (s.rel_tol > 0 and math.isfinite(s.rel_tol)):
            raise ValidationError("rel_tol must be positive")
        if not (s.abs_tol > 0 and math.isfinite(s.abs_tol)):
            raise ValidationError("abs_tol must be positive")
        if not (s.max_step > 0 and math.isfinite(s.max_step)):
            raise ValidationError("max_step must be positive")
        if not (0 < s.sample_dt <= horizon):
            raise ValidationError("sample_dt must be in (0, horizon]")
        return self


@dataclass(frozen=True)
class Scenario:
    """Two firms, their market coupling, a tax policy and a horizon.

    ``decoupled=True`` drops the cross-saturation terms so that each firm
    follows its own logistic law; this is the reading under which the
    closed-form solutions hold.
    """

    firm1: FirmParams
    firm2: FirmParams
    system: SystemKind = SystemKind.COMPETING
    tax: TaxPolicy = field(default_factory=NoTax)
    horizon: float = 10.0
    demand: Optional[DemandSpec] = None
    solver: SolverSettings = field(default_factory=SolverSettings)
    extinction_floor: float = 1e-12
    decoupled: bool = False

    @property
    def lambdas(self) -> Tuple[float, float]:
        """Demand weights, defaulting to the saturation coefficients."""
        if self.demand is None:
            return self.firm1.kappa, self.firm2.kappa
        return self.demand.lambda1, self.demand.lambda2

    @property
    def tax_rate(self) -> float:
        return self.tax.x if isinstance(self.tax, Proportional) else 0.0

    def with_tax_rate(self, x: float) -> "Scenario":
        """Copy of the scenario taxed proportionally at rate ``x``."""
        system = self.system
        if system is SystemKind.LOTKA_VOLTERRA:
            raise ValidationError("LotkaVolterra ignores taxation")
        return replace(self, tax=Proportional(x), system=SystemKind.TAXED)

    def as_decoupled(self) -> "Scenario":
        return replace(self, decoupled=True)


def validate(scenario: Scenario) -> Scenario:
    """Return ``scenario`` unchanged if every invariant holds.

    Raises:
        ValidationError: naming the first violated invariant.
    """
    scenario.firm1.validate("firm1")
    scenario.firm2.validate("firm2")
    if scenario.demand is not None:
        scenario.demand.validate()
    if not isinstance(scenario.tax, (NoTax, LumpSum, Proportional)):
        raise ValidationError(f"unknown tax policy {scenario.tax!r}")
    scenario.tax.validate()
    if not isinstance(scenario.system, SystemKind):
        raise ValidationError(f"unknown system {scenario.system!r}")
    if scenario.system is SystemKind.TAXED and isinstance(scenario.tax, NoTax):
        raise ValidationError("Taxed system requires a tax policy")
    if not (math.isfinite(scenario.horizon) and scenario.horizon > 0):
        raise ValidationError("horizon must be positive")
    if not (math.isfinite(scenario.extinction_floor) and scenario.extinction_floor >= 0):
        raise ValidationError("extinction_floor must be nonnegative")
    scenario.solver.validate(scenario.horizon)
    return scenario


def rhs(system: SystemKind, scenario: Scenario, state, t: float = 0.0) -> Tuple[float, float]:
    """Evaluate (dV1/dt, dV2/dt) for ``system`` with the parameters of ``scenario``."""
    v1, v2 = float(state[0]), float(state[1])
    return make_rhs(system, scenario)(t, v1, v2)


def make_rhs(system: SystemKind, scenario: Scenario):
    """Build a scalar right-hand side ``f(t, v1, v2) -> (d1, d2)``.

    Parameters are bound once so the integrator's inner loop stays on plain
    floats.
    """
    r1, k1 = scenario.firm1.rho, scenario.firm1.kappa
    r2, k2 = scenario.firm2.rho, scenario.firm2.kappa

    if system is SystemKind.LOTKA_VOLTERRA:
        def lotka_volterra(t, v1, v2):
            return v1 * (r1 - k2 * v2), v2 * (-r2 + k1 * v1)
        return lotka_volterra

    l1, l2 = scenario.lambdas
    a11, a12 = k1 * l1, k1 * l2
    a21, a22 = k2 * l1, k2 * l2
    if scenario.decoupled:
        a12 = a21 = 0.0

    tax = scenario.tax
    x = tax.x if isinstance(tax, Proportional) else 0.0
    u1, u2 = (tax.u1, tax.u2) if isinstance(tax, LumpSum) else (0.0, 0.0)

    def competing(t, v1, v2):
        return (
            v1 * (r1 - a11 * v1 - a12 * v2) - x * v1 - u1,
            v2 * (r2 - a21 * v1 - a22 * v2) - x * v2 - u2,
        )

    return competing
