"""Reference integrator for the two-firm systems.

An embedded Dormand-Prince 5(4) pair with PI step-size control. Steps are
shortened to land exactly on the output grid, so every stored sample is an
integrator node rather than an interpolated value. Between samples the
trajectory is represented by the cubic Hermite interpolant built from the
stored states and slopes.

Capital that falls below the extinction floor is pinned to zero for the rest
of the run and an extinction event is recorded; negative capital is never
accepted.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .model import Scenario, SolverSettings, make_rhs, validate

__all__ = [
    "IntegrationError",
    "SolverSettings",
    "Trajectory",
    "integrate",
    "solve",
    "resample",
    "write_csv",
]

Rhs = Callable[[float, float, float], Tuple[float, float]]

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)

_SAFETY = 0.9
_ALPHA = 0.7 / 5  # PI controller exponents (Gustafsson)
_BETA = 0.4 / 5
_MIN_FACTOR, _MAX_FACTOR = 0.2, 5.0
_UNDERFLOW = 1e-14


class IntegrationError(RuntimeError):
    """The integrator could not advance (step underflow or divergence)."""


@dataclass(frozen=True)
class Trajectory:
    """Samples of (V1, V2) on [0, T].

    Attributes:
        t: strictly increasing sample times, ``t[0] == 0`` and ``t[-1] == T``.
        v: array of shape (n, 2) with the capitals at ``t``.
        dv: slopes at ``t``; used for Hermite resampling.
        events: ``(time, kind)`` pairs, kind in {"extinction_firm1",
            "extinction_firm2"}.
        mode: "coupled" or "decoupled".
    """

    t: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    events: Tuple[Tuple[float, str], ...] = ()
    mode: str = "coupled"
    steps: int = field(default=0, compare=False)

    @property
    def v1(self) -> np.ndarray:
        return self.v[:, 0]

    @property
    def v2(self) -> np.ndarray:
        return self.v[:, 1]

    @property
    def horizon(self) -> float:
        return float(self.t[-1])

    def interpolant(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.t, self.v, self.dv, axis=0)


def sample_grid(horizon: float, sample_dt: float) -> np.ndarray:
    """Uniform output times k*sample_dt on [0, horizon] plus the exact endpoint."""
    n = int(math.floor(horizon / sample_dt + 1e-9))
    times = np.arange(n + 1, dtype=float) * sample_dt
    times = times[times < horizon * (1 - 1e-12)]
    return np.append(times, horizon)


def integrate(scenario: Scenario) -> Trajectory:
    """Integrate the scenario's system on [0, horizon]."""
    validate(scenario)
    settings = scenario.solver.resolve(scenario.horizon)
    f = make_rhs(scenario.system, scenario)
    traj = solve(
        f,
        (scenario.firm1.v0, scenario.firm2.v0),
        scenario.horizon,
        settings,
        extinction_floor=scenario.extinction_floor,
    )
    if scenario.decoupled:
        traj = Trajectory(traj.t, traj.v, traj.dv, traj.events, "decoupled", traj.steps)
    return traj


def _initial_step(f: Rhs, y1: float, y2: float, f1: float, f2: float,
                  settings: SolverSettings) -> float:
    sc1 = settings.abs_tol + settings.rel_tol * abs(y1)
    sc2 = settings.abs_tol + settings.rel_tol * abs(y2)
    d0 = math.sqrt(((y1 / sc1) ** 2 + (y2 / sc2) ** 2) / 2)
    d1 = math.sqrt(((f1 / sc1) ** 2 + (f2 / sc2) ** 2) / 2)
    h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    return min(h, settings.max_step)


def solve(
    f: Rhs,
    y0: Sequence[float],
    horizon: float,
    settings: SolverSettings,
    extinction_floor: float = 1e-12,
) -> Trajectory:
    """Integrate ``y' = f(t, y)`` for a two-component state from t = 0.

    ``settings`` must already be resolved against ``horizon``.

    Raises:
        IntegrationError: "stiffness/underflow" if the step size collapses
            below 1e-14*horizon, "divergence" if the state becomes non-finite.
    """
    rtol, atol = settings.rel_tol, settings.abs_tol
    max_step = settings.max_step
    times = sample_grid(horizon, settings.sample_dt)
    h_min = _UNDERFLOW * horizon

    y1, y2 = float(y0[0]), float(y0[1])
    pin1, pin2 = y1 < extinction_floor, y2 < extinction_floor
    events: List[Tuple[float, str]] = []
    if pin1:
        if y1 > 0:
            events.append((0.0, "extinction_firm1"))
        y1 = 0.0
    if pin2:
        if y2 > 0:
            events.append((0.0, "extinction_firm2"))
        y2 = 0.0

    def g(t, a, b):
        d1, d2 = f(t, a, b)
        return (0.0 if pin1 else d1), (0.0 if pin2 else d2)

    k1a, k1b = g(0.0, y1, y2)
    out_v = np.empty((len(times), 2))
    out_dv = np.empty((len(times), 2))
    out_v[0] = (y1, y2)
    out_dv[0] = (k1a, k1b)

    t = 0.0
    h = _initial_step(f, y1, y2, k1a, k1b, settings)
    err_prev = 1e-4
    steps = 0
    idx = 1
    while idx < len(times):
        target = float(times[idx])
        remaining = target - t
        landing = h >= remaining * (1 - 1e-12)
        hs = remaining if landing else h

        if hs < h_min:
            raise IntegrationError(f"stiffness/underflow at t={t:.6g} (step {hs:.3g})")

        a2 = g(t + _C2 * hs, y1 + hs * _A21 * k1a, y2 + hs * _A21 * k1b)
        a3 = g(t + _C3 * hs,
               y1 + hs * (_A31 * k1a + _A32 * a2[0]),
               y2 + hs * (_A31 * k1b + _A32 * a2[1]))
        a4 = g(t + _C4 * hs,
               y1 + hs * (_A41 * k1a + _A42 * a2[0] + _A43 * a3[0]),
               y2 + hs * (_A41 * k1b + _A42 * a2[1] + _A43 * a3[1]))
        a5 = g(t + _C5 * hs,
               y1 + hs * (_A51 * k1a + _A52 * a2[0] + _A53 * a3[0] + _A54 * a4[0]),
               y2 + hs * (_A51 * k1b + _A52 * a2[1] + _A53 * a3[1] + _A54 * a4[1]))
        a6 = g(t + hs,
               y1 + hs * (_A61 * k1a + _A62 * a2[0] + _A63 * a3[0] + _A64 * a4[0] + _A65 * a5[0]),
               y2 + hs * (_A61 * k1b + _A62 * a2[1] + _A63 * a3[1] + _A64 * a4[1] + _A65 * a5[1]))
        n1 = y1 + hs * (_B1 * k1a + _B3 * a3[0] + _B4 * a4[0] + _B5 * a5[0] + _B6 * a6[0])
        n2 = y2 + hs * (_B1 * k1b + _B3 * a3[1] + _B4 * a4[1] + _B5 * a5[1] + _B6 * a6[1])
        if not (math.isfinite(n1) and math.isfinite(n2)):
            raise IntegrationError(f"divergence at t={t:.6g}")
        a7 = g(t + hs, n1, n2)
        e1 = hs * (_E1 * k1a + _E3 * a3[0] + _E4 * a4[0] + _E5 * a5[0] + _E6 * a6[0] + _E7 * a7[0])
        e2 = hs * (_E1 * k1b + _E3 * a3[1] + _E4 * a4[1] + _E5 * a5[1] + _E6 * a6[1] + _E7 * a7[1])
        s1 = atol + rtol * max(abs(y1), abs(n1))
        s2 = atol + rtol * max(abs(y2), abs(n2))
        err = math.sqrt(((e1 / s1) ** 2 + (e2 / s2) ** 2) / 2)

        if n1 < -atol or n2 < -atol:
            h = hs / 2
            continue
        if err > 1.0:
            h = hs * max(_MIN_FACTOR, _SAFETY * err ** -_ALPHA)
            continue

        steps += 1
        factor = _SAFETY * max(err, 1e-10) ** -_ALPHA * err_prev ** _BETA
        h_next = hs * min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        if landing:
            h_next = max(h_next, h)
        h = min(h_next, max_step)
        err_prev = max(err, 1e-4)

        t = target if landing else t + hs
        y1, y2 = n1, n2
        refresh = False
        if not pin1 and y1 < extinction_floor:
            pin1, y1, refresh = True, 0.0, True
            events.append((t, "extinction_firm1"))
        if not pin2 and y2 < extinction_floor:
            pin2, y2, refresh = True, 0.0, True
            events.append((t, "extinction_firm2"))
        k1a, k1b = g(t, y1, y2) if refresh else a7

        if landing:
            out_v[idx] = (y1, y2)
            out_dv[idx] = (k1a, k1b)
            idx += 1

    return Trajectory(times, out_v, out_dv, tuple(events), "coupled", steps)


def resample(trajectory: Trajectory, times) -> np.ndarray:
    """Cubic Hermite values of (V1, V2) at ``times``; exact at sample points.

    Raises:
        ValueError: if any time lies outside [0, T].
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    t = trajectory.t
    if np.any(times < t[0]) or np.any(times > t[-1]):
        raise ValueError(f"time out of range [0, {t[-1]}]")
    out = trajectory.interpolant()(times)
    # Reproduce stored samples bit-for-bit.
    pos = np.searchsorted(t, times)
    hit = (pos < len(t)) & (t[np.minimum(pos, len(t) - 1)] == times)
    out[hit] = trajectory.v[pos[hit]]
    return out


def format_float(value: float) -> str:
    """Shortest round-trip decimal representation."""
    return repr(float(value))


def write_csv(trajectory: Trajectory, dest) -> None:
    """Write ``t,V1,V2`` rows to a path or text stream."""
    if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            write_csv(trajectory, fh)
        return
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(["t", "V1", "V2"])
    for ti, (a, b) in zip(trajectory.t, trajectory.v):
        writer.writerow([format_float(ti), format_float(a), format_float(b)])


def to_csv_string(trajectory: Trajectory) -> str:
    buf = io.StringIO()
    write_csv(trajectory, buf)
    return buf.getvalue()
