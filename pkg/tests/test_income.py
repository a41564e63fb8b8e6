import io
import math

import numpy as np
import pytest
from scipy.integrate import quad

from duopolytax.closed_form import logistic_solution
from duopolytax.income import (
    COUPLED_NUMERIC,
    DECOUPLED_CLOSED_FORM,
    DECOUPLED_NUMERIC,
    SWEEP_HEADER,
    income_at,
    income_closed_form,
    income_numeric,
    simpson_halving_error,
    sweep,
    total_income_untaxed,
    write_sweep_csv,
)
from duopolytax.model import LumpSum, SystemKind, ValidationError
from duopolytax.ode import integrate

from conftest import pair


def test_constant_capital_earns_its_level_times_horizon():
    # Starting at the equilibrium rho/kappa^2 keeps capital constant.
    s = pair(2.0, 1.0, 2.0, horizon=5.0).as_decoupled()
    report = income_at(s, 0.0, DECOUPLED_NUMERIC)
    assert report.h1 == pytest.approx(10.0, rel=1e-12)
    assert income_at(s, 0.0).h1 == pytest.approx(10.0, rel=1e-14)


def test_untaxed_state_earns_nothing(benchmark):
    for mode in ("coupled", "decoupled", DECOUPLED_NUMERIC):
        assert income_at(benchmark, 0.0, mode).h3 == 0.0


def test_symmetric_firms_earn_equal_incomes(benchmark):
    report = income_at(benchmark, 0.3, "coupled")
    assert report.h1 == pytest.approx(report.h2, rel=1e-9)


def test_equilibrium_start_under_tax():
    # (rho - x) / kappa^2 = 0.5 with rho=1, x=0.5.
    s = pair(1.0, 1.0, 0.5, horizon=8.0)
    report = income_at(s, 0.5)
    assert report.h1 == pytest.approx(0.5 * 8.0, rel=1e-14)


@pytest.mark.parametrize("mode", ["coupled", "decoupled", DECOUPLED_NUMERIC])
def test_state_income_is_tax_rate_times_firm_incomes(benchmark, mode):
    r = income_at(benchmark, 0.37, mode)
    assert r.h3 == pytest.approx(0.37 * (r.h1 + r.h2), rel=1e-15)
    assert r.total == r.h1 + r.h2 + r.h3


def test_numeric_matches_closed_form_on_benchmark():
    s = pair(1.0, 1.0, 0.5, horizon=10.0)
    exact = income_at(s, 0.2)
    numeric = income_at(s, 0.2, DECOUPLED_NUMERIC)
    assert exact.mode == DECOUPLED_CLOSED_FORM and numeric.mode == DECOUPLED_NUMERIC
    for a, b in ((exact.h1, numeric.h1), (exact.h2, numeric.h2), (exact.h3, numeric.h3)):
        assert abs(a - b) < 1e-8 * max(1.0, abs(a))


def test_closed_form_integral_matches_quadrature():
    for rho, k, x, v0 in [(1.0, 1.0, 0.2, 0.5), (0.5, 2.0, 0.8, 0.4), (2.5, 0.3, 0.1, 12.0)]:
        sol = logistic_solution(rho, k, x, v0)
        ref, _ = quad(lambda t: float(sol.value(t)), 0.0, 10.0, epsabs=1e-13, epsrel=1e-13)
        assert sol.integral(10.0) == pytest.approx(ref, rel=1e-10)


def test_untaxed_total_is_double_under_symmetry(benchmark):
    single = income_at(benchmark, 0.0).h1
    assert total_income_untaxed(benchmark) == pytest.approx(2 * single, rel=1e-15)
    # 1/(1+e^{-t}) integrates to ln((1 + e^T) / 2).
    assert single == pytest.approx(math.log((1 + math.e**10) / 2), rel=1e-13)


def test_firm_incomes_fall_with_tax(benchmark):
    h1 = [r.h1 for r in sweep(benchmark, np.linspace(0.0, 0.95, 20))]
    assert np.all(np.diff(h1) < 0)


def test_time_rescaling_scales_incomes():
    c = 2.5
    base = pair(1.2, 0.9, 0.4, 0.8, 1.3, 0.7, horizon=6.0)
    scaled = pair(1.2 / c, 0.9 / math.sqrt(c), 0.4, 0.8 / c, 1.3 / math.sqrt(c), 0.7,
                  horizon=6.0 * c)
    for mode in ("coupled", "decoupled"):
        a = income_at(base, 0.3, mode)
        b = income_at(scaled, 0.3 / c, mode)
        np.testing.assert_allclose([b.h1, b.h2], [c * a.h1, c * a.h2], rtol=1e-8)


def test_simpson_error_estimate_is_small(benchmark):
    traj = integrate(benchmark.with_tax_rate(0.2))
    err = simpson_halving_error(traj.t, traj.v1)
    assert err / income_numeric(benchmark.with_tax_rate(0.2)).h1 < 1e-8


def test_lump_sum_and_lv_have_no_income():
    with pytest.raises(ValidationError):
        income_numeric(pair(1, 1, 0.5, system=SystemKind.TAXED, tax=LumpSum(0.1, 0.1)))
    with pytest.raises(ValidationError):
        income_at(pair(1, 1, 0.5, system=SystemKind.LOTKA_VOLTERRA), 0.1)


def test_unknown_mode_rejected(benchmark):
    with pytest.raises(ValidationError, match="unknown mode"):
        income_at(benchmark, 0.1, "sideways")


def test_coupled_mode_label(benchmark):
    assert income_at(benchmark, 0.1, "coupled").mode == COUPLED_NUMERIC


def test_parallel_sweep_matches_serial(benchmark):
    xs = [0.0, 0.25, 0.5]
    assert sweep(benchmark, xs, "coupled", workers=2) == sweep(benchmark, xs, "coupled")


def test_sweep_csv_layout(benchmark):
    buf = io.StringIO()
    write_sweep_csv(sweep(benchmark, [0.0, 0.5]), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(SWEEP_HEADER) == "x,h1,h2,h3,total"
    assert len(lines) == 3 and lines[1].startswith("0.0,")


def test_report_dict_includes_total(benchmark):
    d = income_at(benchmark, 0.1).as_dict()
    assert d["total"] == pytest.approx(d["h1"] + d["h2"] + d["h3"])
