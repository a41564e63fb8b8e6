from pathlib import Path

import numpy as np
import pytest

from duopolytax.model import FirmParams, Scenario, SystemKind

FIXTURES = Path(__file__).parent / "fixtures"


def pair(rho1, kappa1, v01, rho2=None, kappa2=None, v02=None, **kwargs) -> Scenario:
    """Two-firm scenario; the second firm defaults to a copy of the first."""
    rho2 = rho1 if rho2 is None else rho2
    kappa2 = kappa1 if kappa2 is None else kappa2
    v02 = v01 if v02 is None else v02
    return Scenario(FirmParams(rho1, kappa1, v01), FirmParams(rho2, kappa2, v02), **kwargs)


def random_decoupled(rng: np.random.Generator, horizon: float = 10.0) -> Scenario:
    """rho, kappa in [0.2, 3], v0 in (0, 1.5 rho/kappa^2], x in [0, 0.9]."""
    rho = rng.uniform(0.2, 3.0, 2)
    kappa = rng.uniform(0.2, 3.0, 2)
    v0 = (1.0 - rng.uniform(0.0, 1.0, 2)) * 1.5 * rho / kappa**2
    x = rng.uniform(0.0, 0.9)
    s = pair(rho[0], kappa[0], v0[0], rho[1], kappa[1], v0[1], horizon=horizon)
    return s.with_tax_rate(x).as_decoupled()


def random_lv(rng: np.random.Generator) -> Scenario:
    rho = rng.uniform(0.5, 2.0, 2)
    kappa = rng.uniform(0.5, 2.0, 2)
    eq = np.array([rho[1] / kappa[0], rho[0] / kappa[1]])
    v0 = eq * (1.0 + rng.uniform(-0.5, 0.5, 2))
    period = 2 * np.pi / np.sqrt(rho[0] * rho[1])
    return pair(rho[0], kappa[0], v0[0], rho[1], kappa[1], v0[1],
                system=SystemKind.LOTKA_VOLTERRA, horizon=6 * period)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def benchmark():
    """Symmetric firms rho=1, kappa=1, v0=0.5 over T=10."""
    return pair(1.0, 1.0, 0.5, horizon=10.0)


_CRITERIA = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    ok = call.excinfo is None
    detail = dict(item.user_properties).get("detail", "")
    prev = _CRITERIA.get(number)
    if prev is not None:
        ok = ok and prev[1]
        detail = "; ".join(d for d in (prev[2], detail) if d)
    _CRITERIA[number] = (title, ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, detail = _CRITERIA[number]
        status = "PASS" if ok else "FAIL"
        line = f"[{status}] {number}. {title}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
