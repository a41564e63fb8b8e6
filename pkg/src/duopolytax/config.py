"""JSON scenario files: parsing, dotted overrides and the reverse mapping."""
from __future__ import annotations

import json
from typing import Any, Dict, Iterable

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
    validate,
)

_TOP_KEYS = {"firm1", "firm2", "demand", "system", "tax", "horizon", "solver",
             "extinction_floor", "decoupled"}
_REQUIRED = ("firm1", "firm2", "system", "horizon")
_FIRM_KEYS = {"rho", "kappa", "v0"}
_DEMAND_KEYS = {"lambda1", "lambda2"}
_SOLVER_KEYS = {"rel_tol", "abs_tol", "max_step", "sample_dt"}
_TAX_KEYS = {"none": set(), "lump_sum": {"u1", "u2"}, "proportional": {"x"}}


def _check_keys(section: str, data: Any, allowed: set, required: Iterable[str] = ()) -> dict:
    if not isinstance(data, dict):
        raise ValidationError(f"{section} must be a mapping")
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ValidationError(f"unknown key {section}.{unknown[0]}")
    for key in required:
        if key not in data:
            raise ValidationError(f"missing key {section}.{key}")
    return data


def _number(section: str, key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{section}.{key} must be a number")
    return float(value)


def _firm(name: str, data: Any) -> FirmParams:
    data = _check_keys(name, data, _FIRM_KEYS, _FIRM_KEYS)
    return FirmParams(*(_number(name, k, data[k]) for k in ("rho", "kappa", "v0")))


def _tax(data: Any):
    if data is None:
        return NoTax()
    if not isinstance(data, dict) or "kind" not in data:
        raise ValidationError("tax needs a kind")
    kind = data["kind"]
    if kind not in _TAX_KEYS:
        raise ValidationError(f"unknown tax kind {kind!r}")
    fields = _TAX_KEYS[kind]
    _check_keys("tax", data, fields | {"kind"}, fields)
    if kind == "lump_sum":
        return LumpSum(_number("tax", "u1", data["u1"]), _number("tax", "u2", data["u2"]))
    if kind == "proportional":
        return Proportional(_number("tax", "x", data["x"]))
    return NoTax()


def scenario_from_config(data: Dict[str, Any]) -> Scenario:
    """Build and validate a Scenario from a parsed config mapping.

    Raises:
        ValidationError: on unknown or missing keys, wrong types, or any
            violated scenario invariant.
    """
    _check_keys("config", data, _TOP_KEYS, _REQUIRED)
    try:
        system = SystemKind(data["system"])
    except ValueError:
        raise ValidationError(f"unknown system {data['system']!r}") from None
    demand = None
    if data.get("demand") is not None:
        d = _check_keys("demand", data["demand"], _DEMAND_KEYS, _DEMAND_KEYS)
        demand = DemandSpec(_number("demand", "lambda1", d["lambda1"]),
                            _number("demand", "lambda2", d["lambda2"]))
    solver = SolverSettings()
    if data.get("solver") is not None:
        s = _check_keys("solver", data["solver"], _SOLVER_KEYS)
        solver = SolverSettings(**{k: (None if v is None else _number("solver", k, v))
                                   for k, v in s.items()})
    extra = {}
    if "extinction_floor" in data:
        extra["extinction_floor"] = _number("config", "extinction_floor", data["extinction_floor"])
    if "decoupled" in data:
        if not isinstance(data["decoupled"], bool):
            raise ValidationError("decoupled must be true or false")
        extra["decoupled"] = data["decoupled"]
    scenario = Scenario(
        firm1=_firm("firm1", data["firm1"]),
        firm2=_firm("firm2", data["firm2"]),
        system=system,
        tax=_tax(data.get("tax")),
        horizon=_number("config", "horizon", data["horizon"]),
        demand=demand,
        solver=solver,
        **extra,
    )
    return validate(scenario)


def scenario_to_config(scenario: Scenario) -> Dict[str, Any]:
    """Inverse of :func:`scenario_from_config`."""
    tax = scenario.tax
    if isinstance(tax, Proportional):
        tax_cfg = {"kind": "proportional", "x": tax.x}
    elif isinstance(tax, LumpSum):
        tax_cfg = {"kind": "lump_sum", "u1": tax.u1, "u2": tax.u2}
    else:
        tax_cfg = {"kind": "none"}
    cfg = {
        "firm1": {"rho": scenario.firm1.rho, "kappa": scenario.firm1.kappa, "v0": scenario.firm1.v0},
        "firm2": {"rho": scenario.firm2.rho, "kappa": scenario.firm2.kappa, "v0": scenario.firm2.v0},
        "system": scenario.system.value,
        "tax": tax_cfg,
        "horizon": scenario.horizon,
        "solver": {
            "rel_tol": scenario.solver.rel_tol,
            "abs_tol": scenario.solver.abs_tol,
            "max_step": scenario.solver.max_step,
            "sample_dt": scenario.solver.sample_dt,
        },
        "extinction_floor": scenario.extinction_floor,
        "decoupled": scenario.decoupled,
    }
    if scenario.demand is not None:
        cfg["demand"] = {"lambda1": scenario.demand.lambda1, "lambda2": scenario.demand.lambda2}
    return cfg


def parse_value(text: str) -> Any:
    """JSON literal if it parses, otherwise the raw string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(data: Dict[str, Any], overrides: Iterable[str]) -> Dict[str, Any]:
    """Apply ``key.sub=value`` assignments to a copy of ``data``."""
    out = json.loads(json.dumps(data))
    for item in overrides:
        if "=" not in item:
            raise ValidationError(f"override {item!r} is not key=value")
        path, raw = item.split("=", 1)
        keys = path.strip().split(".")
        node = out
        for key in keys[:-1]:
            if not isinstance(node.get(key), dict):
                node[key] = {}
            node = node[key]
        node[keys[-1]] = parse_value(raw.strip())
    return out
