"""Problem-spec files for the command line.

A spec is a JSON object::

    {
      "fixture": "digamma-mild",              # optional
      "equation": "digamma" | {"builtin": "shift", "p": 2}
                | {"phi": "x+1", "a": "1/x"},  # optional when a fixture is given
      "group": "additive",                     # inline equations only
      "f": "ln(x)",                            # required without a fixture
      "epsilon": "0.1/x^2",                    # defaults to the fixture's ε
      "delta": "0.05/x^2",                     # condition III only
      "condition": "I" | "II" | "III",
      "probes": [1, 2, 3] | {"start": 0.5, "stop": 10, "step": 0.5},
      "horizon": 200,
      "policy": {"abs_tol": 1e-10, "max_terms": 1000000, ...}
    }

:func:`load_spec` validates and normalizes; :meth:`ProblemSpec.to_dict`
returns an echo that re-parses to an equal spec.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from typing import Any, Callable

from .applications import (FIXTURES, BuiltinProblem, PerturbationFixture, ProblemKind,
                           make_fixture, make_problem)
from .certifier import DEFAULT_HORIZON, Condition
from .errors import InvalidParams, SpecParseError
from .expr import ExprError, affine_map, parse_affine, parse_expr
from .groups import GROUPS, get_group
from .linear import LinearEquationProblem
from .series import TruncationPolicy

_KEYS = {"fixture", "equation", "group", "f", "epsilon", "delta", "condition", "probes",
         "horizon", "policy"}
_POLICY_FIELDS = {f.name for f in fields(TruncationPolicy)}
_BUILTINS = {k.value for k in ProblemKind}


@dataclass(frozen=True)
class ProblemSpec:
    probes: tuple[float, ...]
    fixture: str | None = None
    equation: dict[str, Any] | None = None
    group: str | None = None
    f: str | None = None
    epsilon: str | None = None
    delta: str | None = None
    condition: str = "I"
    horizon: int = DEFAULT_HORIZON
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)
    probe_grid: dict[str, float] | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for key in ("fixture", "equation", "group", "f", "epsilon", "delta"):
            v = getattr(self, key)
            if v is not None:
                out[key] = v
        out["condition"] = self.condition
        out["probes"] = dict(self.probe_grid) if self.probe_grid else list(self.probes)
        out["horizon"] = self.horizon
        out["policy"] = {name: getattr(self.policy, name) for name in sorted(_POLICY_FIELDS)}
        return out

    # -- materialization -------------------------------------------------

    def _fixture(self) -> PerturbationFixture | None:
        return make_fixture(self.fixture) if self.fixture else None

    def problem(self) -> LinearEquationProblem:
        fx = self._fixture()
        if self.equation is None:
            assert fx is not None
            return fx.problem
        eq = self.equation
        if "builtin" in eq:
            b = BuiltinProblem(ProblemKind(eq["builtin"]), p=eq.get("p", 1.0), c=eq.get("c", 2.0))
            return make_problem(b)
        kind, c = parse_affine(eq["phi"])
        a = parse_expr(eq["a"])
        return LinearEquationProblem(affine_map(kind, c), a, get_group(self.group or "additive"),
                                     name=f"phi={eq['phi']}, a={eq['a']}")

    def approximant(self) -> Callable[[float], Any]:
        if self.f is not None:
            return parse_expr(self.f)
        fx = self._fixture()
        assert fx is not None
        return fx.f

    def eps(self) -> Callable[[float], float]:
        if self.epsilon is not None:
            return parse_expr(self.epsilon)
        fx = self._fixture()
        assert fx is not None
        return fx.eps

    def delta_fn(self) -> Callable[[float], float] | None:
        return parse_expr(self.delta) if self.delta is not None else None


def _grid(spec: dict[str, Any]) -> tuple[float, ...]:
    missing = {"start", "stop", "step"} - set(spec)
    if missing:
        raise SpecParseError(f"probe grid needs {sorted(missing)}", field="probes")
    try:
        start, stop, step = (float(spec[k]) for k in ("start", "stop", "step"))
    except (TypeError, ValueError):
        raise SpecParseError("probe grid values must be numbers", field="probes") from None
    if not step > 0:
        raise SpecParseError("probe grid step must be > 0", field="probes")
    if stop < start:
        return ()
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(start + i * step for i in range(n))


def parse_probes(value: Any) -> tuple[tuple[float, ...], dict[str, float] | None]:
    if isinstance(value, dict):
        extra = set(value) - {"start", "stop", "step"}
        if extra:
            raise SpecParseError(f"unknown probe grid keys {sorted(extra)}", field="probes")
        return _grid(value), {k: float(value[k]) for k in ("start", "stop", "step")}
    if isinstance(value, list):
        try:
            pts = tuple(float(v) for v in value)
        except (TypeError, ValueError):
            raise SpecParseError("probes must be numbers", field="probes") from None
        if not all(math.isfinite(p) for p in pts):
            raise SpecParseError("probes must be finite", field="probes")
        return pts, None
    raise SpecParseError("probes must be a list or a {start, stop, step} grid", field="probes")


def parse_probe_arg(text: str) -> Any:
    """``--probes`` syntax: ``"1,2,3"`` or ``"start:stop:step"``."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            return {"start": start, "stop": stop, "step": step}
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise SpecParseError(f"cannot parse --probes {text!r}", field="probes") from None


def _check_expr(d: dict[str, Any], key: str) -> str | None:
    v = d.get(key)
    if v is None:
        return None
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        v = repr(float(v))
    try:
        parse_expr(v)
    except ExprError as exc:
        raise SpecParseError(str(exc), field=key) from None
    return v


def _normalize_equation(value: Any) -> dict[str, Any]:
    if isinstance(value, str):
        value = {"builtin": value}
    if not isinstance(value, dict):
        raise SpecParseError("equation must be a builtin name or an object", field="equation")
    if "builtin" in value:
        name = value["builtin"]
        if name not in _BUILTINS:
            raise SpecParseError(f"unknown builtin {name!r}; choose from {sorted(_BUILTINS)}",
                                 field="equation")
        extra = set(value) - {"builtin", "p", "c"}
        if extra:
            raise SpecParseError(f"unknown equation keys {sorted(extra)}", field="equation")
        out: dict[str, Any] = {"builtin": name}
        for k in ("p", "c"):
            if k in value:
                out[k] = float(value[k])
        try:
            make_problem(BuiltinProblem(ProblemKind(name), p=out.get("p", 1.0), c=out.get("c", 2.0)))
        except InvalidParams as exc:
            raise SpecParseError(str(exc), field="equation") from None
        return out
    if set(value) != {"phi", "a"}:
        raise SpecParseError("inline equation needs exactly 'phi' and 'a'", field="equation")
    try:
        parse_affine(value["phi"])
        parse_expr(value["a"])
    except ExprError as exc:
        raise SpecParseError(str(exc), field="equation") from None
    return {"phi": value["phi"], "a": value["a"]}


def spec_from_dict(d: Any, overrides: dict[str, Any] | None = None) -> ProblemSpec:
    if not isinstance(d, dict):
        raise SpecParseError("spec must be a JSON object")
    d = dict(d)
    for k, v in (overrides or {}).items():
        if k == "policy":
            d["policy"] = {**d.get("policy", {}), **v}
        elif v is not None:
            d[k] = v
    unknown = set(d) - _KEYS
    if unknown:
        raise SpecParseError(f"unknown keys {sorted(unknown)}")

    fixture = d.get("fixture")
    if fixture is not None and fixture not in FIXTURES:
        raise SpecParseError(f"unknown fixture {fixture!r}; available: {', '.join(FIXTURES)}",
                             field="fixture")
    equation = _normalize_equation(d["equation"]) if d.get("equation") is not None else None
    if fixture is None and equation is None:
        raise SpecParseError("either 'fixture' or 'equation' is required", field="equation")

    group = d.get("group")
    if group is not None and group not in GROUPS:
        raise SpecParseError(f"unknown group {group!r}; choose from {sorted(GROUPS)}", field="group")
    if group is not None and (equation is None or "builtin" in equation):
        raise SpecParseError("'group' applies only to inline equations", field="group")

    f = _check_expr(d, "f")
    epsilon = _check_expr(d, "epsilon")
    delta = _check_expr(d, "delta")
    if fixture is None and (f is None or epsilon is None):
        raise SpecParseError("'f' and 'epsilon' are required without a fixture",
                             field="f" if f is None else "epsilon")

    condition = str(d.get("condition", "I"))
    if condition not in {c.value for c in Condition}:
        raise SpecParseError(f"condition must be I, II or III, got {condition!r}", field="condition")
    if condition == "III" and delta is None:
        raise SpecParseError("condition III needs 'delta'", field="delta")

    if "probes" in d:
        probes, grid = parse_probes(d["probes"])
    elif fixture is not None:
        probes, grid = tuple(make_fixture(fixture).probes), None
    else:
        raise SpecParseError("'probes' is required", field="probes")
    if not probes:
        raise SpecParseError("probes must be nonempty", field="probes")

    horizon = d.get("horizon", DEFAULT_HORIZON)
    if isinstance(horizon, bool) or not isinstance(horizon, (int, float)) or int(horizon) != horizon \
            or horizon < 1:
        raise SpecParseError(f"horizon must be a positive integer, got {horizon!r}", field="horizon")

    pol = d.get("policy", {})
    if not isinstance(pol, dict):
        raise SpecParseError("policy must be an object", field="policy")
    bad = set(pol) - _POLICY_FIELDS
    if bad:
        raise SpecParseError(f"unknown policy fields {sorted(bad)}", field="policy")
    try:
        pol = {k: (int(v) if k in ("max_terms", "ratio_window") else float(v)) for k, v in pol.items()}
        policy = TruncationPolicy(**pol)
    except (TypeError, ValueError) as exc:
        raise SpecParseError(str(exc), field="policy") from None

    return ProblemSpec(probes=probes, fixture=fixture, equation=equation, group=group, f=f,
                       epsilon=epsilon, delta=delta, condition=condition, horizon=int(horizon),
                       policy=policy, probe_grid=grid)


def loads_spec(text: str, overrides: dict[str, Any] | None = None) -> ProblemSpec:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    return spec_from_dict(d, overrides)


def load_spec(path: str, overrides: dict[str, Any] | None = None) -> ProblemSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecParseError(f"cannot read spec file {path!r}: {exc.strerror}") from None
    return loads_spec(text, overrides)
