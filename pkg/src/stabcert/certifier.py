"""Finite-horizon certificates for approximability by an exact solution.

For ``g(φ(x)) = a(x) • g(x)`` and a candidate ``f`` the following are
equivalent (for ε vanishing along orbits):

* I:   a unique solution ``g`` has ``d(f(x), g(x)) <= ε(x)``;
* II:  ``d(f(φⁿ(x)), Aₙ(x) • f(x)) <= ε(x) + ε(φⁿ(x))`` for all ``n >= 1``;
* III: the same with ``δ(φⁿ(x))`` replacing the second ``ε``, for some ``δ``
  vanishing along orbits.

II and III are checked for ``1 <= n <= N``; every certificate records ``N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

from .engine import within
from .errors import CauchyStall, PreconditionViolated
from .linear import LinearEquationProblem, ProductCache, residual
from .series import (DEFAULT_POLICY, ErrorFn, Evaluator, OrbitVerdict, Point, TruncationPolicy,
                     eval_error, eval_point, iter_orbit, orbit_point, vanishes_along_orbit)

DEFAULT_HORIZON = 200
VANISH_HORIZON = 10**4
VANISH_TOL = 1e-6
MARGIN_ELISION_THRESHOLD = 1000


class Condition(str, Enum):
    I = "I"
    II = "II"
    III = "III"


class CertVerdict(str, Enum):
    CERTIFIED = "Certified"
    VIOLATED = "Violated"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Margin:
    x: Point
    n: int
    margin: float  # bound - achieved; negative beyond slack means violated


@dataclass
class Certificate:
    condition: Condition
    probes: list[Point]
    horizon: int
    verdict: CertVerdict
    margins: list[Margin] = field(default_factory=list)
    violations: list[Margin] = field(default_factory=list)
    witness: "Witness | None" = None
    orbit_verdicts: dict[Point, OrbitVerdict] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.verdict is CertVerdict.CERTIFIED

    def min_margin(self, x: Point | None = None) -> float:
        ms = [m.margin for m in self.margins if x is None or m.x == x]
        return min(ms) if ms else math.inf

    def to_dict(self, max_margins: int = MARGIN_ELISION_THRESHOLD) -> dict[str, Any]:
        out: dict[str, Any] = {
            "condition": self.condition.value,
            "verdict": self.verdict.value,
            "horizon": self.horizon,
            "probes": list(self.probes),
            "violations": [{"x": v.x, "n": v.n, "margin": v.margin} for v in self.violations],
            "margin_summary": [{"x": x, "min_margin": self.min_margin(x)} for x in self.probes],
        }
        if len(self.margins) <= max_margins:
            out["margins"] = [{"x": m.x, "n": m.n, "margin": m.margin} for m in self.margins]
        else:
            out["margins_elided"] = len(self.margins)
        if self.orbit_verdicts:
            out["orbit_verdicts"] = {repr(x): v.value for x, v in self.orbit_verdicts.items()}
        if self.witness is not None:
            out["witness"] = [
                {"x": x, "g": w.value, "iterations": w.iterations, "bound": w.bound}
                for x in self.probes for w in [self.witness.details(x)]]
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _check_horizon(N: int) -> None:
    if N < 1:
        raise ValueError("horizon N must be >= 1")


def _orbit_inequality(problem: LinearEquationProblem, f: Evaluator, eps: ErrorFn,
                      second: ErrorFn, probes: Sequence[Point], N: int
                      ) -> tuple[list[Margin], list[Margin]]:
    """Margins of ``d(f(φⁿx), Aₙ(x)•f(x)) <= ε(x) + second(φⁿx)`` for n = 1..N."""
    g = problem.group
    margins: list[Margin] = []
    violations: list[Margin] = []
    for x in probes:
        fx = eval_point(f, x)
        ex = eval_error(eps, x)
        cache = ProductCache(problem, x)
        for n, y in enumerate(iter_orbit(problem.phi, x)):
            if n == 0:
                continue
            achieved = g.dist(eval_point(f, y), g.op(cache[n], fx))
            bound = ex + eval_error(second, y)
            m = Margin(x, n, bound - achieved)
            margins.append(m)
            if not within(achieved, bound):
                violations.append(m)
            if n >= N:
                break
    return margins, violations


def check_condition_ii(problem: LinearEquationProblem, f: Evaluator, eps: ErrorFn,
                       probes: Sequence[Point], N: int = DEFAULT_HORIZON) -> Certificate:
    _check_horizon(N)
    margins, violations = _orbit_inequality(problem, f, eps, eps, probes, N)
    verdict = CertVerdict.VIOLATED if violations else CertVerdict.CERTIFIED
    return Certificate(Condition.II, list(probes), N, verdict, margins, violations)


def check_condition_iii(problem: LinearEquationProblem, f: Evaluator, eps: ErrorFn,
                        delta: ErrorFn, probes: Sequence[Point], N: int = DEFAULT_HORIZON,
                        horizon: int = VANISH_HORIZON, tol: float = VANISH_TOL) -> Certificate:
    """Condition III with the supplied ``δ``; membership of ``δ`` in E_φ is
    judged by :func:`vanishes_along_orbit` and can leave the verdict
    Inconclusive."""
    _check_horizon(N)
    margins, violations = _orbit_inequality(problem, f, eps, delta, probes, N)
    cert = Certificate(Condition.III, list(probes), N, CertVerdict.CERTIFIED, margins, violations)
    if violations:
        cert.verdict = CertVerdict.VIOLATED
        return cert
    for x in probes:
        cert.orbit_verdicts[x] = vanishes_along_orbit(delta, problem.phi, x, horizon, tol)
    if any(v is not OrbitVerdict.VANISHES for v in cert.orbit_verdicts.values()):
        cert.verdict = CertVerdict.INCONCLUSIVE
        cert.notes.append("delta not shown to vanish along every probe orbit")
    return cert


@dataclass(frozen=True)
class WitnessValue:
    value: Any
    iterations: int
    bound: float


class Witness:
    """The solution ``g(x) = lim Aₙ(x)⁻¹ • f(φⁿ(x))`` as a lazy evaluator.

    Iteration stops at the first ``n`` with ``ε(φⁿ(x)) <= policy.abs_tol``, so
    ``d(gₙ(x), g(x)) <= ε(φⁿ(x))``.  Results are memoized per point.
    """

    def __init__(self, problem: LinearEquationProblem, f: Evaluator, eps: ErrorFn,
                 policy: TruncationPolicy = DEFAULT_POLICY):
        self.problem = problem
        self.f = f
        self.eps = eps
        self.policy = policy
        self._memo: dict[Point, WitnessValue] = {}

    def details(self, x: Point) -> WitnessValue:
        hit = self._memo.get(x)
        if hit is not None:
            return hit
        p, g = self.problem, self.problem.group
        tol = self.policy.abs_tol
        cache = ProductCache(p, x)
        for n, y in enumerate(iter_orbit(p.phi, x)):
            e = eval_error(self.eps, y)
            if e <= tol:
                break
            if n >= self.policy.max_terms:
                raise CauchyStall(
                    f"eps(phi^n(x)) = {e:.3e} still above {tol:.1e} after {n} steps at x={x!r}; "
                    "eps does not appear to vanish along the orbit")
        value = g.op(g.inverse(cache[n]), eval_point(self.f, y))
        out = WitnessValue(value, n, e)
        self._memo[x] = out
        return out

    def __call__(self, x: Point) -> Any:
        return self.details(x).value


def certify_approximation(problem: LinearEquationProblem, f: Evaluator, eps: ErrorFn,
                          probes: Sequence[Point], N: int = DEFAULT_HORIZON,
                          policy: TruncationPolicy = DEFAULT_POLICY,
                          vanish_horizon: int = VANISH_HORIZON,
                          vanish_tol: float = VANISH_TOL) -> Certificate:
    """Decide condition I by way of condition II and build the witness ``g``."""
    ii = check_condition_ii(problem, f, eps, probes, N)
    cert = Certificate(Condition.I, list(probes), N, ii.verdict, ii.margins, ii.violations)
    if ii.verdict is CertVerdict.VIOLATED:
        cert.notes.append("condition II violated")
        return cert
    for x in probes:
        cert.orbit_verdicts[x] = vanishes_along_orbit(eps, problem.phi, x,
                                                      vanish_horizon, vanish_tol)
    if any(v is not OrbitVerdict.VANISHES for v in cert.orbit_verdicts.values()):
        cert.verdict = CertVerdict.INCONCLUSIVE
        cert.notes.append("eps not shown to vanish along every probe orbit")
        return cert
    witness = Witness(problem, f, eps, policy)
    g = problem.group
    for x in probes:
        achieved = g.dist(eval_point(f, x), witness(x))
        bound = eval_error(eps, x)
        if not within(achieved, bound):
            cert.violations.append(Margin(x, 0, bound - achieved))
    if cert.violations:
        cert.verdict = CertVerdict.VIOLATED
        cert.notes.append("witness farther than eps from f")
        return cert
    cert.witness = witness
    return cert


@dataclass
class UniquenessReport:
    distances: dict[Point, float]
    bounds: dict[Point, float]

    @property
    def max_distance(self) -> float:
        return max(self.distances.values(), default=0.0)

    @property
    def ok(self) -> bool:
        return all(self.distances[x] <= self.bounds[x] for x in self.distances)


def uniqueness_check(problem: LinearEquationProblem, g1: Evaluator, g2: Evaluator,
                     f: Evaluator, eps: ErrorFn, probes: Sequence[Point], horizon: int = 20,
                     solution_tol: float = 1e-9) -> UniquenessReport:
    """Compare two claimed ε-close solutions.

    Both must solve the equation (residual <= ``solution_tol``) and stay within
    ``ε`` of ``f`` at ``φᵐ(x)`` for ``m = 0..horizon``.  Their distance at ``x``
    is then at most ``2·ε(φ^horizon(x))``.
    """
    g = problem.group
    distances: dict[Point, float] = {}
    bounds: dict[Point, float] = {}
    for x in probes:
        for label, gi in (("g1", g1), ("g2", g2)):
            for m, y in enumerate(iter_orbit(problem.phi, x)):
                close = g.dist(eval_point(gi, y), eval_point(f, y))
                if not within(close, eval_error(eps, y)):
                    raise PreconditionViolated(
                        f"{label} is {close:.3e} from f at phi^{m}(x)={y!r}, "
                        f"beyond eps={eval_error(eps, y):.3e} (x={x!r})")
                if residual(problem, gi, y) > solution_tol:
                    raise PreconditionViolated(
                        f"{label} does not solve the equation at phi^{m}(x)={y!r}")
                if m >= horizon:
                    break
        distances[x] = g.dist(eval_point(g1, x), eval_point(g2, x))
        end = orbit_point(problem.phi, x, horizon)
        bounds[x] = 2.0 * eval_error(eps, end) * (1.0 + 1e-9) + 1e-12
    return UniquenessReport(distances, bounds)
