"""The equation ``g(φ(x)) = a(x) • g(x)`` over a metric group.

``Aₙ(x) = a(φⁿ⁻¹(x)) • … • a(φ(x)) • a(x)`` (newest factor on the left,
``A₀ = identity``) relates solutions along an orbit: ``g(φⁿ(x)) = Aₙ(x) • g(x)``.
The associated operator is ``(Tu)(x) = a(x)⁻¹ • u(φ(x))`` with
``(Λδ)(x) = δ(φ(x))``; its fixed points are the solutions, and

    (Tⁿf)(x) = Aₙ(x)⁻¹ • f(φⁿ(x)).
"""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Any, Callable, Iterator, Sequence

from .engine import ContractiveOperator, ProbeResult, SolveReport, check_defect
from .errors import DomainViolation, NoConvergence
from .groups import MetricGroup
from .series import (DEFAULT_POLICY, ErrorFn, Evaluator, Point, SelfMap, TruncationPolicy,
                     _step, eval_error, eval_point, orbit_point, orbit_terms, sum_series)


_INF = math.inf


def _where(x: Point, index: int | None) -> str:
    return f"x={x!r}" if index is None else f"orbit index {index} (x={x!r})"


@dataclass(frozen=True)
class LinearEquationProblem:
    phi: SelfMap
    a: Callable[[Point], Any]
    group: MetricGroup
    name: str = "custom"

    def coefficient(self, x: Point, index: int | None = None) -> Any:
        """``a(x)`` validated in the group; ``index`` names the orbit position."""
        try:
            v = self.a(x)
        except (ArithmeticError, ValueError) as exc:
            raise DomainViolation(f"coefficient a undefined at {_where(x, index)}: {exc}") from exc
        try:
            return self.group.validate(v)
        except DomainViolation as exc:
            raise DomainViolation(f"coefficient a invalid at {_where(x, index)}: {exc}") from exc


class ProductCache:
    """``partials[n] = Aₙ(base)``, grown one group operation at a time."""

    def __init__(self, problem: LinearEquationProblem, base: Point):
        self.problem = problem
        self.base = base
        self.partials: list[Any] = [problem.group.identity]
        self._point = base  # φⁿ(base) for n = len(partials) - 1

    def __getitem__(self, n: int) -> Any:
        if n < 0:
            raise ValueError("n must be nonnegative")
        p = self.problem
        while len(self.partials) <= n:
            k = len(self.partials) - 1
            factor = p.coefficient(self._point, k)
            self.partials.append(p.group.op(factor, self.partials[-1]))
            self._point = p.phi(self._point)
        return self.partials[n]


def A_n(problem: LinearEquationProblem, x: Point, n: int,
        cache: ProductCache | None = None) -> Any:
    if cache is None:
        cache = ProductCache(problem, x)
    elif cache.base != x or cache.problem is not problem:
        raise ValueError("cache belongs to another base point or problem")
    return cache[n]


def residual(problem: LinearEquationProblem, f: Evaluator, x: Point) -> float:
    """Defect ``d(f(φ(x)), a(x) • f(x))``."""
    g = problem.group
    return g.dist(eval_point(f, problem.phi(x)), g.op(problem.coefficient(x), eval_point(f, x)))


class OrbitOperator(ContractiveOperator):
    """``(Tu)(x) = a(x)⁻¹ • u(φ(x))`` and ``(Λδ)(x) = δ(φ(x))``."""

    def __init__(self, problem: LinearEquationProblem):
        self.problem = problem
        p = problem
        g = problem.group

        def apply_T(u: Evaluator) -> Evaluator:
            return lambda x: g.op(g.inverse(p.coefficient(x)), u(p.phi(x)))

        def apply_Lambda(delta: ErrorFn) -> ErrorFn:
            return lambda x: delta(p.phi(x))

        super().__init__(g, apply_T, apply_Lambda)

    def T_power_at(self, u: Evaluator, x: Point, n: int) -> Any:
        # unrolled: a(x)⁻¹ • a(φx)⁻¹ • … • a(φⁿ⁻¹x)⁻¹ • u(φⁿx), folded left to right
        p, g = self.problem, self.group
        acc = g.identity
        y = x
        for k in range(n):
            acc = g.op(acc, g.inverse(p.coefficient(y, k)))
            y = p.phi(y)
        return g.op(acc, eval_point(u, y))

    def Lambda_power(self, delta: ErrorFn, n: int) -> ErrorFn:
        phi = self.problem.phi
        return lambda x: delta(orbit_point(phi, x, n))

    def lambda_terms(self, eps: ErrorFn, x: Point) -> Iterator[float]:
        return orbit_terms(eps, self.problem.phi, x)


def build_operator(problem: LinearEquationProblem) -> OrbitOperator:
    return OrbitOperator(problem)


def closed_form_iterate(problem: LinearEquationProblem, f: Evaluator, x: Point, n: int,
                        cache: ProductCache | None = None) -> Any:
    """``Aₙ(x)⁻¹ • f(φⁿ(x))``."""
    g = problem.group
    return g.op(g.inverse(A_n(problem, x, n, cache)), eval_point(f, orbit_point(problem.phi, x, n)))


def solve_stability(problem: LinearEquationProblem, f: Evaluator, eps: ErrorFn,
                    probes: Sequence[Point],
                    policy: TruncationPolicy = DEFAULT_POLICY) -> SolveReport:
    """Reconstruct the exact solution near ``f`` via ``gₙ = Aₙ⁻¹ • f(φⁿ(x))``.

    Stops at the first ``n`` whose tail ``Σ_{k≥n} ε(φᵏ(x))`` (plus the series
    uncertainty) is within ``policy.solve_tol``.  Raises ``DefectViolated``
    when ``d(f(φ(x)), a(x)•f(x)) > ε(x)`` at a probe, ``Divergent`` when
    ``ε*`` does not converge, and ``NoConvergence`` past ``max_terms``.
    """
    g = problem.group
    report = SolveReport()
    for x in probes:
        fx = eval_point(f, x)
        check_defect(g, eval_point(f, problem.phi(x)), g.op(problem.coefficient(x), fx),
                     eval_error(eps, x), x)
        star = sum_series(orbit_terms(eps, problem.phi, x), policy, point=x)
        total, target = star.value, policy.solve_tol - star.tail_bound
        s = comp = 0.0
        A = g.identity
        y = x
        n = 0
        # checked helpers are only used to replay a failing or non-float step
        a, phi, validate, op = problem.a, problem.phi, g.validate, g._op
        while True:
            bound = total - (s + comp)
            if bound <= 0.0:
                bound = 0.0
                break
            if bound <= target:
                break
            if n >= policy.max_terms:
                raise NoConvergence(
                    f"certified bound {bound:.3e} above solve_tol {policy.solve_tol:.1e} "
                    f"after {n} iterations at x={x!r}", point=x, iterations=n, bound=bound)
            try:
                e = eps(y)
                A1 = op(validate(a(y)), A)
                z = phi(y)
                fast = (e.__class__ is float and 0.0 <= e < _INF
                        and z.__class__ is float and -_INF < z < _INF)
            except Exception:
                fast = False
            if fast:
                A, y = A1, z
            else:
                e = eval_error(eps, y)
                A = op(problem.coefficient(y, n), A)
                y = _step(phi, y, n)
            t = s + e
            comp += (s - t) + e if s >= e else (e - t) + s
            s = t
            n += 1
        value = g.op(g.inverse(g.validate(A)), eval_point(f, y))
        report.results.append(ProbeResult(
            x=x, value=value, iterations=n, certified_bound=bound, eps_star=star.value,
            eps_star_tail_bound=star.tail_bound, dist_f_g=g.dist(fx, value)))
    return report


def check_cocycle(problem: LinearEquationProblem, x: Point, n: int, m: int) -> float:
    """``d(Aₙ(φᵐ(x)), A_{n+m}(x) • Aₘ(x)⁻¹)``."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    g = problem.group
    cache = ProductCache(problem, x)
    lhs = A_n(problem, orbit_point(problem.phi, x, m), n)
    rhs = g.op(cache[n + m], g.inverse(cache[m]))
    return g.dist(lhs, rhs)
