"""Fixed-point iteration for Λ-contractive operators with certified bounds.

An operator ``T`` on functions ``X → G`` is Λ-contractive when
``d(u(x), v(x)) <= δ(x)`` everywhere implies ``d(Tu(x), Tv(x)) <= (Λδ)(x)``.
Given ``f`` with ``d(Tf(x), f(x)) <= ε(x)`` and ``ε*(x) = Σ_k (Λᵏε)(x) < ∞``,
the iterates ``Tᵐf`` converge pointwise to a fixed point ``g`` with

    d(Tᵐf(x), g(x)) <= Σ_{k≥m} (Λᵏε)(x).

:func:`solve` iterates until that tail meets ``policy.solve_tol``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterator, Sequence

from .errors import DefectViolated, Divergent, NoConvergence, SeriesDiverges
from .groups import MetricGroup
from .series import (DEFAULT_POLICY, ErrorFn, Evaluator, Point,
                     TruncationPolicy, eval_error, eval_point, sum_series)

HYPOTHESIS_RTOL = 1e-9
HYPOTHESIS_ATOL = 1e-12


def within(achieved: float, bound: float, rtol: float = HYPOTHESIS_RTOL,
           atol: float = HYPOTHESIS_ATOL) -> bool:
    return achieved <= bound * (1.0 + rtol) + atol


class ContractiveOperator:
    """A pair ``(T, Λ)`` acting on evaluators and error functions.

    The default powers compose ``apply_T``/``apply_Lambda`` as closures, so
    evaluating ``Tⁿu`` recurses ``n`` levels deep.  Subclasses with more
    structure (see :class:`stabcert.linear.OrbitOperator`) override
    :meth:`T_power_at` and :meth:`lambda_terms` with iterative versions.
    """

    def __init__(self, group: MetricGroup,
                 apply_T: Callable[[Evaluator], Evaluator],
                 apply_Lambda: Callable[[ErrorFn], ErrorFn]):
        self.group = group
        self._T = apply_T
        self._Lambda = apply_Lambda

    def apply_T(self, u: Evaluator) -> Evaluator:
        return self._T(u)

    def apply_Lambda(self, delta: ErrorFn) -> ErrorFn:
        return self._Lambda(delta)

    def T_power(self, u: Evaluator, n: int) -> Evaluator:
        for _ in range(n):
            u = self.apply_T(u)
        return u

    def Lambda_power(self, delta: ErrorFn, n: int) -> ErrorFn:
        for _ in range(n):
            delta = self.apply_Lambda(delta)
        return delta

    def T_power_at(self, u: Evaluator, x: Point, n: int) -> Any:
        return eval_point(self.T_power(u, n), x)

    def lambda_terms(self, eps: ErrorFn, x: Point) -> Iterator[float]:
        """``(Λᵏε)(x)`` for ``k = 0, 1, …``."""
        delta = eps
        while True:
            yield eval_error(delta, x)
            delta = self.apply_Lambda(delta)


def apply_T_n(op: ContractiveOperator, f: Evaluator, x: Point, n: int) -> Any:
    """``(Tⁿf)(x)``; ``n = 0`` gives ``f(x)``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return op.T_power_at(f, x, n)


@dataclass
class ProbeResult:
    x: Point
    value: Any
    iterations: int
    certified_bound: float
    eps_star: float
    eps_star_tail_bound: float
    dist_f_g: float
    converged: bool = True


@dataclass
class SolveReport:
    results: list[ProbeResult] = field(default_factory=list)

    def __iter__(self) -> Iterator[ProbeResult]:
        return iter(self.results)

    def __len__(self) -> int:
        return len(self.results)

    def __getitem__(self, i: int) -> ProbeResult:
        return self.results[i]

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.results)

    def values(self) -> list[Any]:
        return [r.value for r in self.results]


def check_defect(group: MetricGroup, lhs: Any, rhs: Any, bound: float, x: Point) -> float:
    achieved = group.dist(lhs, rhs)
    if not within(achieved, bound):
        raise DefectViolated(x, achieved - bound)
    return achieved


def solve(op: ContractiveOperator, f: Evaluator, eps: ErrorFn, probes: Sequence[Point],
          policy: TruncationPolicy = DEFAULT_POLICY) -> SolveReport:
    """Iterate ``Tᵐf`` at each probe until ``Σ_{k≥m}(Λᵏε)(x) <= solve_tol``."""
    report = SolveReport()
    g = op.group
    for x in probes:
        fx = eval_point(f, x)
        check_defect(g, op.T_power_at(f, x, 1), fx, eval_error(eps, x), x)
        star = sum_series(op.lambda_terms(eps, x), policy, point=x)
        total, target = star.value, policy.solve_tol - star.tail_bound
        s = comp = 0.0
        m = 0
        for a in op.lambda_terms(eps, x):
            bound = total - (s + comp)
            if bound <= 0.0:
                bound = 0.0
                break
            if bound <= target:
                break
            if m >= policy.max_terms:
                raise NoConvergence(
                    f"certified bound {bound:.3e} above solve_tol {policy.solve_tol:.1e} "
                    f"after {m} iterations at x={x!r}",
                    point=x, iterations=m, bound=bound)
            t = s + a
            comp += (s - t) + a if s >= a else (a - t) + s
            s = t
            m += 1
        value = op.T_power_at(f, x, m)
        report.results.append(ProbeResult(
            x=x, value=value, iterations=m, certified_bound=bound,
            eps_star=star.value, eps_star_tail_bound=star.tail_bound,
            dist_f_g=g.dist(fx, value)))
    return report


@dataclass(frozen=True)
class ContractivityViolation:
    sample: int
    x: Point
    margin: float


@dataclass
class ContractivityCheck:
    violations: list[ContractivityViolation]
    vacuous: list[int]

    def __bool__(self) -> bool:
        return not self.violations

    def __iter__(self):
        return iter(self.violations)

    def __len__(self) -> int:
        return len(self.violations)


def check_lambda_contractive(op: ContractiveOperator,
                             samples: Sequence[tuple[Evaluator, Evaluator, ErrorFn]],
                             probes: Sequence[Point]) -> ContractivityCheck:
    """Sampled test of Λ-contractivity.

    Samples whose premise ``d(u, v) <= δ`` fails at some probe are vacuous and
    skipped.  A violation records how far ``d(Tu, Tv)`` exceeds ``Λδ``.
    """
    g = op.group
    violations: list[ContractivityViolation] = []
    vacuous: list[int] = []
    for i, (u, v, delta) in enumerate(samples):
        if not all(within(g.dist(eval_point(u, x), eval_point(v, x)), eval_error(delta, x))
                   for x in probes):
            vacuous.append(i)
            continue
        Tu, Tv, Ld = op.apply_T(u), op.apply_T(v), op.apply_Lambda(delta)
        for x in probes:
            achieved = g.dist(eval_point(Tu, x), eval_point(Tv, x))
            bound = eval_error(Ld, x)
            if not within(achieved, bound):
                violations.append(ContractivityViolation(i, x, achieved - bound))
    return ContractivityCheck(violations, vacuous)


class C3Verdict(str, Enum):
    HOLDS = "Holds"
    VIOLATED = "Violated"
    INCONCLUSIVE = "Inconclusive"


def check_C3(op: ContractiveOperator, eps: ErrorFn, probes: Sequence[Point],
             n_max: int = 1000, tol: float = 1e-2,
             policy: TruncationPolicy = DEFAULT_POLICY,
             eps_star_fn: ErrorFn | None = None) -> C3Verdict:
    """Sampled test of ``lim Λⁿε* = 0`` pointwise.

    ``ε*`` is summed from ``Λᵏε`` unless ``eps_star_fn`` supplies it directly.
    Holds when ``(Λⁿε*)(x)`` drops below ``tol`` for some ``n <= n_max`` at every
    probe; Violated when it exceeds ten times ``ε*(x)``.
    """
    if eps_star_fn is None:
        def eps_star_fn(y: Point) -> float:
            try:
                return sum_series(op.lambda_terms(eps, y), policy, point=y).value
            except Divergent as exc:
                raise SeriesDiverges(str(exc), kind=exc.kind, terms_used=exc.terms_used,
                                     partial_sum=exc.partial_sum, last_ratio=exc.last_ratio,
                                     point=y) from exc
    verdict = C3Verdict.HOLDS
    for x in probes:
        initial = eval_error(eps_star_fn, x)
        if initial < tol:
            continue
        outcome = C3Verdict.INCONCLUSIVE
        for n in range(1, n_max + 1):
            v = eval_error(op.Lambda_power(eps_star_fn, n), x)
            if v < tol:
                outcome = C3Verdict.HOLDS
                break
            if v > 10.0 * initial:
                outcome = C3Verdict.VIOLATED
                break
        if outcome is C3Verdict.VIOLATED:
            return outcome
        if outcome is C3Verdict.INCONCLUSIVE:
            verdict = outcome
    return verdict
