"""Builtin equations, reference solutions and perturbation fixtures.

* Digamma:     ``g(x+1) = g(x) + 1/x`` on (0, ∞), solved by ψ.
* ShiftP:      ``g(x+p) = g(x) + 1/x``, solved by ``ψ(x/p)/p``.
* Homogeneity: ``g(2x) = c·g(x)`` in the multiplicative group, solved by
  ``x^{log₂ c}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable

from .errors import DomainViolation, InvalidParams, UnknownFixture
from .groups import ADDITIVE, MULTIPLICATIVE
from .linear import LinearEquationProblem
from .series import ErrorFn, Evaluator, Point

_ASYMPTOTIC_START = 16.0


class ProblemKind(str, Enum):
    DIGAMMA = "digamma"
    SHIFT_P = "shift"
    HOMOGENEITY = "homogeneity"


@dataclass(frozen=True)
class BuiltinProblem:
    kind: ProblemKind
    p: float = 1.0
    c: float = 2.0


def _reciprocal(x: Point) -> float:
    if x == 0:
        raise DomainViolation("a(x) = 1/x is undefined at x = 0")
    return 1.0 / x


def make_problem(b: BuiltinProblem) -> LinearEquationProblem:
    kind = ProblemKind(b.kind)
    if kind is ProblemKind.DIGAMMA:
        return LinearEquationProblem(lambda x: x + 1.0, _reciprocal, ADDITIVE, name="digamma")
    if kind is ProblemKind.SHIFT_P:
        p = b.p
        if not (isinstance(p, (int, float)) and math.isfinite(p) and p > 0):
            raise InvalidParams(f"shift p must be a positive real, got {p!r}")
        p = float(p)
        return LinearEquationProblem(lambda x: x + p, _reciprocal, ADDITIVE, name=f"shift(p={p:g})")
    c = b.c
    if not (isinstance(c, (int, float)) and math.isfinite(c) and c > 0):
        raise InvalidParams(f"homogeneity ratio c must be a positive real, got {c!r}")
    c = float(c)
    return LinearEquationProblem(lambda x: 2.0 * x, lambda x: c, MULTIPLICATIVE,
                                 name=f"homogeneity(c={c:g})")


def reference_digamma(x: float) -> float:
    """ψ(x) for x > 0, independent of the solver.

    Shifts the argument past 16 with ψ(x) = ψ(x+1) - 1/x, then applies the
    asymptotic series in 1/t².
    """
    if not (math.isfinite(x) and x > 0):
        raise DomainViolation(f"digamma reference needs x > 0, got {x!r}")
    k = 0 if x > _ASYMPTOTIC_START else int(math.floor(_ASYMPTOTIC_START - x)) + 1
    shift = math.fsum(1.0 / (x + j) for j in range(k))
    t = x + k
    r = 1.0 / (t * t)
    series = r * (1.0 / 12 - r * (1.0 / 120 - r * (1.0 / 252 - r * (1.0 / 240))))
    return math.log(t) - 0.5 / t - series - shift


def reference_shift_p_solution(x: float, p: float) -> float:
    """``ψ(x/p)/p``, a solution of ``g(x+p) = g(x) + 1/x``."""
    if not (math.isfinite(p) and p > 0):
        raise DomainViolation(f"p must be positive, got {p!r}")
    return reference_digamma(x / p) / p


def reference_homogeneity_solution(x: float, c: float) -> float:
    if not (math.isfinite(x) and x > 0):
        raise DomainViolation(f"homogeneity solution needs x > 0, got {x!r}")
    return x ** math.log2(c)


def _inv_square(scale: float) -> Callable[[Point], float]:
    return lambda x: scale / (x * x)


def _grid(start: float, stop: float, step: float) -> list[float]:
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(n)]


@dataclass(frozen=True)
class PerturbationFixture:
    """An exact solution, a group-valued perturbation and a claimed ε.

    The approximate solution is ``f(x) = η(x) • base(x)``.
    """

    name: str
    problem: LinearEquationProblem
    base: Evaluator
    eta: Callable[[Point], Any]
    eps: ErrorFn
    probes: tuple[float, ...] = field(default=())

    def f(self, x: Point) -> Any:
        g = self.problem.group
        return g.op(self.eta(x), self.base(x))

    def with_perturbation(self, eta: Callable[[Point], Any], name: str | None = None
                          ) -> "PerturbationFixture":
        return replace(self, eta=eta, name=name or f"{self.name}+custom")


DIGAMMA_PROBES = tuple(_grid(0.5, 10.0, 0.5))
SHIFT2_PROBES = tuple(float(k) for k in range(1, 9))


def _digamma_mild() -> PerturbationFixture:
    return PerturbationFixture("digamma-mild", make_problem(BuiltinProblem(ProblemKind.DIGAMMA)),
                               reference_digamma, _inv_square(0.05), _inv_square(0.1),
                               DIGAMMA_PROBES)


def _digamma_violating() -> PerturbationFixture:
    return PerturbationFixture("digamma-violating",
                               make_problem(BuiltinProblem(ProblemKind.DIGAMMA)),
                               reference_digamma, lambda x: 0.2 * math.sin(x), _inv_square(0.1),
                               DIGAMMA_PROBES)


def _shift2_mild() -> PerturbationFixture:
    return PerturbationFixture("shift2-mild",
                               make_problem(BuiltinProblem(ProblemKind.SHIFT_P, p=2.0)),
                               lambda x: reference_shift_p_solution(x, 2.0), _inv_square(0.05),
                               _inv_square(0.1), SHIFT2_PROBES)


def _homog_mild(c: float = 2.0) -> PerturbationFixture:
    return PerturbationFixture("homog-mild",
                               make_problem(BuiltinProblem(ProblemKind.HOMOGENEITY, c=c)),
                               lambda x: reference_homogeneity_solution(x, c),
                               lambda x: 1.0 + 0.05 / (x * x),
                               lambda x: math.log1p(0.1 / (x * x)),
                               DIGAMMA_PROBES)


FIXTURES: dict[str, Callable[[], PerturbationFixture]] = {
    "digamma-mild": _digamma_mild,
    "digamma-violating": _digamma_violating,
    "shift2-mild": _shift2_mild,
    "homog-mild": _homog_mild,
}


def make_fixture(name: str) -> PerturbationFixture:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise UnknownFixture(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}") from None
