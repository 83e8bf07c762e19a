"""Black-box functions on a set X, φ-orbits, and orbit series with tail estimates.

Functions are plain callables probed only at orbit points ``x, φ(x), φ²(x), …``.
The series ``ε*(x) = Σ_{k≥0} ε(φᵏ(x))`` and its tails are summed with a
compensated accumulator and an extrapolated tail; see :func:`sum_series` for
the estimator and its (heuristic) error bound.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterable, Iterator, NamedTuple

from .errors import CapExceeded, Divergent, EvaluationError, StabcertError

Point = float
Evaluator = Callable[[Point], Any]
ErrorFn = Callable[[Point], float]
SelfMap = Callable[[Point], Point]

DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class TruncationPolicy:
    """Numerical knobs for series truncation and iteration.

    ``abs_tol`` is the target for the series uncertainty (and for the Cauchy
    stopping rule in the certifier); ``solve_tol`` is the target for the
    certified distance ``Σ_{k≥m} (Λᵏε)(x)`` at which fixed-point iteration
    stops.
    """

    abs_tol: float = 1e-10
    max_terms: int = 10**6
    ratio_window: int = 8
    ratio_bound: float = 0.999
    solve_tol: float = 1e-6

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and math.isfinite(self.abs_tol)):
            raise ValueError(f"abs_tol must be > 0, got {self.abs_tol!r}")
        if not (self.solve_tol > 0 and math.isfinite(self.solve_tol)):
            raise ValueError(f"solve_tol must be > 0, got {self.solve_tol!r}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise ValueError(f"max_terms must be a positive integer, got {self.max_terms!r}")
        if int(self.ratio_window) != self.ratio_window or self.ratio_window < 1:
            raise ValueError(f"ratio_window must be a positive integer, got {self.ratio_window!r}")
        if not 0.0 < self.ratio_bound < 1.0:
            raise ValueError(f"ratio_bound must lie in (0, 1), got {self.ratio_bound!r}")

    def replace(self, **changes: Any) -> "TruncationPolicy":
        from dataclasses import replace
        return replace(self, **changes)


DEFAULT_POLICY = TruncationPolicy()


def eval_point(u: Evaluator, x: Point) -> Any:
    try:
        v = u(x)
    except StabcertError:
        raise
    except Exception as exc:
        raise EvaluationError(f"evaluator failed at x={x!r}: {exc}") from exc
    if isinstance(v, float) and not math.isfinite(v):
        raise EvaluationError(f"evaluator returned {v!r} at x={x!r}")
    return v


def eval_error(eps: ErrorFn, x: Point) -> float:
    """Evaluate an error function, insisting on a finite nonnegative value."""
    try:
        v = eps(x)
    except StabcertError:
        raise
    except Exception as exc:
        raise EvaluationError(f"error function failed at x={x!r}: {exc}") from exc
    if v.__class__ is float and 0.0 <= v < math.inf:
        return v
    try:
        v = float(v)
    except (TypeError, ValueError) as exc:
        raise EvaluationError(f"error function returned non-real {v!r} at x={x!r}") from exc
    if not math.isfinite(v) or v < 0.0:
        raise EvaluationError(f"error function returned {v!r} at x={x!r}; need finite >= 0")
    return v


def _step_raw(phi: SelfMap, y: Point, k: int) -> Point:
    try:
        return phi(y)
    except Exception as exc:
        raise EvaluationError(f"phi failed at orbit index {k} (x={y!r}): {exc}") from exc


def _step(phi: SelfMap, y: Point, k: int) -> Point:
    try:
        z = phi(y)
    except Exception as exc:
        raise EvaluationError(f"phi failed at orbit index {k} (x={y!r}): {exc}") from exc
    if isinstance(z, float) and not math.isfinite(z):
        raise EvaluationError(f"phi left the reals at orbit index {k + 1} (from x={y!r})")
    return z


class Orbit:
    """Memoized forward orbit ``φ⁰(x), φ¹(x), …`` of a single base point."""

    def __init__(self, phi: SelfMap, base: Point, cap: int = DEFAULT_CAP):
        self.phi = phi
        self.base = base
        self.cap = cap
        self._memo: list[Point] = [base]

    def __len__(self) -> int:
        return len(self._memo)

    def __getitem__(self, n: int) -> Point:
        if n < 0:
            raise IndexError("orbit index must be nonnegative")
        if n > self.cap:
            raise CapExceeded(f"orbit index {n} exceeds cap {self.cap}")
        memo = self._memo
        while len(memo) <= n:
            memo.append(_step(self.phi, memo[-1], len(memo) - 1))
        return memo[n]

    def __iter__(self) -> Iterator[Point]:
        k = 0
        while True:
            yield self[k]
            k += 1


def orbit_point(phi: SelfMap, x: Point, n: int, cap: int = DEFAULT_CAP) -> Point:
    """φⁿ(x), computed without memoization."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > cap:
        raise CapExceeded(f"orbit index {n} exceeds cap {cap}")
    y = x
    for k in range(n):
        y = _step(phi, y, k)
    return y


def iter_orbit(phi: SelfMap, x: Point) -> Iterator[Point]:
    y = x
    k = 0
    while True:
        yield y
        y = _step(phi, y, k)
        k += 1


def orbit_terms(eps: ErrorFn, phi: SelfMap, x: Point, start: int = 0) -> Iterator[float]:
    """``ε(φᵏ(x))`` for ``k = start, start+1, …``."""
    y = orbit_point(phi, x, start)
    for y in iter_orbit(phi, y):
        yield eval_error(eps, y)


class CompensatedSum:
    """Neumaier running sum."""

    __slots__ = ("total", "_comp")

    def __init__(self) -> None:
        self.total = 0.0
        self._comp = 0.0

    def add(self, v: float) -> None:
        t = self.total + v
        if abs(self.total) >= abs(v):
            self._comp += (self.total - t) + v
        else:
            self._comp += (v - t) + self.total
        self.total = t

    @property
    def value(self) -> float:
        return self.total + self._comp


class SeriesSum(NamedTuple):
    value: float
    tail_bound: float
    terms_used: int
    partial_sum: float


class TailSum(NamedTuple):
    value: float
    tail_bound: float


_EPS = 2.0**-52


def sum_series(terms: Iterable[float], policy: TruncationPolicy = DEFAULT_POLICY,
               point: Point | None = None) -> SeriesSum:
    """Sum a nonnegative series with an extrapolated, heuristic tail.

    After ``m`` terms with last term ``b``, trailing ratio ``r`` and
    ``u = 1/(1-r)``, the slope ``σ`` of ``u`` over ``ratio_window`` terms
    identifies the decay: ``σ ≈ 0`` is geometric, ``σ ≈ 1/p`` is a power law
    ``k^{-p}``.  The remaining tail is estimated as
    ``b·(u/(1-σ) - 1) + b·σ²/(6u(1-σ))``, which is exact for geometric terms
    and correct to second order for power laws.  The model is used only when
    every ratio in the window is below one and ``σ < ratio_bound``.

    The returned ``tail_bound`` is the spread between the extrapolated totals
    at ``m``, ``3m/4`` and ``m/2`` plus the size of the second-order
    correction; summation stops once it is ``<= abs_tol``.  The value returned
    is the extrapolated total, and ``partial_sum`` the raw ``S_m``.

    Raises :class:`Divergent` after ``max_terms`` terms.
    """
    w = policy.ratio_window
    buf: deque[float] = deque(maxlen=w + 2)
    history: list[float] = []
    acc = CompensatedSum()
    zeros = 0
    last_sigma = math.nan
    m = 0
    for a in terms:
        m += 1
        acc.add(a)
        buf.append(a)
        zeros = zeros + 1 if a == 0.0 else 0
        if zeros >= min(w, m):
            return SeriesSum(acc.value, 0.0, m, acc.value)
        if not math.isfinite(acc.total):
            break
        estimate = math.nan
        corr = 0.0
        if len(buf) == w + 2 and buf[-2] > 0.0 and buf[0] > 0.0:
            ratios_ok = all(buf[i + 1] < buf[i] for i in range(w + 1))
            if ratios_ok:
                r_new = buf[-1] / buf[-2]
                r_old = buf[1] / buf[0]
                u_new = 1.0 / (1.0 - r_new)
                u_old = 1.0 / (1.0 - r_old)
                sigma = max((u_new - u_old) / w, 0.0)
                last_sigma = sigma
                if sigma < policy.ratio_bound:
                    corr = a * sigma * sigma / (6.0 * u_new * (1.0 - sigma))
                    estimate = acc.value + a * (u_new / (1.0 - sigma) - 1.0) + corr
        history.append(estimate)
        if not math.isnan(estimate):
            e_half = history[m // 2 - 1]
            e_3q = history[(3 * m) // 4 - 1]
            if not (math.isnan(e_half) or math.isnan(e_3q)):
                spread = max(abs(estimate - e_half), abs(estimate - e_3q))
                bound = spread + corr + 4.0 * _EPS * abs(estimate)
                if bound <= policy.abs_tol:
                    return SeriesSum(estimate, bound, m, acc.value)
        if m >= policy.max_terms:
            break
    else:
        # finite iterator exhausted: the sum is exact up to rounding
        return SeriesSum(acc.value, 4.0 * _EPS * m * abs(acc.value), m, acc.value)

    last_ratio = buf[-1] / buf[-2] if len(buf) >= 2 and buf[-2] > 0 else math.inf
    non_summable = (not math.isfinite(acc.total) or last_ratio >= policy.ratio_bound
                    or (not math.isnan(last_sigma) and last_sigma >= policy.ratio_bound))
    kind = "NonSummable" if non_summable else "SlowConvergence"
    where = "" if point is None else f" at x={point!r}"
    raise Divergent(
        f"series{where} did not converge within {m} terms ({kind}, trailing ratio {last_ratio:.6g})",
        kind=kind, terms_used=m, partial_sum=acc.value, last_ratio=last_ratio, point=point)


def eps_star(eps: ErrorFn, phi: SelfMap, x: Point,
             policy: TruncationPolicy = DEFAULT_POLICY) -> SeriesSum:
    """``ε*(x) = Σ_{k≥0} ε(φᵏ(x))``."""
    return sum_series(orbit_terms(eps, phi, x), policy, point=x)


def tail_sum(eps: ErrorFn, phi: SelfMap, x: Point, m: int,
             policy: TruncationPolicy = DEFAULT_POLICY) -> TailSum:
    """``Σ_{k≥m} ε(φᵏ(x))``, the certified distance after ``m`` iterations."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    s = sum_series(orbit_terms(eps, phi, x, start=m), policy, point=x)
    return TailSum(s.value, s.tail_bound)


class OrbitVerdict(str, Enum):
    VANISHES = "Vanishes"
    VIOLATED = "Violated"
    INCONCLUSIVE = "Inconclusive"


def vanishes_along_orbit(delta: ErrorFn, phi: SelfMap, x: Point, horizon: int = 10**4,
                         tol: float = 1e-6) -> OrbitVerdict:
    """Numerical test of ``lim δ(φⁿ(x)) = 0``.

    Vanishes when every value in the last quarter of ``n = 0..horizon`` is
    below ``tol``; Violated when some value exceeds ten times the initial one;
    otherwise Inconclusive.  An orbit that overflows the floats (``φ(x) = 2x``
    does so near ``n = 1024``) is judged on the part computed before overflow.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    values: list[float] = []
    y = x
    for n in range(horizon + 1):
        values.append(eval_error(delta, y))
        if n == horizon:
            break
        z = _step_or_none(phi, y, n)
        if z is None:
            break
        y = z
    initial = values[0]
    grew = initial > 0.0 and max(values) > 10.0 * initial
    end = len(values) - 1
    window = values[end - end // 4:] if end else values
    if max(window) < tol:
        return OrbitVerdict.VANISHES
    if grew:
        return OrbitVerdict.VIOLATED
    return OrbitVerdict.INCONCLUSIVE


def _step_or_none(phi: SelfMap, y: Point, k: int) -> Point | None:
    z = _step_raw(phi, y, k)
    if isinstance(z, float) and not math.isfinite(z):
        return None
    return z
