"""Complete metric groups with a left-invariant metric.

Two instances ship: the additive reals with ``|x - y|`` and the positive reals
under multiplication with ``|ln x - ln y|``.  Completeness of both is assumed
(it holds mathematically and cannot be checked by sampling).

Nothing outside this module assumes group elements are scalars; a new instance
only has to implement :meth:`MetricGroup.op`, :meth:`identity`,
:meth:`inverse`, :meth:`dist` and :meth:`validate`.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from typing import Any

from .errors import DomainViolation

DEFAULT_ATOL = 1e-12
DEFAULT_RTOL = 1e-12


class MetricGroup(ABC):
    name: str = "abstract"

    @abstractmethod
    def validate(self, x: Any) -> Any:
        """Return ``x`` unchanged or raise :class:`DomainViolation`."""

    @property
    @abstractmethod
    def identity(self) -> Any: ...

    @abstractmethod
    def _op(self, x: Any, y: Any) -> Any: ...

    @abstractmethod
    def _inverse(self, x: Any) -> Any: ...

    @abstractmethod
    def _dist(self, x: Any, y: Any) -> float: ...

    @abstractmethod
    def scale(self, x: Any) -> float:
        """Magnitude used for relative tolerances in :meth:`isclose`."""

    def op(self, x: Any, y: Any) -> Any:
        return self._op(self.validate(x), self.validate(y))

    def inverse(self, x: Any) -> Any:
        return self._inverse(self.validate(x))

    def dist(self, x: Any, y: Any) -> float:
        return self._dist(self.validate(x), self.validate(y))

    def isclose(self, x: Any, y: Any, atol: float = DEFAULT_ATOL,
                rtol: float = DEFAULT_RTOL) -> bool:
        """``dist(x, y) <= atol + rtol * max(scale(x), scale(y))``."""
        slack = atol + rtol * max(self.scale(x), self.scale(y))
        return self.dist(x, y) <= slack

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"

    def __eq__(self, other: object) -> bool:
        return type(self) is type(other)

    def __hash__(self) -> int:
        return hash(type(self))


_INF = math.inf


def _check_finite(x: Any, group: str) -> float:
    if x.__class__ is float and -_INF < x < _INF:
        return x
    if isinstance(x, (str, bytes)):
        raise DomainViolation(f"{group}: element {x!r} is not a real number")
    try:
        v = float(x)
    except (TypeError, ValueError) as exc:
        raise DomainViolation(f"{group}: element {x!r} is not a real number") from exc
    if not math.isfinite(v):
        raise DomainViolation(f"{group}: element {x!r} is not finite")
    return v


class AdditiveReals(MetricGroup):
    """(ℝ, +) with the Euclidean metric."""

    name = "additive"

    def validate(self, x: Any) -> float:
        return _check_finite(x, self.name)

    @property
    def identity(self) -> float:
        return 0.0

    def _op(self, x: float, y: float) -> float:
        return x + y

    def _inverse(self, x: float) -> float:
        return -x

    def _dist(self, x: float, y: float) -> float:
        return abs(x - y)

    def scale(self, x: Any) -> float:
        return abs(float(x))


class MultiplicativePositiveReals(MetricGroup):
    """((0, ∞), ·) with the log-ratio metric ``|ln x - ln y|``."""

    name = "multiplicative"

    def validate(self, x: Any) -> float:
        if x.__class__ is float and 0.0 < x < _INF:
            return x
        v = _check_finite(x, self.name)
        if v <= 0.0:
            raise DomainViolation(f"{self.name}: element {x!r} is not strictly positive")
        return v

    @property
    def identity(self) -> float:
        return 1.0

    def _op(self, x: float, y: float) -> float:
        return x * y

    def _inverse(self, x: float) -> float:
        return 1.0 / x

    def _dist(self, x: float, y: float) -> float:
        return abs(math.log(x) - math.log(y))

    def scale(self, x: Any) -> float:
        return abs(math.log(float(x)))


ADDITIVE = AdditiveReals()
MULTIPLICATIVE = MultiplicativePositiveReals()

GROUPS: dict[str, MetricGroup] = {g.name: g for g in (ADDITIVE, MULTIPLICATIVE)}


def get_group(name: str) -> MetricGroup:
    try:
        return GROUPS[name]
    except KeyError:
        raise KeyError(f"unknown group {name!r}; choose from {sorted(GROUPS)}") from None


# Module-level aliases matching the functional interface.

def op(g: MetricGroup, x: Any, y: Any) -> Any:
    return g.op(x, y)


def inverse(g: MetricGroup, x: Any) -> Any:
    return g.inverse(x)


def dist(g: MetricGroup, x: Any, y: Any) -> float:
    return g.dist(x, y)
