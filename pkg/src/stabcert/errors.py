"""Exception hierarchy shared by every stabcert module."""

from __future__ import annotations


class StabcertError(Exception):
    """Base class for all library errors."""


class DomainViolation(StabcertError, ValueError):
    """An input lies outside the domain of a group, coefficient or map."""


class EvaluationError(StabcertError):
    """A user-supplied evaluator failed or returned a non-finite value."""


class CapExceeded(StabcertError):
    """An orbit was asked for more iterates than its cap allows."""


class Divergent(StabcertError):
    """A series failed to converge within the truncation policy.

    ``kind`` is ``"NonSummable"`` when trailing terms do not decay (ratio at or
    near one) and ``"SlowConvergence"`` when they decay but the tolerance was
    not met within ``max_terms``.
    """

    def __init__(self, message: str, *, kind: str, terms_used: int,
                 partial_sum: float, last_ratio: float | None = None,
                 point: float | None = None):
        super().__init__(message)
        self.kind = kind
        self.terms_used = terms_used
        self.partial_sum = partial_sum
        self.last_ratio = last_ratio
        self.point = point


class SeriesDiverges(Divergent):
    """Raised by the (C3) checker when the ε* series itself is not finite."""


class NoConvergence(StabcertError):
    """Iteration hit ``max_terms`` before the certified bound met tolerance."""

    def __init__(self, message: str, *, point: float, iterations: int, bound: float):
        super().__init__(message)
        self.point = point
        self.iterations = iterations
        self.bound = bound


class DefectViolated(StabcertError):
    """The defect hypothesis d(Tf, f) <= ε fails at a probe point."""

    def __init__(self, point: float, margin: float):
        super().__init__(f"defect hypothesis violated at x={point!r} (excess {margin:.3e})")
        self.point = point
        self.margin = margin


class CauchyStall(StabcertError):
    """The Cauchy bound ε(φⁿ(x)) did not shrink below tolerance."""


class PreconditionViolated(StabcertError):
    """A claimed solution is not a solution or is not ε-close to f."""


class InvalidParams(StabcertError, ValueError):
    """Builtin problem parameters are out of range."""


class UnknownFixture(StabcertError, KeyError):
    """Requested fixture or demo name does not exist."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown fixture"


class SpecParseError(StabcertError):
    """The CLI problem-spec file could not be parsed or validated."""

    def __init__(self, message: str, *, field: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.field = field
        self.line = line
