import math

import pytest
from hypothesis import settings

from stabcert.groups import MetricGroup

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")


class AffineMaps(MetricGroup):
    """Noncommutative test group: pairs (a, b) acting as t -> a*t + b, a > 0.

    The metric is left-invariant by construction (it only sees x⁻¹•y).
    """

    name = "affine-test"

    def validate(self, x):
        a, b = x
        if not (a > 0 and math.isfinite(a) and math.isfinite(b)):
            raise ValueError(f"bad affine element {x!r}")
        return (float(a), float(b))

    @property
    def identity(self):
        return (1.0, 0.0)

    def _op(self, x, y):
        return (x[0] * y[0], x[0] * y[1] + x[1])

    def _inverse(self, x):
        return (1.0 / x[0], -x[1] / x[0])

    def _dist(self, x, y):
        def size(h):
            return max(abs(math.log(h[0])), abs(h[1]))
        return max(size(self._op(self._inverse(x), y)), size(self._op(self._inverse(y), x)))

    def scale(self, x):
        return max(abs(math.log(x[0])), abs(x[1]))


@pytest.fixture
def affine_group():
    return AffineMaps()
