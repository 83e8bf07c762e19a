import math

import pytest
from hypothesis import given, strategies as st
from scipy.special import digamma

from stabcert.applications import (DIGAMMA_PROBES, FIXTURES, SHIFT2_PROBES, BuiltinProblem,
                                   ProblemKind, make_fixture, make_problem, reference_digamma,
                                   reference_homogeneity_solution, reference_shift_p_solution)
from stabcert.errors import DomainViolation, InvalidParams, UnknownFixture
from stabcert.groups import ADDITIVE, MULTIPLICATIVE
from stabcert.linear import residual


class TestReferenceDigamma:
    @given(st.floats(min_value=1e-3, max_value=1e6))
    def test_matches_scipy(self, x):
        assert reference_digamma(x) == pytest.approx(float(digamma(x)), abs=1e-12, rel=1e-13)

    def test_known_values(self):
        euler_gamma = 0.5772156649015329
        assert reference_digamma(1.0) == pytest.approx(-euler_gamma, abs=1e-14)
        assert reference_digamma(0.5) == pytest.approx(-euler_gamma - 2 * math.log(2), abs=1e-14)

    @given(st.floats(min_value=0.01, max_value=100.0))
    def test_recurrence(self, x):
        assert abs(reference_digamma(x + 1) - reference_digamma(x) - 1 / x) <= 1e-12 * (1 + 1 / x)

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
    def test_domain(self, bad):
        with pytest.raises(DomainViolation):
            reference_digamma(bad)


class TestReferenceSolutions:
    def test_shift_p(self):
        p = make_problem(BuiltinProblem(ProblemKind.SHIFT_P, p=2.0))
        for x in (1.0, 2.0, 5.5):
            assert residual(p, lambda t: reference_shift_p_solution(t, 2.0), x) <= 1e-13
        assert reference_shift_p_solution(1.0, 2.0) == pytest.approx(-0.9817550130, abs=1e-10)

    @given(st.floats(0.1, 5.0), st.floats(0.1, 100.0))
    def test_shift_p_property(self, p, x):
        prob = make_problem(BuiltinProblem(ProblemKind.SHIFT_P, p=p))
        assert residual(prob, lambda t: reference_shift_p_solution(t, p), x) <= 1e-10 * (1 + 1 / x)

    @given(st.floats(0.1, 10.0), st.floats(0.01, 100.0))
    def test_homogeneity(self, c, x):
        prob = make_problem(BuiltinProblem(ProblemKind.HOMOGENEITY, c=c))
        assert residual(prob, lambda t: reference_homogeneity_solution(t, c), x) <= 1e-12

    def test_domains(self):
        with pytest.raises(DomainViolation):
            reference_homogeneity_solution(-1.0, 2.0)
        with pytest.raises(DomainViolation):
            reference_shift_p_solution(1.0, 0.0)


class TestBuiltins:
    def test_groups(self):
        assert make_problem(BuiltinProblem(ProblemKind.DIGAMMA)).group is ADDITIVE
        assert make_problem(BuiltinProblem(ProblemKind.HOMOGENEITY)).group is MULTIPLICATIVE

    def test_maps(self):
        p = make_problem(BuiltinProblem(ProblemKind.SHIFT_P, p=3.0))
        assert p.phi(1.0) == 4.0 and p.a(4.0) == 0.25
        h = make_problem(BuiltinProblem(ProblemKind.HOMOGENEITY, c=5.0))
        assert h.phi(1.5) == 3.0 and h.a(7.0) == 5.0

    def test_kind_by_string(self):
        assert make_problem(BuiltinProblem("digamma")).name == "digamma"

    @pytest.mark.parametrize("b", [BuiltinProblem(ProblemKind.SHIFT_P, p=0.0),
                                   BuiltinProblem(ProblemKind.SHIFT_P, p=-1.0),
                                   BuiltinProblem(ProblemKind.SHIFT_P, p=math.inf),
                                   BuiltinProblem(ProblemKind.HOMOGENEITY, c=0.0),
                                   BuiltinProblem(ProblemKind.HOMOGENEITY, c=math.nan)])
    def test_invalid(self, b):
        with pytest.raises(InvalidParams):
            make_problem(b)

    def test_digamma_pole(self):
        p = make_problem(BuiltinProblem(ProblemKind.DIGAMMA))
        with pytest.raises(DomainViolation):
            p.coefficient(0.0)


class TestFixtures:
    def test_names(self):
        assert set(FIXTURES) == {"digamma-mild", "digamma-violating", "shift2-mild", "homog-mild"}

    def test_probe_grids(self):
        assert DIGAMMA_PROBES[0] == 0.5 and DIGAMMA_PROBES[-1] == 10.0 and len(DIGAMMA_PROBES) == 20
        assert SHIFT2_PROBES == tuple(float(k) for k in range(1, 9))

    def test_unknown(self):
        with pytest.raises(UnknownFixture, match="available"):
            make_fixture("nope")

    @pytest.mark.parametrize("name", ["digamma-mild", "shift2-mild", "homog-mild"])
    def test_mild_defect_within_eps(self, name):
        fx = make_fixture(name)
        for x in fx.probes:
            assert residual(fx.problem, fx.f, x) <= fx.eps(x)

    def test_violating_defect_exceeds_eps(self):
        fx = make_fixture("digamma-violating")
        assert any(residual(fx.problem, fx.f, x) > fx.eps(x) for x in fx.probes)

    def test_perturbation(self):
        fx = make_fixture("digamma-mild").with_perturbation(lambda x: -0.03 / x**2)
        assert fx.f(1.0) == pytest.approx(reference_digamma(1.0) - 0.03)
        assert fx.name.endswith("+custom")
        homog = make_fixture("homog-mild")
        assert homog.f(2.0) == pytest.approx(2.0 * (1 + 0.05 / 4))
