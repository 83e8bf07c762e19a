"""Cross-module invariants of solver and certifier outputs."""

import pytest

from stabcert.applications import make_fixture
from stabcert.certifier import CertVerdict, check_condition_ii, certify_approximation
from stabcert.linear import A_n, build_operator, residual, solve_stability
from stabcert.series import DEFAULT_POLICY, orbit_point

ABS_TOL = DEFAULT_POLICY.abs_tol


@pytest.fixture(scope="module")
def mild():
    return make_fixture("digamma-mild")


@pytest.fixture(scope="module")
def solved(mild):
    cache = {}

    def g(x):
        if x not in cache:
            cache[x] = solve_stability(mild.problem, mild.f, mild.eps, [x])[0].value
        return cache[x]
    return g


def test_fixed_point_residual(mild, solved):
    op = build_operator(mild.problem)
    for x in (0.5, 1.0, 4.5):
        assert abs(op.apply_T(solved)(x) - solved(x)) <= 2 * ABS_TOL
        assert residual(mild.problem, solved, x) <= 2 * ABS_TOL


def test_solution_property(mild, solved):
    x = 1.0
    for n in (0, 1, 3, 20):
        lhs = solved(orbit_point(mild.problem.phi, x, n))
        assert abs(lhs - (A_n(mild.problem, x, n) + solved(x))) <= 2 * ABS_TOL * (1 + n)


def test_uniqueness_across_starting_points(mild):
    f1 = mild.with_perturbation(lambda x: 0.05 / x**2).f
    f2 = mild.with_perturbation(lambda x: -0.03 / x**2).f
    probes = [0.5, 2.0, 6.0]
    g1 = solve_stability(mild.problem, f1, mild.eps, probes)
    g2 = solve_stability(mild.problem, f2, mild.eps, probes)
    for a, b in zip(g1, g2):
        assert abs(a.value - b.value) <= 4 * ABS_TOL


def test_monotone_certification(mild):
    loose = solve_stability(mild.problem, mild.f, mild.eps, [1.0],
                            DEFAULT_POLICY.replace(solve_tol=1e-3))[0]
    tight = solve_stability(mild.problem, mild.f, mild.eps, [1.0])[0]
    assert tight.iterations > loose.iterations
    assert tight.certified_bound <= loose.certified_bound


def test_witness_validity(mild):
    cert = certify_approximation(mild.problem, mild.f, mild.eps, [0.5, 3.0])
    assert cert.certified
    for x in cert.probes:
        assert residual(mild.problem, cert.witness, x) <= 2 * ABS_TOL
        assert abs(mild.f(x) - cert.witness(x)) <= mild.eps(x)


def test_horizon_monotonicity():
    bad = make_fixture("digamma-violating")
    seen = None
    for N in (2, 10, 50, 200):
        c = check_condition_ii(bad.problem, bad.f, bad.eps, [1.0], N)
        found = {(v.x, v.n) for v in c.violations}
        assert c.verdict is CertVerdict.VIOLATED
        if seen is not None:
            assert seen <= found
        seen = found
