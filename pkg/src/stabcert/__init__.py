"""Pointwise stability certificates for linear functional equations.

Given an approximate solution ``f`` of ``g(φ(x)) = a(x)•g(x)`` in a metric
group, rebuild the exact solution nearby and bound the distance, or decide
whether such a solution exists.
"""

__version__ = "0.1.0"

from .applications import (FIXTURES, BuiltinProblem, PerturbationFixture, ProblemKind,
                           make_fixture, make_problem, reference_digamma,
                           reference_homogeneity_solution, reference_shift_p_solution)
from .certifier import (Certificate, CertVerdict, Condition, Witness, certify_approximation,
                        check_condition_ii, check_condition_iii, uniqueness_check)
from .engine import (C3Verdict, ContractiveOperator, ProbeResult, SolveReport, apply_T_n,
                     check_C3, check_lambda_contractive, solve)
from .errors import (CapExceeded, CauchyStall, DefectViolated, Divergent, DomainViolation,
                     EvaluationError, InvalidParams, NoConvergence, PreconditionViolated,
                     SeriesDiverges, SpecParseError, StabcertError, UnknownFixture)
from .groups import ADDITIVE, MULTIPLICATIVE, AdditiveReals, MetricGroup, \
    MultiplicativePositiveReals, get_group
from .linear import (LinearEquationProblem, A_n, build_operator, check_cocycle,
                     closed_form_iterate, residual, solve_stability)
from .series import (OrbitVerdict, SeriesSum, TruncationPolicy, eps_star, sum_series, tail_sum,
                     vanishes_along_orbit)

__all__ = [name for name in dir() if not name.startswith("_")]
