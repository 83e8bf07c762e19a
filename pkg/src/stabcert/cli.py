"""``stabcert`` command line: ``solve``, ``certify`` and ``demo``.

Exit codes (stable):

    0  every probe converged / certified
    1  the problem-spec file could not be read or validated
    2  a probe diverged or failed to converge (solve)
    3  a hypothesis or condition was violated
    4  a verdict was inconclusive (certify)
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import __version__
from .applications import (reference_digamma, reference_homogeneity_solution,
                           reference_shift_p_solution, make_fixture)
from .certifier import (CertVerdict, Condition, certify_approximation, check_condition_ii,
                        check_condition_iii)
from .errors import (DefectViolated, Divergent, DomainViolation, EvaluationError,
                     NoConvergence, SpecParseError, StabcertError, UnknownFixture, CauchyStall)
from .linear import solve_stability
from .series import OrbitVerdict
from .spec import ProblemSpec, load_spec, parse_probe_arg

EXIT_OK = 0
EXIT_SPEC = 1
EXIT_DIVERGENT = 2
EXIT_VIOLATED = 3
EXIT_INCONCLUSIVE = 4

_STDERR_LINES = 5

CSV_COLUMNS = ("x", "g", "iterations", "certified_bound", "eps_star", "dist_f_g", "verdict")


@dataclass
class RunReport:
    command: str
    spec: dict[str, Any]
    rows: list[dict[str, Any]]
    exit_code: int
    elapsed_s: float = 0.0
    version: str = __version__
    certificate: dict[str, Any] | None = None
    messages: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        doc = {
            "tool_version": self.version,
            "command": self.command,
            "spec": self.spec,
            "exit_code": self.exit_code,
            "rows": self.rows,
            "timing": {"elapsed_s": self.elapsed_s},
        }
        if self.certificate is not None:
            doc["certificate"] = self.certificate
        if self.messages:
            doc["messages"] = self.messages
        return json.dumps(doc, indent=2, default=_json_default) + "\n"

    def csv_body(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows:
            w.writerow([_csv_cell(row.get(c)) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_csv(self) -> str:
        head = [f"# stabcert {self.version}", f"# command: {self.command}",
                f"# spec: {json.dumps(self.spec, sort_keys=True, separators=(',', ':'))}",
                f"# elapsed_s: {self.elapsed_s:.3f}"]
        head += [f"# {m}" for m in self.messages]
        return "\n".join(head) + "\n" + self.csv_body()


def _json_default(o: Any) -> Any:
    if isinstance(o, float) and not math.isfinite(o):
        return repr(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _csv_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def run_solve(spec: ProblemSpec) -> RunReport:
    t0 = time.perf_counter()
    problem, f, eps = spec.problem(), spec.approximant(), spec.eps()
    rows: list[dict[str, Any]] = []
    messages: list[str] = []
    codes = set()
    for x in spec.probes:
        row: dict[str, Any] = {c: None for c in CSV_COLUMNS}
        row["x"] = x
        try:
            r = solve_stability(problem, f, eps, [x], spec.policy)[0]
        except DefectViolated as exc:
            row["verdict"] = "DefectViolated"
            codes.add(EXIT_VIOLATED)
            messages.append(f"x={x!r}: {exc}")
        except (Divergent, NoConvergence, DomainViolation, EvaluationError) as exc:
            row["verdict"] = type(exc).__name__
            codes.add(EXIT_DIVERGENT)
            messages.append(f"x={x!r}: {type(exc).__name__}: {exc}")
        else:
            row.update(g=r.value, iterations=r.iterations, certified_bound=r.certified_bound,
                       eps_star=r.eps_star, dist_f_g=r.dist_f_g, verdict="Converged")
        rows.append(row)
    code = EXIT_VIOLATED if EXIT_VIOLATED in codes else (EXIT_DIVERGENT if codes else EXIT_OK)
    return RunReport("solve", spec.to_dict(), rows, code, time.perf_counter() - t0,
                     messages=messages)


def run_certify(spec: ProblemSpec) -> RunReport:
    t0 = time.perf_counter()
    problem, f, eps = spec.problem(), spec.approximant(), spec.eps()
    probes = list(spec.probes)
    cond = Condition(spec.condition)
    messages: list[str] = []
    if cond is Condition.II:
        cert = check_condition_ii(problem, f, eps, probes, spec.horizon)
    elif cond is Condition.III:
        cert = check_condition_iii(problem, f, eps, spec.delta_fn(), probes, spec.horizon)
    else:
        try:
            cert = certify_approximation(problem, f, eps, probes, spec.horizon, spec.policy)
        except CauchyStall as exc:
            messages.append(f"CauchyStall: {exc}")
            rows = [{**{c: None for c in CSV_COLUMNS}, "x": x, "verdict": "Inconclusive"}
                    for x in probes]
            return RunReport("certify", spec.to_dict(), rows, EXIT_INCONCLUSIVE,
                             time.perf_counter() - t0, messages=messages)
    violated_at = {v.x for v in cert.violations}
    rows = []
    g = problem.group
    for x in probes:
        row: dict[str, Any] = {c: None for c in CSV_COLUMNS}
        row["x"] = x
        if x in violated_at:
            row["verdict"] = CertVerdict.VIOLATED.value
        elif cert.orbit_verdicts.get(x, OrbitVerdict.VANISHES) is not OrbitVerdict.VANISHES:
            row["verdict"] = CertVerdict.INCONCLUSIVE.value
        elif cert.verdict is CertVerdict.INCONCLUSIVE and not cert.orbit_verdicts:
            row["verdict"] = CertVerdict.INCONCLUSIVE.value
        else:
            row["verdict"] = CertVerdict.CERTIFIED.value
        if cert.witness is not None:
            w = cert.witness.details(x)
            row.update(g=w.value, iterations=w.iterations, certified_bound=w.bound,
                       dist_f_g=g.dist(f(x), w.value))
        rows.append(row)
    for v in cert.violations[:20]:
        messages.append(f"violation x={v.x!r} n={v.n} margin={v.margin:.6g}")
    if len(cert.violations) > 20:
        messages.append(f"... {len(cert.violations) - 20} more violations")
    code = {CertVerdict.CERTIFIED: EXIT_OK, CertVerdict.VIOLATED: EXIT_VIOLATED,
            CertVerdict.INCONCLUSIVE: EXIT_INCONCLUSIVE}[cert.verdict]
    return RunReport("certify", spec.to_dict(), rows, code, time.perf_counter() - t0,
                     certificate=cert.to_dict(), messages=messages)


DEMOS = {
    "digamma": ("digamma-mild", reference_digamma),
    "shift2": ("shift2-mild", lambda x: reference_shift_p_solution(x, 2.0)),
    "homog": ("homog-mild", lambda x: reference_homogeneity_solution(x, 2.0)),
}


def run_demo(name: str, out=None) -> RunReport:
    """Solve and certify a builtin fixture and print a summary table."""
    if name not in DEMOS:
        raise UnknownFixture(f"unknown demo {name!r}; available demos: {', '.join(DEMOS)}")
    out = out or sys.stdout
    t0 = time.perf_counter()
    fixture_name, reference = DEMOS[name]
    fx = make_fixture(fixture_name)
    probes = list(fx.probes)
    report = solve_stability(fx.problem, fx.f, fx.eps, probes)
    cert = certify_approximation(fx.problem, fx.f, fx.eps, probes)
    g = fx.problem.group
    rows = []
    print(f"demo {name}: fixture {fixture_name}, equation {fx.problem.name}, "
          f"group {g.name}", file=out)
    header = f"{'x':>6} {'g(x)':>20} {'reference':>20} {'|g-ref|':>10} {'eps*(x)':>12} " \
             f"{'d(f,g)':>12} {'iters':>7}"
    print(header, file=out)
    print("-" * len(header), file=out)
    for r in report:
        ref = reference(r.x)
        err = g.dist(r.value, ref)
        print(f"{r.x:6.2f} {r.value:20.12f} {ref:20.12f} {err:10.2e} {r.eps_star:12.10f} "
              f"{r.dist_f_g:12.3e} {r.iterations:7d}", file=out)
        rows.append({"x": r.x, "g": r.value, "iterations": r.iterations,
                     "certified_bound": r.certified_bound, "eps_star": r.eps_star,
                     "dist_f_g": r.dist_f_g, "verdict": "Converged"})
    print(f"certification (condition I, N={cert.horizon}): {cert.verdict.value}; "
          f"min condition-II margin {cert.min_margin():.3e}", file=out)
    code = EXIT_OK if cert.certified and report.converged else EXIT_VIOLATED
    return RunReport("demo", {"demo": name, "fixture": fixture_name}, rows, code,
                     time.perf_counter() - t0, certificate=cert.to_dict())


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stabcert", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"stabcert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("solve", "reconstruct the exact solution near f"),
                        ("certify", "decide approximability by an exact solution")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--spec", required=True, help="problem-spec JSON file")
        p.add_argument("--probes", help="override probes: '1,2,3' or 'start:stop:step'")
        p.add_argument("--tol", type=float, help="override policy.abs_tol")
        p.add_argument("--solve-tol", type=float, help="override policy.solve_tol")
        p.add_argument("--horizon", type=int, help="override the horizon N")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="output path (default stdout)")
    d = sub.add_parser("demo", help="run a packaged walkthrough")
    d.add_argument("name", help=f"one of: {', '.join(DEMOS)}")
    d.add_argument("--out", help="output path (default stdout)")
    return parser


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "demo":
        buf = io.StringIO()
        try:
            report = run_demo(args.name, out=buf)
        except UnknownFixture as exc:
            print(f"stabcert: {exc}", file=sys.stderr)
            return EXIT_SPEC
        _write(buf.getvalue(), args.out)
        return report.exit_code

    overrides: dict[str, Any] = {}
    try:
        if args.probes:
            overrides["probes"] = parse_probe_arg(args.probes)
        if args.horizon is not None:
            overrides["horizon"] = args.horizon
        pol = {}
        if args.tol is not None:
            pol["abs_tol"] = args.tol
        if args.solve_tol is not None:
            pol["solve_tol"] = args.solve_tol
        if pol:
            overrides["policy"] = pol
        spec = load_spec(args.spec, overrides)
    except SpecParseError as exc:
        print(f"stabcert: spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC

    try:
        report = run_solve(spec) if args.command == "solve" else run_certify(spec)
    except StabcertError as exc:
        print(f"stabcert: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DIVERGENT
    _write(report.to_json() if args.format == "json" else report.to_csv(), args.out)
    for m in report.messages[:_STDERR_LINES]:
        print(f"stabcert: {m}", file=sys.stderr)
    if len(report.messages) > _STDERR_LINES:
        print(f"stabcert: ({len(report.messages) - _STDERR_LINES} more lines in the report)",
              file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
