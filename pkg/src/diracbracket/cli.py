"""Command-line interface: ``diracbracket validate|check|build|simulate``.

Exit codes: 0 all checks pass, 1 a verification check failed, 2 the
kernel condition is violated (no admissible D), 3 malformed input.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .dirac import AntisymmetryError, ObstructionError, ResidualError, build_dirac_matrix, symbolic_D
from .dynamics import DEFAULT_DT, DEFAULT_STEPS, integrate
from .problem import ProblemError, ProblemFile, dump_problem, load_problem
from .verify import DEFAULT_SCHEME, DEFAULT_STEP, FAIL, VerificationReport, verify_system

EXIT_OK, EXIT_FAILED, EXIT_OBSTRUCTED, EXIT_MALFORMED = 0, 1, 2, 3


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def assemble(pf: ProblemFile):
    """Build the system; a D that fails verification is kept (relaxed) and noted.

    Returns ``(system, rejection)`` where ``rejection`` describes why a
    user-supplied D was not accepted, or is None.
    """
    try:
        return pf.build_system(), None
    except (ResidualError, AntisymmetryError) as exc:
        D = symbolic_D(pf.D_rows, "user_supplied", pf.D_den)
        return build_dirac_matrix(pf.J, pf.cons, D, relaxed=True), str(exc)


def exit_code(report: VerificationReport) -> int:
    """Exit code as a function of the report alone."""
    if report.check("kernel_condition").status == FAIL:
        return EXIT_OBSTRUCTED
    return EXIT_FAILED if report.failed else EXIT_OK


def run_check(pf: ProblemFile, points=None, seed=None, step=DEFAULT_STEP, tolerances=None,
              scheme=DEFAULT_SCHEME) -> VerificationReport:
    sys_, rejection = assemble(pf)
    tol = dict(pf.tolerances)
    tol.update(tolerances or {})
    if seed is None:
        seed = pf.seed if pf.seed is not None else 0
    report = verify_system(sys_, n_points=points or pf.points or 100, seed=seed,
                           step=step, tolerances=tol, scheme=scheme)
    if rejection is not None:
        report.check("forD_residual").detail["rejected"] = rejection
    return report


def _print_report(report: VerificationReport, out) -> None:
    for c in sorted(report.checks, key=lambda c: c.name):
        res = c.max_residual
        res = f"{res:.3e}" if isinstance(res, float) else (res or "-")
        print(f"{c.name:26s} {c.status:8s} {res}", file=out)
    if report.classification:
        print(f"classification: {report.classification}", file=out)


def cmd_validate(args) -> int:
    pf = load_problem(args.file)
    print(f"ok: N={pf.space.N} M={pf.cons.M}" + (" (D supplied)" if pf.D_rows is not None else ""))
    return EXIT_OK


def cmd_check(args) -> int:
    pf = load_problem(args.file)
    tol = {}
    if args.tol_jacobi is not None:
        tol["jacobi"] = args.tol_jacobi
    if args.tol_casimir is not None:
        tol["casimir"] = args.tol_casimir
    report = run_check(pf, args.points, args.seed, args.step, tol, args.scheme)
    text = report.to_json()
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    if args.json:
        sys.stdout.write(text)
    else:
        _print_report(report, sys.stdout)
    code = exit_code(report)
    if code == EXIT_OBSTRUCTED:
        w = report.check("kernel_condition").witness
        print(f"kernel condition violated at {w['point']}", file=sys.stderr)
        print("witness vector: " + json.dumps(w["vector"]), file=sys.stderr)
    return code


def _derived(sys_) -> dict:
    space = sys_.space
    fmt = lambda m: [[space.format(x) for x in row] for row in m]  # noqa: E731
    out = {"C": fmt(sys_.C.entries), "D_provenance": sys_.D.provenance}
    if sys_.Jstar is not None:
        out["Jstar"] = fmt(sys_.Jstar)
        out["P"] = fmt(sys_.P)
        if sys_.denominator is not None:
            out["Jstar_denominator"] = space.format(sys_.denominator)
        if sys_.P_denominator is not None:
            out["P_denominator"] = space.format(sys_.P_denominator)
    return out


def cmd_build(args) -> int:
    pf = load_problem(args.file)
    sys_, rejection = assemble(pf)
    if rejection is not None and not pf.relaxed:
        _err(f"supplied D rejected: {rejection}")
        return EXIT_FAILED
    pf.extra["derived"] = _derived(sys_)
    dump_problem(pf, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    pf = load_problem(args.file)
    if pf.H is None:
        raise ProblemError("hamiltonian", "simulate needs a Hamiltonian")
    z0 = args.z0 if args.z0 is not None else pf.initial_state
    if z0 is None:
        raise ProblemError("initial_state", "give initial_state in the file or --z0")
    if len(z0) != pf.space.N:
        raise ProblemError("--z0", f"expected {pf.space.N} numbers")
    sys_, rejection = assemble(pf)
    if rejection is not None and not pf.relaxed:
        _err(f"supplied D rejected: {rejection}")
        return EXIT_FAILED
    dtype = np.longdouble if args.precision == "extended" else np.float64
    traj = integrate(sys_, pf.H, z0, args.dt, args.steps, dtype=dtype,
                     record_every=args.record_every)
    traj.to_csv(args.out)
    print(f"wrote {args.out}: {len(traj.times)} records, "
          f"constraint drift {traj.max_constraint_drift:.3e}, energy drift {traj.max_energy_drift:.3e}")
    if traj.truncated:
        _err(traj.diagnostic)
        return EXIT_FAILED
    return EXIT_OK


def _floats(text: str):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="diracbracket", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="parse and validate a problem file")
    v.add_argument("file")
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("check", help="run the verification battery")
    c.add_argument("file")
    c.add_argument("--points", type=int, default=None, help="sample points (default 100)")
    c.add_argument("--seed", type=int, default=None, help="sampling seed (default 0)")
    c.add_argument("--tol-jacobi", type=float, default=None)
    c.add_argument("--tol-casimir", type=float, default=None)
    c.add_argument("--step", type=float, default=DEFAULT_STEP, help="finite-difference step")
    c.add_argument("--scheme", default=DEFAULT_SCHEME,
                   choices=["central", "richardson4", "richardson6"])
    c.add_argument("--report", help="write the JSON report here")
    c.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("build", help="assemble C, D, J*, P and write them back out")
    b.add_argument("file")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("simulate", help="integrate z' = J* grad H with RK4")
    s.add_argument("file")
    s.add_argument("--dt", type=float, default=DEFAULT_DT)
    s.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    s.add_argument("--out", required=True, help="CSV trajectory path")
    s.add_argument("--z0", type=_floats, default=None, help="initial state, comma-separated")
    s.add_argument("--precision", choices=["extended", "double"], default="extended")
    s.add_argument("--record-every", type=int, default=1)
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors count as malformed input
        return EXIT_MALFORMED if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ProblemError as exc:
        _err(str(exc))
        return EXIT_MALFORMED
    except ObstructionError as exc:
        _err(f"kernel condition violated: {exc}")
        if exc.witness is not None:
            print("witness vector: " + json.dumps([float(x) for x in exc.witness]), file=sys.stderr)
        return EXIT_OBSTRUCTED
    except OSError as exc:
        _err(str(exc))
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
