"""Acceptance suite: one test and one summary line per criterion.

The lines are printed by each test and repeated in the terminal summary.
"""
import json
import time

import numpy as np
import pytest
from acceptance_log import record

from diracbracket.cli import EXIT_FAILED, EXIT_OBSTRUCTED, main
from diracbracket.dirac import (ResidualError, build_dirac_matrix, check_kernel_condition,
                                compute_C, perturb_D, same_jstar, solve_D, symbolic_D)
from diracbracket.dynamics import integrate
from diracbracket.fixtures import (CONSTANT_D, admissible_fixture, bundled_path, counterexample,
                                   dependent, example1, first_class, load_bundled,
                                   random_symbolic_fixture, rigid_body)
from diracbracket.verify import (EXACT_ZERO, check_casimir, check_jacobi, check_projector,
                                 check_residual, check_uniqueness, sample_points, verify_system)

N_FIXTURES, N_POINTS, STEP = 20, 50, 1e-5


def _rows(space, m):
    return tuple(tuple(space.parse(x) for x in r) for r in m)


@pytest.mark.xfail(raises=ResidualError, strict=True,
                   reason="the constant example1 D fails J Q^T (1 - D C) = 0; "
                          "D/z1 is the admissible matrix")
def test_criterion_1_example1_end_to_end():
    t0 = time.perf_counter()
    fx = example1()
    sp = fx.J.space
    C_ok = compute_C(fx.J, fx.cons).entries == _rows(
        sp, [["0", "-z3", "z2"], ["z3", "0", "-z1"], ["-z2", "z1", "0"]])
    D = solve_D(fx.J, fx.cons, "verify_user", D_user=CONSTANT_D, denominator="z1")
    sys_ = build_dirac_matrix(fx.J, fx.cons, D)
    target = _rows(sp, [["0"] * 5] * 3 + [["0", "0", "0", "0", "-1"], ["0", "0", "0", "1", "0"]])
    J_ok = sys_.Jstar == target and sys_.denominator is None
    try:
        solve_D(fx.J, fx.cons, "verify_user", D_user=CONSTANT_D)
        literal, literal_ok = "accepted", True
    except ResidualError as exc:
        entry = exc.poly.to_string(sp.var_names)
        literal, literal_ok = f"rejected, entry ({exc.row},{exc.col}) = {entry}", False
    elapsed = time.perf_counter() - t0
    record(1, C_ok and J_ok and literal_ok and elapsed < 1,
           f"C exact: {C_ok}; J* exact with D/z1: {J_ok}; literal constant D: {literal}; "
           f"{elapsed:.2f} s")
    assert C_ok and J_ok and elapsed < 1
    solve_D(fx.J, fx.cons, "verify_user", D_user=CONSTANT_D)


@pytest.fixture(scope="module")
def property_suite():
    t0 = time.perf_counter()
    rows = []
    for index in range(N_FIXTURES):
        fx, sys_, samples, attempts = admissible_fixture(index, N_POINTS)
        res = check_jacobi(sys_, "numeric", samples.points, STEP)
        rows.append((fx, samples, res, attempts))
    return rows, time.perf_counter() - t0


def test_criterion_2_jacobi_from_casimir_property(property_suite):
    rows, elapsed = property_suite
    worst = max(r.max_residual for _, _, r, _ in rows)
    ratios = [r.detail["min_decay_ratio"] for _, _, r, _ in rows if r.detail["min_decay_ratio"]]
    min_ratio = min(ratios) if ratios else None
    all_pass = all(r.passed for _, _, r, _ in rows)
    decay_ok = all(x >= 3 for x in ratios)
    n_points = sum(len(r.detail["per_point"]) for _, _, r, _ in rows)
    redraws = sum(a - 1 for *_, a in rows)
    ok = all_pass and decay_ok and n_points == N_FIXTURES * N_POINTS and elapsed < 60
    record(2, ok, f"{len(rows)} fixtures x {N_POINTS} points ({redraws} redrawn), "
                  f"max residual {worst:.2e} (tol 1e-6), min decay ratio "
                  f"{min_ratio if min_ratio is None else round(min_ratio, 1)} (need 3), {elapsed:.1f} s")
    assert ok


def test_criterion_3_everywhere_in_phase_space(property_suite):
    rows, _ = property_suite
    min_off = min(int((~s.on_surface).sum()) for _, s, _, _ in rows)
    stats = {True: [0, 0], False: [0, 0]}
    for _, s, res, _ in rows:
        for on, (r1, r2) in zip(s.on_surface, res.detail["per_point"]):
            good = r1 <= res.tolerance and (r1 <= 1e-12 or r1 >= 3 * r2)
            stats[bool(on)][0 if good else 1] += 1
    same = (stats[True][1] == 0) == (stats[False][1] == 0)
    ok = min_off >= 25 and same
    record(3, ok, f"min off-surface points per fixture {min_off} (need 25); "
                  f"pass/fail on surface {stats[True]}, off surface {stats[False]}")
    assert ok


def test_criterion_4_counterexample(tmp_path):
    fx = counterexample(lam=2)
    sys_ = build_dirac_matrix(fx.J, fx.cons, symbolic_D(fx.D), relaxed=True)
    report = verify_system(sys_, n_points=20, seed=0)
    jac, cas = report.check("jacobi"), report.check("casimir")
    code = main(["check", str(bundled_path("counterexample")), "--points", "20",
                 "--report", str(tmp_path / "r.json")])
    cli_class = json.loads((tmp_path / "r.json").read_text())["classification"]
    ok = (report.classification == "jacobi_only" and jac.max_residual == EXACT_ZERO
          and cas.max_residual == pytest.approx(2.0, abs=1e-14) and code == EXIT_FAILED
          and cli_class == "jacobi_only")
    record(4, ok, f"classification {report.classification}; jacobi {jac.max_residual}; "
                  f"casimir {cas.max_residual}; exit code {code}")
    assert ok


def test_criterion_5_obstruction(capsys):
    code = main(["check", str(bundled_path("obstructed")), "--points", "20"])
    err = capsys.readouterr().err
    line = next((x for x in err.splitlines() if x.startswith("witness vector:")), None)
    w = np.array(json.loads(line.split(":", 1)[1])) if line else None
    dist = min(np.abs(w - s * np.eye(3)[2]).max() for s in (1, -1)) if w is not None else np.inf
    ok = code == EXIT_OBSTRUCTED and dist <= 1e-10
    record(5, ok, f"exit code {code}; witness {None if w is None else w.tolist()}; "
                  f"distance to +-e3 {dist:.1e}")
    assert ok


def test_criterion_6_uniqueness():
    summaries, ok = [], True
    fixtures = [example1()] + [random_symbolic_fixture(s) for s in range(5)]
    for fx in fixtures:
        D = solve_D(fx.J, fx.cons, "verify_user", D_user=fx.D, denominator=fx.denominator)
        base = build_dirac_matrix(fx.J, fx.cons, D)
        res = check_uniqueness(base, n_perturbations=5, max_degree=1,
                               points=sample_points(base, 20, 0).points)
        degree = res.detail["degree"]
        same = all(
            same_jstar(base, build_dirac_matrix(fx.J, fx.cons,
                                                perturb_D(fx.J, fx.cons, D, k, degree).D))
            for k in range(5))
        ok &= res.passed and not res.detail["rigid"] and same
        summaries.append(f"{fx.name}: degree {degree}, dim {res.detail['space_dimension']}")
    record(6, ok, "J* structurally unchanged under 5 perturbations each; " + "; ".join(summaries))
    assert ok


def test_criterion_7_redundant_constraints():
    fa = first_class()
    sa = build_dirac_matrix(fa.J, fa.cons, solve_D(fa.J, fa.cons))
    pa = sample_points(sa, 100, 1).points
    ra, ca = check_residual(sa, pa), check_casimir(sa, pa)

    fb = dependent()
    sb = build_dirac_matrix(fb.J, fb.cons, solve_D(fb.J, fb.cons))
    pb = sample_points(sb, 100, 2).points
    kernel = all(check_kernel_condition(fb.J, fb.cons, z).holds for z in pb)
    exists = all(np.isfinite(sb.D.at(z)).all() for z in pb)
    cb = check_casimir(sb, pb)
    ok = (ra.passed and ra.max_residual <= 1e-10 and ca.passed and ca.max_residual <= 1e-10
          and kernel and exists and cb.passed and cb.max_residual <= 1e-10)
    record(7, ok, f"(a) forD residual {ra.max_residual:.1e}, casimir {ca.max_residual:.1e}; "
                  f"(b) kernel condition at all points {kernel}, casimir {cb.max_residual:.1e}")
    assert ok


def test_criterion_8_projector_identities():
    systems = []
    for name in ("example1", "firstclass", "dependent"):
        systems.append((name, load_bundled(name).build_system()))
    rb = rigid_body()
    systems.append(("rigid-body", build_dirac_matrix(rb.J, rb.cons, solve_D(rb.J, rb.cons))))
    for index in range(5):
        fx, sys_, _, _ = admissible_fixture(index, 10)
        systems.append((fx.name, sys_))
    worst = {}
    ok = True
    for name, sys_ in systems:
        pts = sample_points(sys_, 100, 7).points
        for c in check_projector(sys_, pts):
            ok &= c.passed and len(pts) == 100
            worst[c.name] = max(worst.get(c.name, 0.0), c.max_residual or 0.0)
    record(8, ok, f"{len(systems)} fixtures x 100 points; "
                  + ", ".join(f"{k} {v:.1e}" for k, v in sorted(worst.items())))
    assert ok


def test_criterion_9_dynamics_conservation():
    pf = load_bundled("example1")
    sys_ = pf.build_system()
    t0 = time.perf_counter()
    a = integrate(sys_, pf.H, pf.initial_state, 1e-3, 10_000)
    b = integrate(sys_, pf.H, pf.initial_state, 5e-4, 20_000)
    elapsed = time.perf_counter() - t0
    ratio = a.max_energy_drift / b.max_energy_drift if b.max_energy_drift else float("inf")
    ok = a.max_constraint_drift <= 1e-10 and a.max_energy_drift <= 1e-8 and ratio >= 8
    record(9, ok, f"constraint drift {a.max_constraint_drift:.1e}, energy drift "
                  f"{a.max_energy_drift:.1e}, halving dt reduces energy drift {ratio:.1f}x "
                  f"({a.states.dtype}, {elapsed:.1f} s)")
    assert ok
