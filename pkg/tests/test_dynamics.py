import csv

import numpy as np
import pytest

from diracbracket.dirac import ObstructionError, build_dirac_matrix, solve_D, symbolic_D
from diracbracket.dynamics import integrate
from diracbracket.fixtures import example1, load_bundled, obstructed, rigid_body
from diracbracket.phase import ConstraintSet, PhaseSpace, build_structure


@pytest.fixture(scope="module")
def ex1_sys():
    fx = example1()
    D = symbolic_D(fx.D, "user_supplied", fx.denominator)
    return build_dirac_matrix(fx.J, fx.cons, D)


def test_example1_traces_unit_circle(ex1_sys):
    H = ex1_sys.space.parse("1/2*w1^2 + 1/2*w2^2")
    dt, n = 1e-2, 629
    tr = integrate(ex1_sys, H, [1, 2, 3, 1, 0], dt, n)
    t = tr.times
    w = tr.states[:, 3:].astype(float)
    # J*[w1,w2] = -1 gives w1' = -w2, w2' = w1
    np.testing.assert_allclose(w[:, 0], np.cos(t), atol=1e-8)
    np.testing.assert_allclose(w[:, 1], np.sin(t), atol=1e-8)
    np.testing.assert_array_equal(tr.states[:, :3].astype(float), np.tile([1, 2, 3], (n + 1, 1)))
    assert tr.max_constraint_drift == 0.0


def test_constant_hamiltonian_is_static(ex1_sys):
    H = ex1_sys.space.parse("7/2")
    tr = integrate(ex1_sys, H, [0.5, -1, 2, 0.1, 0.2], 1e-2, 50)
    assert (tr.states == tr.states[0]).all()
    assert tr.max_energy_drift == 0 and tr.max_constraint_drift == 0


@pytest.mark.parametrize("H", ["1/2*z1^2 + 1/2*z2^2 + 1/2*z3^2", "1/2*z1^2 + z2^2 + 3/2*z3^2"])
def test_rigid_body_casimir(H):
    fx = rigid_body()
    sys_ = build_dirac_matrix(fx.J, fx.cons, solve_D(fx.J, fx.cons))
    tr = integrate(sys_, fx.J.space.parse(H), [1.0, 0.5, -0.5], 1e-3, 10_000, record_every=100)
    norms = (tr.states.astype(float) ** 2).sum(axis=1)
    assert np.abs(norms - norms[0]).max() <= 1e-8
    assert tr.max_energy_drift <= 1e-8


def test_drift_is_fourth_order():
    pf = load_bundled("firstclass")
    sys_ = pf.build_system()
    drifts = []
    for dt in (1e-2, 5e-3):
        tr = integrate(sys_, pf.H, pf.initial_state, dt, int(round(2 / dt)))
        drifts.append((tr.max_constraint_drift, tr.max_energy_drift))
    (c1, e1), (c2, e2) = drifts
    assert 4 <= c1 / c2 <= 64
    assert 4 <= e1 / e2 <= 64


def test_blow_up_truncates():
    sp = PhaseSpace(("q", "p"))
    J = build_structure(sp, {"1,2": "1"})
    sys_ = build_dirac_matrix(J, ConstraintSet(sp, ()), solve_D(J, ConstraintSet(sp, ())))
    # p' = q^2 blows up in finite time
    tr = integrate(sys_, sp.parse("1/2*p^2 - 1/3*q^3"), [2.0, 2.0], 0.05, 1000, dtype=np.float64)
    assert tr.truncated and "non-finite" in tr.diagnostic
    assert np.isfinite(tr.states.astype(float)).all()
    assert len(tr.times) < 1001


def test_leaving_admissible_region_raises():
    fx = obstructed()
    sys_ = build_dirac_matrix(fx.J, fx.cons, solve_D(fx.J, fx.cons))
    with pytest.raises(ObstructionError):
        integrate(sys_, fx.J.space.parse("q2^2"), [0.1, 0.2, 0.3, 0.4], 1e-2, 5)


def test_argument_validation(ex1_sys):
    H = ex1_sys.space.parse("w1")
    with pytest.raises(ValueError):
        integrate(ex1_sys, H, [1, 2, 3, 0, 0], 0.0, 5)
    with pytest.raises(ValueError):
        integrate(ex1_sys, H, [1, 2, 3], 1e-3, 5)
    with pytest.raises(ValueError):
        integrate(ex1_sys, H, [1, 2, float("nan"), 0, 0], 1e-3, 5)


def test_record_every_and_csv(ex1_sys, tmp_path):
    H = ex1_sys.space.parse("1/2*w1^2 + 1/2*w2^2")
    tr = integrate(ex1_sys, H, [1, 2, 3, 1, 0], 1e-3, 25, record_every=10)
    np.testing.assert_allclose(tr.times, [0, 0.01, 0.02, 0.025])
    out = tmp_path / "traj.csv"
    tr.to_csv(out)
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["t", "z1", "z2", "z3", "w1", "w2", "drift_phi_max", "drift_H"]
    assert len(rows) == 5
    assert float(rows[-1][4]) == pytest.approx(np.cos(0.025), abs=1e-12)
