"""Verification battery for assembled Dirac systems.

Every check returns a :class:`CheckResult`; :func:`verify_system` runs the
whole battery on a shared set of sample points and returns a
:class:`VerificationReport` whose JSON form is deterministic.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dirac import (DiracSystem, ObstructionError, build_dirac_matrix, check_kernel_condition,
                    perturb_D, residual_forD, same_jstar, solve_D)
from .linalg import RCOND, spectral_info
from .phase import NonFiniteError, numeric_jacobiator, symbolic_jacobiator
from .poly import PolyExpr

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCES = {
    "casimir": 1e-10,
    "jacobi": 1e-6,
    "projector": 1e-10,
    "residual": 1e-10,
    "antisymmetry": 1e-14,
    "uniqueness": 1e-10,
    "kernel": 1e-10,
}
DEFAULT_STEP = 1e-5
DEFAULT_SCHEME = "richardson6"
# residuals below this are not expected to decay when the step is halved
DECAY_FLOOR = 1e-12
EXACT_ZERO = "exact-zero"
OFF_SURFACE = 0.5

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


@dataclass
class CheckResult:
    name: str
    status: str
    max_residual: object  # float or EXACT_ZERO
    tolerance: Optional[float] = None
    witness: Optional[dict] = None
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "witness": self.witness,
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    checks: list
    sample_points: list
    seed: int
    tolerances: dict
    classification: Optional[str] = None
    excluded_points: list = field(default_factory=list)
    on_surface: list = field(default_factory=list)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def failed(self) -> list:
        return [c for c in self.checks if c.status == FAIL]

    @property
    def ok(self) -> bool:
        return not self.failed

    def to_dict(self) -> dict:
        return {
            "checks": [c.to_dict() for c in sorted(self.checks, key=lambda c: c.name)],
            "classification": self.classification,
            "excluded_points": self.excluded_points,
            "on_surface": self.on_surface,
            "sample_points": self.sample_points,
            "seed": self.seed,
            "tolerances": dict(sorted(self.tolerances.items())),
        }

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _witness(point, component=None, **extra):
    w = {"point": [float(x) for x in point]}
    if component is not None:
        w["component"] = [int(c) for c in component]
    w.update(extra)
    return w


def _symbolic_witness(polys, points, nvars, seed=0):
    """Witness for a nonzero polynomial residual.

    ``polys`` maps component tuples to PolyExpr.  The sample point with the
    largest value wins; with no usable point, random points are drawn until
    one of the polynomials is nonzero there.
    """
    best, where, comp = 0.0, None, None
    for z in points:
        for c, p in polys.items():
            v = abs(float(p(list(z))))
            if where is None or v > best:
                best, where, comp = v, z, c
    if where is None or best == 0.0:
        rng = np.random.default_rng(seed)
        for _ in range(100):
            z = rng.uniform(-2, 2, nvars)
            vals = {c: abs(float(p(list(z)))) for c, p in polys.items()}
            c = max(vals, key=vals.get)
            if vals[c] > 0:
                best, where, comp = vals[c], z, c
                break
    return best, where, comp


# -- sampling ------------------------------------------------------------

@dataclass
class SampleSet:
    points: np.ndarray
    on_surface: np.ndarray  # bool per point: ||Phi(z)|| <= OFF_SURFACE
    excluded: list  # [{"point": [...], "reason": str}]
    generic_rank: int


def _c_and_grad(sys_or_pair, z):
    J, cons = sys_or_pair
    Jz, Q = J.at(z), cons.Q_at(z)
    C = Q @ Jz @ Q.T
    return 0.5 * (C - C.T)


def _transition_distance(J, cons, z, rank, eps=1e-7):
    """Estimated distance from z to the locus where rank C drops below ``rank``.

    Uses sigma_rank(C(z)) / ||dC/dz||, with the gradient norm from central
    differences.
    """
    C = _c_and_grad((J, cons), z)
    s = np.linalg.svd(C, compute_uv=False)
    if rank == 0:
        return np.inf
    sig = s[rank - 1]
    grad2 = 0.0
    for l in range(z.shape[0]):
        zp, zm = z.copy(), z.copy()
        zp[l] += eps
        zm[l] -= eps
        dC = (_c_and_grad((J, cons), zp) - _c_and_grad((J, cons), zm)) / (2 * eps)
        grad2 += float(np.sum(dC * dC))
    if grad2 == 0.0:
        return np.inf if sig > 0 else 0.0
    return sig / np.sqrt(grad2)


def _denominator_distance(den, z):
    if den is None:
        return np.inf
    val = abs(float(den(list(z))))
    g = np.array([float(den.diff(l)(list(z))) for l in range(z.shape[0])])
    gn = float(np.linalg.norm(g))
    return np.inf if gn == 0.0 else val / gn


def generic_rank(J, cons, rng, trials: int = 16, box: float = 2.0) -> int:
    if cons.M == 0:
        return 0
    best = 0
    for _ in range(trials):
        z = rng.uniform(-box, box, J.N)
        best = max(best, spectral_info(_c_and_grad((J, cons), z)).rank)
    return best


def _project_to_surface(cons, z, iters=50, tol=1e-13):
    for _ in range(iters):
        phi = cons.values_at(z)
        if np.max(np.abs(phi)) < tol:
            return z
        Q = cons.Q_at(z)
        step = np.linalg.lstsq(Q, phi, rcond=None)[0]
        z = z - step
        if not np.all(np.isfinite(z)):
            return None
    return z if np.max(np.abs(cons.values_at(z))) < 1e-10 else None


def sample_points(sys: DiracSystem, n: int, seed: int, box: float = 2.0,
                  exclusion: float = 1e-3, on_surface_fraction: float = 0.5,
                  max_tries: int = 200) -> SampleSet:
    """Draw ``n`` points from [-box, box]^N.

    About ``on_surface_fraction`` of them are projected onto the constraint
    surface by Gauss-Newton; the rest are required to satisfy
    ``||Phi(z)|| > 0.5``.  Points within ``exclusion`` of a rank-transition
    locus of C (or of a zero of the D denominator) are rejected and logged.
    """
    rng = np.random.default_rng(seed)
    J, cons = sys.J, sys.constraints
    rank = generic_rank(J, cons, rng, box=box)
    den = sys.D.denominator if sys.D.is_symbolic else None
    n_on = int(round(n * on_surface_fraction)) if cons.M else 0
    points, flags, excluded = [], [], []
    want_on = n_on
    budget = max_tries * max(n, 1)
    misses = 0
    while len(points) < n and budget > 0:
        budget -= 1
        z = rng.uniform(-box, box, J.N)
        targeting_on = want_on > 0
        if targeting_on:
            zp = _project_to_surface(cons, z)
            if zp is None or np.max(np.abs(zp)) > 2 * box:
                misses += 1
                if misses > 20 * max(n, 1) and misses > 10 * (n_on - want_on):
                    want_on = 0  # surface unreachable; fall back to off-surface sampling
                continue
            z = zp
        if cons.M:
            if not targeting_on and np.linalg.norm(cons.values_at(z)) <= OFF_SURFACE:
                continue
            info = spectral_info(_c_and_grad((J, cons), z))
            reason = None
            if info.ambiguous:
                reason = "rank-ambiguous"
            elif info.rank < rank:
                reason = f"rank {info.rank} below generic rank {rank}"
            elif _transition_distance(J, cons, z, rank) < exclusion:
                reason = "near rank-transition locus"
            elif _denominator_distance(den, z) < exclusion:
                reason = "near zero of D denominator"
            if reason is not None:
                excluded.append({"point": z.tolist(), "reason": reason})
                if targeting_on and len(excluded) > 4 * n:
                    want_on = 0
                continue
        points.append(z)
        flags.append(bool(np.linalg.norm(cons.values_at(z)) <= OFF_SURFACE) if cons.M else False)
        if targeting_on:
            want_on -= 1
    if len(points) < n:
        logger.warning("only %d of %d sample points could be drawn", len(points), n)
    if excluded:
        logger.info("excluded %d sample points near singular loci", len(excluded))
    pts = np.array(points).reshape(-1, J.N)
    return SampleSet(pts, np.array(flags, dtype=bool), excluded, rank)


# -- individual checks ---------------------------------------------------

def _max_over_points(fn, points):
    best, where, comp = 0.0, None, None
    for z in points:
        r = np.asarray(fn(z))
        if r.size == 0:
            continue
        a = np.abs(r)
        idx = np.unravel_index(int(np.argmax(a)), a.shape)
        if a[idx] > best or where is None:
            best, where, comp = float(a[idx]), z, idx
    return best, where, comp


def check_casimir(sys: DiracSystem, points, tol: float = DEFAULT_TOLERANCES["casimir"]) -> CheckResult:
    """max over points of ||J*(z) Q(z)^T||_max, or an exact symbolic zero."""
    if sys.M == 0:
        return CheckResult("casimir", PASS, 0.0, tol, detail={"vacuous": True})
    detail = {"mode": "numeric"}
    if sys.is_symbolic:
        R = sys.casimir_residual_symbolic()
        if all(x.is_zero() for row in R for x in row):
            return CheckResult("casimir", PASS, EXACT_ZERO, tol, detail={"mode": "symbolic"})
        detail = {"mode": "symbolic", "symbolic_zero": False}
    skipped = []
    best, where, comp = 0.0, None, None
    for z in points:
        try:
            r = np.abs(sys.casimir_residual_at(z))
        except (ObstructionError, FloatingPointError) as exc:
            skipped.append({"point": list(map(float, z)), "reason": str(exc)})
            continue
        idx = np.unravel_index(int(np.argmax(r)), r.shape)
        if where is None or r[idx] > best:
            best, where, comp = float(r[idx]), z, idx
    if skipped:
        detail["skipped_points"] = skipped
    if where is None:
        return CheckResult("casimir", SKIPPED, None, tol, detail=detail)
    if detail.get("symbolic_zero") is False or best > tol:
        return CheckResult("casimir", FAIL, best, tol, _witness(where, comp), detail)
    return CheckResult("casimir", PASS, best, tol, detail=detail)


def _symbolic_jacobi(entries, den, points, tol, names):
    T = symbolic_jacobiator(entries, den)
    n = len(entries)
    nonzero = [(i, j, k) for i in range(n) for j in range(i + 1, n) for k in range(j + 1, n)
               if not T[i][j][k].is_zero()]
    n_comp = n * (n - 1) * (n - 2) // 6
    if not nonzero:
        return CheckResult("jacobi", PASS, EXACT_ZERO, tol,
                           detail={"mode": "symbolic", "components": n_comp})
    best, where, comp = 0.0, None, None
    for z in points:
        scale = 1.0
        if den is not None:
            scale = float(den(list(z))) ** 3
        for (i, j, k) in nonzero:
            v = abs(float(T[i][j][k](list(z))) / scale)
            if where is None or v > best:
                best, where, comp = v, z, (i, j, k)
    first = nonzero[0]
    detail = {"mode": "symbolic", "components": n_comp, "nonzero_components": len(nonzero),
              "example": {"component": list(first),
                          "polynomial": T[first[0]][first[1]][first[2]].to_string(names)}}
    if where is None:
        best, where, comp = _symbolic_witness({c: T[c[0]][c[1]][c[2]] for c in nonzero}, (), n)
        if den is not None:
            best /= abs(float(den(list(where)))) ** 3
    return CheckResult("jacobi", FAIL, best, tol, _witness(where, comp), detail)


def check_jacobi(target, mode: str = "auto", points=(), step: float = DEFAULT_STEP,
                 tol: float = DEFAULT_TOLERANCES["jacobi"], scheme: str = DEFAULT_SCHEME,
                 exact: bool = True) -> CheckResult:
    """Jacobi identity of J* (for a DiracSystem) or of a PoissonStructure.

    Symbolic mode demands an exactly vanishing Jacobiator.  Numeric mode
    differentiates the pointwise field with finite differences of step
    ``step`` (``scheme`` is a key of ``phase.STENCILS``) and also records the
    residual at ``step/2`` and the per-point decay ratios.  With ``exact``
    the field values are computed in rational arithmetic, so the residual
    is pure truncation error of the stencil.
    """
    from .phase import PoissonStructure

    if isinstance(target, PoissonStructure):
        entries, den = target.entries, None
        field_fn, exact_fn = target.at, target.exact_at
    else:
        entries, den = target.Jstar, target.denominator
        field_fn, exact_fn = target.Jstar_at, target.Jstar_exact_at
    names = target.space.var_names
    if mode == "auto":
        mode = "symbolic" if entries is not None else "numeric"
    if mode == "symbolic":
        if entries is None:
            raise ValueError("symbolic Jacobi check needs a symbolic J*")
        return _symbolic_jacobi(entries, den, points, tol, names)
    if not step > 1e-300:
        raise ValueError("finite-difference step underflow")
    if exact:
        return _numeric_jacobi(_exact_field(field_fn, exact_fn), points, step, tol, scheme, True)
    return _numeric_jacobi(field_fn, points, step, tol, scheme, False)


def _exact_field(field_fn, exact_fn):
    """Memoized exact field; the float field runs first at each new base point
    so that the kernel-condition check (and its ObstructionError) still applies."""
    cache = {}

    def f(zq):
        if zq not in cache:
            cache[zq] = exact_fn(zq)
        return cache[zq]

    def check(z):
        field_fn(z)

    f.check = check
    return f


def _numeric_jacobi(field_fn, points, step, tol, scheme, exact):
    best, where, comp = 0.0, None, None
    half_best = 0.0
    ratios, skipped = [], []
    per_point = []
    for z in points:
        try:
            if exact:
                field_fn.check(z)
            T1 = numeric_jacobiator(field_fn, z, step, scheme, exact)
            T2 = numeric_jacobiator(field_fn, z, step / 2, scheme, exact)
        except (ObstructionError, NonFiniteError, FloatingPointError, ZeroDivisionError) as exc:
            skipped.append({"point": list(map(float, z)), "reason": str(exc)})
            continue
        a1, a2 = np.abs(T1), np.abs(T2)
        r1, r2 = float(a1.max(initial=0.0)), float(a2.max(initial=0.0))
        per_point.append([r1, r2])
        if r1 > DECAY_FLOOR:
            ratios.append(r1 / r2 if r2 > 0 else float("inf"))
        if where is None or r1 > best:
            idx = np.unravel_index(int(np.argmax(a1)), a1.shape) if a1.size else ()
            best, where, comp = r1, z, idx
        half_best = max(half_best, r2)
    detail = {"mode": "numeric", "step": step, "scheme": scheme,
              "arithmetic": "exact" if exact else "float",
              "max_residual_half_step": half_best,
              "min_decay_ratio": float(min(ratios)) if ratios else None,
              "per_point": per_point}
    if skipped:
        detail["skipped_points"] = skipped
    if where is None:
        return CheckResult("jacobi", SKIPPED, None, tol, detail=detail)
    if best > tol:
        return CheckResult("jacobi", FAIL, best, tol, _witness(where, comp), detail)
    return CheckResult("jacobi", PASS, best, tol, detail=detail)


def check_residual(sys: DiracSystem, points, tol: float = DEFAULT_TOLERANCES["residual"]) -> CheckResult:
    """Residual of J Q^T (1 - D C) = 0."""
    if sys.M == 0:
        return CheckResult("forD_residual", PASS, 0.0, tol, detail={"vacuous": True})
    if sys.D.is_symbolic:
        R = residual_forD(sys.J, sys.constraints, sys.D)
        nz = [(i, j) for i, row in enumerate(R) for j, x in enumerate(row) if not x.is_zero()]
        if not nz:
            return CheckResult("forD_residual", PASS, EXACT_ZERO, tol, detail={"mode": "symbolic"})
        i, j = nz[0]
        detail = {"mode": "symbolic", "entry": [i, j],
                  "polynomial": sys.space.format(R[i][j])}
        best, where, comp = _max_over_points(
            lambda z: residual_forD(sys.J, sys.constraints, sys.D, point=z), points)
        if where is None or best == 0.0:
            polys = {(a, b): R[a][b] for a, b in nz}
            best, where, comp = _symbolic_witness(polys, (), sys.N)
            if sys.D.denominator is not None:
                best /= abs(float(sys.D.denominator(list(where))))
        return CheckResult("forD_residual", FAIL, best, tol, _witness(where, comp), detail)
    best, where, comp = 0.0, None, None
    skipped = []
    for z in points:
        try:
            r = np.abs(residual_forD(sys.J, sys.constraints, sys.D, point=z))
        except ObstructionError as exc:
            skipped.append({"point": list(map(float, z)), "reason": str(exc)})
            continue
        idx = np.unravel_index(int(np.argmax(r)), r.shape)
        if where is None or r[idx] > best:
            best, where, comp = float(r[idx]), z, idx
    detail = {"mode": "numeric"}
    if skipped:
        detail["skipped_points"] = skipped
    if where is None:
        return CheckResult("forD_residual", SKIPPED, None, tol, detail=detail)
    status = PASS if best <= tol else FAIL
    return CheckResult("forD_residual", status, best, tol,
                       _witness(where, comp) if status == FAIL else None, detail)


def check_antisymmetry(sys: DiracSystem, points, tol: float = DEFAULT_TOLERANCES["antisymmetry"]) -> CheckResult:
    """J* = -J*^T and D = -D^T (relative to the magnitude of the entries)."""
    if sys.is_symbolic:
        ok = all(sys.Jstar[i][j] == -sys.Jstar[j][i] for i in range(sys.N) for j in range(sys.N))
        okD = all(sys.D.matrix[i][j] == -sys.D.matrix[j][i]
                  for i in range(sys.M) for j in range(sys.M))
        if ok and okD:
            return CheckResult("antisymmetry", PASS, EXACT_ZERO, tol, detail={"mode": "symbolic"})
        sums = {("Jstar", i, j): sys.Jstar[i][j] + sys.Jstar[j][i]
                for i in range(sys.N) for j in range(i, sys.N)}
        sums.update({("D", i, j): sys.D.matrix[i][j] + sys.D.matrix[j][i]
                     for i in range(sys.M) for j in range(i, sys.M)})
        sums = {c: p for c, p in sums.items() if not p.is_zero()}
        best, where, comp = _symbolic_witness(sums, points, sys.N)
        return CheckResult("antisymmetry", FAIL, best, tol,
                           _witness(where, comp[1:], matrix=comp[0]), {"mode": "symbolic"})
    best, where = 0.0, None
    for z in points:
        try:
            Jz, Q = sys.J.at(z), sys.constraints.Q_at(z)
            D = sys.D.at(z)
        except ObstructionError:
            continue
        raw = Jz - (Jz @ Q.T) @ D @ (Q @ Jz)
        scale = max(1.0, float(np.abs(raw).max(initial=0.0)), float(np.abs(D).max(initial=0.0)))
        r = max(float(np.abs(raw + raw.T).max(initial=0.0)),
                float(np.abs(D + D.T).max(initial=0.0))) / scale
        if where is None or r > best:
            best, where = r, z
    if where is None:
        return CheckResult("antisymmetry", SKIPPED, None, tol, detail={"mode": "numeric"})
    # roundoff in the raw product, not D itself, dominates; D is antisymmetrized exactly
    status = PASS if best <= max(tol, 1e3 * np.finfo(float).eps) else FAIL
    return CheckResult("antisymmetry", status, best, tol,
                       _witness(where) if status == FAIL else None, {"mode": "numeric"})


def check_projector(sys: DiracSystem, points, tol: float = DEFAULT_TOLERANCES["projector"]) -> list:
    """P^2 = P, P J Q^T = 0 and J* = P J P^T at every point."""
    names = ("projector_idempotent", "projector_annihilates", "projector_factorization")
    best = {k: (0.0, None) for k in names}
    skipped = []
    for z in points:
        try:
            P = sys.P_at(z)
            Jz = sys.J.at(z)
            Js = sys.Jstar_at(z)
        except (ObstructionError, FloatingPointError) as exc:
            skipped.append({"point": list(map(float, z)), "reason": str(exc)})
            continue
        A = Jz @ sys.constraints.Q_at(z).T if sys.M else np.zeros((sys.N, 0))
        vals = {
            "projector_idempotent": np.abs(P @ P - P).max(initial=0.0),
            "projector_annihilates": np.abs(P @ A).max(initial=0.0),
            "projector_factorization": np.abs(Js - P @ Jz @ P.T).max(initial=0.0),
        }
        for k, v in vals.items():
            if best[k][1] is None or v > best[k][0]:
                best[k] = (float(v), z)
    out = []
    for k in names:
        v, z = best[k]
        detail = {"skipped_points": skipped} if skipped else {}
        if z is None:
            out.append(CheckResult(k, SKIPPED, None, tol, detail=detail))
        elif v > tol:
            out.append(CheckResult(k, FAIL, v, tol, _witness(z), detail))
        else:
            out.append(CheckResult(k, PASS, v, tol, detail=detail))
    return out


def check_uniqueness(sys: DiracSystem, n_perturbations: int = 3, tol: float = DEFAULT_TOLERANCES["uniqueness"],
                     points=(), seed: int = 0, max_degree: int = 1) -> CheckResult:
    """J* does not depend on which admissible D is used.

    Perturbations D + Delta with constant Delta are tried first; when D is
    rigid among constants, Delta of degree up to ``max_degree`` is used.  At
    the sample points J* is also compared with the pseudoinverse J*.
    """
    if not sys.D.is_symbolic:
        return CheckResult("uniqueness", SKIPPED, None, tol,
                           detail={"reason": "pointwise D has no symbolic perturbations"})
    if sys.relaxed:
        return CheckResult("uniqueness", SKIPPED, None, tol,
                           detail={"reason": "D does not satisfy the Casimir condition"})
    detail = {"perturbations": 0, "rigid": False, "degree": 0}
    degree = 0
    while True:
        probe = perturb_D(sys.J, sys.constraints, sys.D, seed, degree)
        if not probe.rigid or degree >= max_degree:
            break
        degree += 1
    detail["degree"] = degree
    worst = EXACT_ZERO
    if probe.rigid:
        detail["rigid"] = True
    else:
        detail["space_dimension"] = probe.dimension
        for k in range(n_perturbations):
            pert = perturb_D(sys.J, sys.constraints, sys.D, seed + k, degree)
            other = build_dirac_matrix(sys.J, sys.constraints, pert.D)
            detail["perturbations"] += 1
            if not same_jstar(sys, other):
                best, where, comp = _jstar_difference(sys, other, points)
                return CheckResult("uniqueness", FAIL, best, tol, _witness(where, comp),
                                   dict(detail, failed_seed=seed + k))
    # compare against the pseudoinverse bracket at the sample points
    if sys.M and len(points):
        pinv_sys = build_dirac_matrix(sys.J, sys.constraints, solve_D(sys.J, sys.constraints))
        best, where = 0.0, None
        compared = 0
        for z in points:
            try:
                r = float(np.abs(sys.Jstar_at(z) - pinv_sys.Jstar_at(z)).max(initial=0.0))
            except ObstructionError:
                continue
            compared += 1
            if where is None or r > best:
                best, where = r, z
        detail["pseudoinverse_points"] = compared
        if where is not None:
            detail["pseudoinverse_max_difference"] = best
            if best > tol:
                return CheckResult("uniqueness", FAIL, best, tol, _witness(where), detail)
    return CheckResult("uniqueness", PASS, worst, tol, detail=detail)


def _jstar_difference(a: DiracSystem, b: DiracSystem, points):
    da = a.denominator or PolyExpr.const(a.N, 1)
    db = b.denominator or PolyExpr.const(b.N, 1)
    diff = {(i, j): a.Jstar[i][j] * db - b.Jstar[i][j] * da
            for i in range(a.N) for j in range(a.N)}
    diff = {c: p for c, p in diff.items() if not p.is_zero()}
    best, where, comp = _symbolic_witness(diff, points, a.N)
    # report the difference of the fields, not of the cross-multiplied numerators
    best = float(np.abs(a.Jstar_at(where) - b.Jstar_at(where)).max())
    return best, where, comp


def check_kernel(sys: DiracSystem, points, tol: float = DEFAULT_TOLERANCES["kernel"]) -> CheckResult:
    if sys.M == 0:
        return CheckResult("kernel_condition", PASS, 0.0, tol, detail={"vacuous": True})
    worst, ambiguous = 0.0, 0
    for z in points:
        kc = check_kernel_condition(sys.J, sys.constraints, z, tol)
        if kc.ambiguous:
            ambiguous += 1
            continue
        worst = max(worst, kc.residual)
        if not kc.holds:
            return CheckResult("kernel_condition", FAIL, kc.residual, tol,
                               _witness(z, vector=[float(x) for x in kc.witness]),
                               {"rank": kc.rank})
    return CheckResult("kernel_condition", PASS, worst, tol, detail={"ambiguous_points": ambiguous})


def classify(jacobi: CheckResult, casimir: CheckResult) -> str:
    j = jacobi.passed
    c = casimir.passed and not casimir.detail.get("vacuous", False)
    if j and c:
        return "jacobi_and_casimir"
    if j:
        return "jacobi_only"
    if c:
        return "casimir_only"
    return "neither"


def check_counterexample_semantics(sys: DiracSystem, points=(), step: float = DEFAULT_STEP,
                                   tolerances: dict | None = None) -> str:
    """Joint classification of the Jacobi and Casimir properties of J*."""
    tol = dict(DEFAULT_TOLERANCES, **(tolerances or {}))
    return classify(check_jacobi(sys, "auto", points, step, tol["jacobi"]),
                    check_casimir(sys, points, tol["casimir"]))


# -- battery -------------------------------------------------------------

def verify_system(sys: DiracSystem, n_points: int = 100, seed: int = 0, step: float = DEFAULT_STEP,
                  tolerances: dict | None = None, n_perturbations: int = 3,
                  samples: SampleSet | None = None,
                  scheme: str = DEFAULT_SCHEME) -> VerificationReport:
    tol = dict(DEFAULT_TOLERANCES, **(tolerances or {}))
    samples = samples or sample_points(sys, n_points, seed)
    pts = samples.points
    checks = []
    kernel = check_kernel(sys, pts, tol["kernel"])
    checks.append(kernel)
    if kernel.status == FAIL and not sys.D.is_symbolic:
        # no admissible D exists there; the pointwise checks are meaningless
        for name in ("antisymmetry", "casimir", "forD_residual", "jacobi", "projector_idempotent",
                     "projector_annihilates", "projector_factorization", "uniqueness"):
            checks.append(CheckResult(name, SKIPPED, None, tol.get(name.split("_")[0]),
                                      detail={"reason": "kernel condition violated"}))
        return VerificationReport(checks, pts.tolist(), seed, tol, None,
                                  samples.excluded, samples.on_surface.tolist())
    checks.append(check_antisymmetry(sys, pts, tol["antisymmetry"]))
    checks.append(check_residual(sys, pts, tol["residual"]))
    casimir = check_casimir(sys, pts, tol["casimir"])
    jacobi = check_jacobi(sys, "auto", pts, step, tol["jacobi"], scheme=scheme)
    checks += [casimir, jacobi]
    checks += check_projector(sys, pts, tol["projector"])
    checks.append(check_uniqueness(sys, n_perturbations, tol["uniqueness"], pts, seed))
    return VerificationReport(checks, pts.tolist(), seed, tol, classify(jacobi, casimir),
                              samples.excluded, samples.on_surface.tolist())


__all__ = [
    "CheckResult", "VerificationReport", "SampleSet", "DEFAULT_TOLERANCES", "DEFAULT_STEP",
    "DEFAULT_SCHEME", "EXACT_ZERO", "sample_points", "check_casimir", "check_jacobi", "check_residual",
    "check_antisymmetry", "check_projector", "check_uniqueness", "check_kernel",
    "check_counterexample_semantics", "classify", "verify_system", "generic_rank", "RCOND",
]
