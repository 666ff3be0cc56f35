"""Generalized Dirac brackets for possibly singular constraint matrices.

Given a Poisson structure J, constraints Phi with Jacobian Q and the
constraint matrix C = Q J Q^T, a matrix D is admissible when it is
antisymmetric and

    J Q^T (1 - D C) = 0,

which makes every constraint a Casimir of J* = J - J Q^T D Q J.  Such a D
exists iff Ker C is contained in Ker(J Q^T).  The Moore-Penrose
pseudoinverse of C is one such D; it is computed pointwise.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .kernels import PolyBatch
from .linalg import RCOND, exact_nullspace, exact_pinv, spectral_info
from .phase import ConstraintSet, PoissonStructure, SpaceMismatchError, bracket
from .poly import (PolyExpr, divide_exact, mat_add, mat_identity, mat_mul, mat_sub,
                   mat_transpose, mat_zeros)
from .rational import RationalBatch
from .rational import matmul as rmatmul

KERNEL_TOL = 1e-10


class DiracError(Exception):
    pass


class ObstructionError(DiracError):
    """The kernel condition fails: some v in Ker C has J Q^T v != 0."""

    def __init__(self, witness, point=None, residual=None):
        self.witness = np.asarray(witness, dtype=float)
        self.point = None if point is None else np.asarray(point, dtype=float)
        self.residual = residual
        msg = f"kernel condition violated; witness {np.round(self.witness, 12).tolist()}"
        if point is not None:
            msg += f" at {self.point.tolist()}"
        super().__init__(msg)


class ResidualError(DiracError):
    def __init__(self, row: int, col: int, poly: PolyExpr, text: str | None = None):
        self.row, self.col, self.poly = row, col, poly
        super().__init__(f"J Q^T (1 - D C) has nonzero entry ({row}, {col}): "
                         f"{text if text is not None else poly}")


class AntisymmetryError(DiracError):
    pass


# -- C -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CMatrix:
    entries: tuple

    @property
    def M(self) -> int:
        return len(self.entries)

    @cached_property
    def _batch(self):
        nv = self.entries[0][0].nvars if self.entries else 0
        return PolyBatch([x for row in self.entries for x in row], nv) if self.entries else None

    def at(self, z) -> np.ndarray:
        if not self.entries:
            return np.zeros((0, 0))
        return self._batch(z).reshape(self.M, self.M)

    def __eq__(self, other):
        if isinstance(other, CMatrix):
            return self.entries == other.entries
        return tuple(tuple(r) for r in other) == self.entries

    __hash__ = None


def _same_space(J: PoissonStructure, constraints: ConstraintSet):
    if J.space != constraints.space:
        raise SpaceMismatchError("Poisson structure and constraints use different phase spaces")


def compute_C(J: PoissonStructure, constraints: ConstraintSet) -> CMatrix:
    """C[n][m] = {Phi_n, Phi_m}, exactly."""
    _same_space(J, constraints)
    M, nv = constraints.M, J.N
    rows = [list(r) for r in mat_zeros(nv, M, M)]
    for n in range(M):
        for m in range(n + 1, M):
            c = bracket(constraints.phis[n], constraints.phis[m], J)
            rows[n][m], rows[m][n] = c, -c
    return CMatrix(tuple(tuple(r) for r in rows))


def symbolic_A(J: PoissonStructure, constraints: ConstraintSet):
    """A = J Q^T (N x M) with polynomial entries."""
    return mat_mul(J.entries, mat_transpose(constraints.gradients, cols=J.N), nvars=J.N)


def _A_at(J, constraints, z):
    return J.at(z) @ constraints.Q_at(z).T


# -- kernel condition ----------------------------------------------------

@dataclass(frozen=True)
class KernelCheck:
    holds: bool
    witness: Optional[np.ndarray]
    rank: int
    ambiguous: bool
    residual: float
    singular_values: np.ndarray = field(repr=False)

    def __bool__(self):
        return self.holds


def _kernel_check(C: np.ndarray, A: np.ndarray, tol: float, rcond: float = RCOND):
    M = C.shape[0]
    if M == 0:
        return KernelCheck(True, None, 0, False, 0.0, np.zeros(0))
    if not (np.all(np.isfinite(C)) and np.all(np.isfinite(A))):
        raise FloatingPointError("non-finite matrix entries")
    info = spectral_info(C, rcond)
    _, _, vt = np.linalg.svd(C)
    kernel = vt[info.rank:].T
    if kernel.shape[1] == 0:
        return KernelCheck(True, None, info.rank, info.ambiguous, 0.0, info.singular_values)
    AK = A @ kernel
    if AK.size == 0:
        return KernelCheck(True, None, info.rank, info.ambiguous, 0.0, info.singular_values)
    _, s, wt = np.linalg.svd(AK)
    residual = float(s[0]) if s.size else 0.0
    scale = max(1.0, float(np.linalg.norm(A, 2)) if A.size else 1.0)
    if residual <= tol * scale:
        return KernelCheck(True, None, info.rank, info.ambiguous, residual, info.singular_values)
    v = kernel @ wt[0]
    v = v / np.linalg.norm(v)
    # sign convention: largest-magnitude component positive
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return KernelCheck(False, v, info.rank, info.ambiguous, residual, info.singular_values)


def check_kernel_condition(J: PoissonStructure, constraints: ConstraintSet, point,
                           tol: float = KERNEL_TOL) -> KernelCheck:
    """Decide Ker C(z) ⊆ Ker J(z)Q(z)^T at ``point``.

    On failure the returned witness is a unit vector v with C v ≈ 0 and
    ‖J Q^T v‖ maximal among such vectors.
    """
    _same_space(J, constraints)
    z = np.asarray(point, dtype=float)
    if z.shape != (J.N,):
        raise ValueError(f"point must have length {J.N}")
    if constraints.M == 0:
        return KernelCheck(True, None, 0, False, 0.0, np.zeros(0))
    Jz, Q = J.at(z), constraints.Q_at(z)
    C = Q @ Jz @ Q.T
    C = 0.5 * (C - C.T)
    return _kernel_check(C, Jz @ Q.T, tol)


# -- D -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DSolution:
    """An admissible D.

    Symbolic kind: ``matrix / denominator`` with polynomial entries and a
    common scalar polynomial denominator (1 unless given).  Pointwise kind:
    ``func(z)`` returns the float matrix.
    """

    kind: str  # "symbolic" | "pointwise"
    provenance: str  # "user_supplied" | "pseudoinverse" | "block_first_class" | "perturbed"
    matrix: Optional[tuple] = None
    func: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    M: int = 0
    denominator: Optional[PolyExpr] = None

    @property
    def is_symbolic(self) -> bool:
        return self.kind == "symbolic"

    @property
    def has_denominator(self) -> bool:
        return self.denominator is not None and self.denominator != 1

    @cached_property
    def _batch(self):
        if not self.matrix:
            return None
        return PolyBatch([x for row in self.matrix for x in row], self.matrix[0][0].nvars)

    def at(self, z) -> np.ndarray:
        if self.is_symbolic:
            if not self.matrix:
                return np.zeros((0, 0))
            out = self._batch(z).reshape(self.M, self.M)
            if self.has_denominator:
                out = out / self.denominator(list(np.asarray(z)))
            return out
        return self.func(np.asarray(z, dtype=float))


def symbolic_D(entries, provenance: str = "user_supplied",
               denominator: PolyExpr | None = None) -> DSolution:
    entries = tuple(tuple(r) for r in entries)
    M = len(entries)
    if any(len(r) != M for r in entries):
        raise ValueError("D must be square")
    if denominator is not None and denominator.is_zero():
        raise ZeroDivisionError("D denominator is the zero polynomial")
    if denominator is not None and denominator == 1:
        denominator = None
    return DSolution("symbolic", provenance, matrix=entries, M=M, denominator=denominator)


def _check_antisymmetric(D):
    M = len(D)
    for i in range(M):
        for j in range(i, M):
            if D[i][j] != -D[j][i]:
                raise AntisymmetryError(f"D[{i}][{j}] = {D[i][j]} is not -D[{j}][{i}] = {-D[j][i]}")


def _scalar_identity(den: PolyExpr | None, nvars: int, M: int):
    if den is None:
        return mat_identity(nvars, M)
    z = PolyExpr.zero(nvars)
    return tuple(tuple(den if i == j else z for j in range(M)) for i in range(M))


def residual_forD(J: PoissonStructure, constraints: ConstraintSet, D, point=None):
    """R = J Q^T (1 - D C).

    Symbolic (tuple of PolyExpr rows) when D is symbolic and ``point`` is
    None.  For D = K/d with a nontrivial denominator the symbolic result is
    d R = J Q^T (d - K C), which vanishes iff R does.  With ``point`` the
    float matrix R(z) is returned.
    """
    _same_space(J, constraints)
    M, N = constraints.M, J.N
    den = None
    if isinstance(D, DSolution):
        D_sym = D.matrix if D.is_symbolic else None
        den = D.denominator
    else:
        D_sym = tuple(tuple(r) for r in D)
    if D_sym is not None and len(D_sym) != M:
        raise ValueError(f"D is {len(D_sym)}x{len(D_sym)}, expected {M}x{M}")
    if point is None:
        if D_sym is None:
            raise ValueError("a pointwise D requires an evaluation point")
        if M == 0:
            return tuple(() for _ in range(N))
        C = compute_C(J, constraints).entries
        A = symbolic_A(J, constraints)
        inner = mat_sub(_scalar_identity(den, N, M), mat_mul(D_sym, C, nvars=N))
        return mat_mul(A, inner, nvars=N)
    z = np.asarray(point, dtype=float)
    if M == 0:
        return np.zeros((N, 0))
    Jz, Q = J.at(z), constraints.Q_at(z)
    C = Q @ Jz @ Q.T
    if isinstance(D, DSolution):
        Dz = D.at(z)
    else:
        Dz = np.array([[float(x(list(z))) for x in row] for row in D_sym]).reshape(M, M)
    return (Jz @ Q.T) @ (np.eye(M) - Dz @ C)


def _pointwise_pinv(J: PoissonStructure, constraints: ConstraintSet, rcond: float, tol: float):
    def D_at(z):
        Jz, Q = J.at(z), constraints.Q_at(z)
        C = Q @ Jz @ Q.T
        C = 0.5 * (C - C.T)
        check = _kernel_check(C, Jz @ Q.T, tol, rcond)
        if not check.holds:
            raise ObstructionError(check.witness, z, check.residual)
        D = np.linalg.pinv(C, rcond=rcond)
        return 0.5 * (D - D.T)

    return D_at


def solve_D(J: PoissonStructure, constraints: ConstraintSet, mode: str = "pointwise",
            D_user=None, denominator=None, rcond: float = RCOND,
            tol: float = KERNEL_TOL) -> DSolution:
    """Obtain an admissible D.

    ``mode="pointwise"``: D(z) = C(z)^+, the pseudoinverse with relative
    singular-value cutoff ``rcond``; each evaluation first checks the kernel
    condition and raises :class:`ObstructionError` when it fails.

    ``mode="verify_user"``: ``D_user`` (M x M polynomials or strings,
    optionally over a common ``denominator``) is checked for exact
    antisymmetry and an identically vanishing residual.
    """
    _same_space(J, constraints)
    M = constraints.M
    if mode == "pointwise":
        if M == 0:
            return DSolution("pointwise", "pseudoinverse", func=lambda z: np.zeros((0, 0)), M=0)
        return DSolution("pointwise", "pseudoinverse",
                         func=_pointwise_pinv(J, constraints, rcond, tol), M=M)
    if mode == "verify_user":
        if D_user is None:
            raise ValueError("verify_user mode needs D_user")
        if isinstance(D_user, DSolution):
            denominator = D_user.denominator if denominator is None else denominator
            D_user = D_user.matrix
        rows = _coerce_user_D(D_user, J, M)
        if isinstance(denominator, str):
            denominator = J.space.parse(denominator)
        _check_antisymmetric(rows)
        D = symbolic_D(rows, "user_supplied", denominator)
        R = residual_forD(J, constraints, D)
        for i, row in enumerate(R):
            for j, r in enumerate(row):
                if not r.is_zero():
                    raise ResidualError(i, j, r, J.space.format(r))
        return D
    raise ValueError(f"unknown mode {mode!r}")


def _coerce_user_D(D_user, J, M):
    rows = []
    for row in D_user:
        rows.append(tuple(x if isinstance(x, PolyExpr) else J.space.parse(str(x)) for x in row))
    if len(rows) != M or any(len(r) != M for r in rows):
        raise ValueError(f"D must be {M}x{M}")
    return tuple(rows)


# -- assembled system ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiracSystem:
    """Assembled Dirac data.

    For a symbolic D, ``Jstar`` and ``P`` hold polynomial matrices and the
    actual fields are ``Jstar / denominator`` and ``P / P_denominator``
    (a denominator is None when the field is polynomial).  For a pointwise D
    both are None and the fields are only available through ``*_at``.
    """

    J: PoissonStructure
    constraints: ConstraintSet
    C: CMatrix
    D: DSolution
    Jstar: Optional[tuple]
    P: Optional[tuple]
    relaxed: bool = False
    denominator: Optional[PolyExpr] = None
    P_denominator: Optional[PolyExpr] = None

    @property
    def space(self):
        return self.J.space

    @property
    def N(self) -> int:
        return self.J.N

    @property
    def M(self) -> int:
        return self.constraints.M

    @property
    def is_symbolic(self) -> bool:
        return self.Jstar is not None

    @cached_property
    def _jstar_batch(self):
        return PolyBatch([x for row in self.Jstar for x in row], self.N)

    @cached_property
    def _p_batch(self):
        return PolyBatch([x for row in self.P for x in row], self.N)

    @staticmethod
    def _den_at(den, z):
        return den(list(np.asarray(z))) if den is not None else 1

    def Jstar_at(self, z) -> np.ndarray:
        if self.Jstar is not None:
            return self._jstar_batch(z).reshape(self.N, self.N) / self._den_at(self.denominator, z)
        z = np.asarray(z, dtype=float)
        Jz = self.J.at(z)
        if self.M == 0:
            return Jz
        Q = self.constraints.Q_at(z)
        Js = Jz - (Jz @ Q.T) @ self.D.at(z) @ (Q @ Jz)
        return 0.5 * (Js - Js.T)

    @cached_property
    def _jstar_rbatch(self):
        return RationalBatch([x for row in self.Jstar for x in row])

    @cached_property
    def _D_rbatch(self):
        return RationalBatch([x for row in self.D.matrix for x in row])

    def Jstar_exact_at(self, zq) -> list:
        """J* at a point of exact rationals (nested list), without roundoff.

        A pointwise pseudoinverse D is recomputed exactly; the rank is
        then the exact rank of C at ``zq``.
        """
        N, M = self.N, self.M
        if self.Jstar is not None:
            flat = self._jstar_rbatch(zq)
            if self.denominator is not None:
                d = RationalBatch([self.denominator])(zq)[0]
                flat = [x / d for x in flat]
            return [flat[i * N:(i + 1) * N] for i in range(N)]
        Jz = self.J.exact_at(zq)
        if M == 0:
            return Jz
        Q = self.constraints.exact_Q(zq)
        A = rmatmul(Jz, [list(col) for col in zip(*Q)])
        if self.D.is_symbolic:
            flat = self._D_rbatch(zq)
            if self.D.has_denominator:
                d = RationalBatch([self.D.denominator])(zq)[0]
                flat = [x / d for x in flat]
            Dz = [flat[i * M:(i + 1) * M] for i in range(M)]
        elif self.D.provenance == "pseudoinverse":
            Dz = exact_pinv(rmatmul(Q, A))
        else:
            raise ValueError(f"no exact evaluation for a pointwise D of provenance {self.D.provenance!r}")
        # Q J = -A^T since J is antisymmetric
        ADA = rmatmul(rmatmul(A, Dz), [list(col) for col in zip(*A)])
        return [[Jz[i][j] + ADA[i][j] for j in range(N)] for i in range(N)]

    def P_at(self, z) -> np.ndarray:
        if self.P is not None:
            return self._p_batch(z).reshape(self.N, self.N) / self._den_at(self.P_denominator, z)
        z = np.asarray(z, dtype=float)
        if self.M == 0:
            return np.eye(self.N)
        Q = self.constraints.Q_at(z)
        return np.eye(self.N) - self.J.at(z) @ Q.T @ self.D.at(z) @ Q

    def A_at(self, z) -> np.ndarray:
        return _A_at(self.J, self.constraints, np.asarray(z))

    def casimir_residual_at(self, z) -> np.ndarray:
        """J*(z) Q(z)^T; zero iff each constraint is a Casimir of J* at z."""
        if self.M == 0:
            return np.zeros((self.N, 0))
        return self.Jstar_at(z) @ self.constraints.Q_at(z).T

    def casimir_residual_symbolic(self):
        """Numerator of J* Q^T (exactly J* Q^T when J* is polynomial)."""
        if self.Jstar is None:
            raise ValueError("system has no symbolic J*")
        if self.M == 0:
            return tuple(() for _ in range(self.N))
        return mat_mul(self.Jstar, mat_transpose(self.constraints.gradients, cols=self.N),
                       nvars=self.N)

    def as_structure(self) -> PoissonStructure:
        if self.Jstar is None or self.denominator is not None:
            raise ValueError("J* is not a polynomial matrix")
        return PoissonStructure(self.space, self.Jstar)


def _try_divide(mat, den):
    out = []
    for row in mat:
        new = []
        for x in row:
            q = divide_exact(x, den)
            if q is None:
                return None
            new.append(q)
        out.append(tuple(new))
    return tuple(out)


def _symbolic_jstar(J, constraints, D: DSolution):
    """(J* numerator, its denominator, P numerator, its denominator)."""
    N = J.N
    if constraints.M == 0:
        return J.entries, None, mat_identity(N, N), None
    den = D.denominator if D.has_denominator else None
    A = symbolic_A(J, constraints)
    Q = constraints.gradients
    ADQ = mat_mul(mat_mul(A, D.matrix, nvars=N), Q, nvars=N)
    if den is None:
        return (mat_sub(J.entries, mat_mul(ADQ, J.entries, nvars=N)), None,
                mat_sub(mat_identity(N, N), ADQ), None)
    Jn = mat_sub(tuple(tuple(x * den for x in row) for row in J.entries),
                 mat_mul(ADQ, J.entries, nvars=N))
    Pn = mat_sub(_scalar_identity(den, N, N), ADQ)
    Jq, Pq = _try_divide(Jn, den), _try_divide(Pn, den)
    return ((Jq, None) if Jq is not None else (Jn, den)) + \
        ((Pq, None) if Pq is not None else (Pn, den))


def build_dirac_matrix(J: PoissonStructure, constraints: ConstraintSet, D: DSolution,
                       relaxed: bool = False) -> DiracSystem:
    """Assemble J* = J - J Q^T D Q J and P = 1 - J Q^T D Q.

    A symbolic D is re-verified (antisymmetry and vanishing residual) unless
    ``relaxed`` is set; relaxed systems exist only for negative testing.
    """
    _same_space(J, constraints)
    if D.M != constraints.M:
        raise ValueError(f"D is {D.M}x{D.M} but there are {constraints.M} constraints")
    C = compute_C(J, constraints)
    if D.is_symbolic:
        if not relaxed:
            verified = solve_D(J, constraints, "verify_user", D_user=D)
            D = replace(verified, provenance=D.provenance)
        else:
            _check_antisymmetric(D.matrix)
        Jstar, den, P, pden = _symbolic_jstar(J, constraints, D)
        return DiracSystem(J, constraints, C, D, Jstar, P, relaxed, den, pden)
    if constraints.M == 0:
        # nothing to project out: J* = J symbolically
        return DiracSystem(J, constraints, C, D, J.entries, mat_identity(J.N, J.N), relaxed)
    return DiracSystem(J, constraints, C, D, None, None, relaxed, None)


def same_jstar(a: DiracSystem, b: DiracSystem) -> bool:
    """Structural equality of two symbolic J* fields (cross-multiplied)."""
    if not (a.is_symbolic and b.is_symbolic):
        raise ValueError("both systems need a symbolic J*")
    da = a.denominator or PolyExpr.const(a.N, 1)
    db = b.denominator or PolyExpr.const(b.N, 1)
    return all(x * db == y * da for ra, rb in zip(a.Jstar, b.Jstar) for x, y in zip(ra, rb))


# -- perturbations -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Perturbation:
    D: DSolution
    delta: Optional[tuple]
    rigid: bool
    dimension: int  # dimension of the admissible perturbation space


def _monomials(nvars: int, degree: int):
    out = [()]
    for _ in range(nvars):
        out = [e + (k,) for e in out for k in range(degree + 1)]
    return sorted((e for e in out if sum(e) <= degree), key=lambda e: (sum(e), e))


def perturbation_space(J: PoissonStructure, constraints: ConstraintSet, degree: int = 0):
    """Basis of antisymmetric Delta with polynomial entries of degree <= ``degree``
    such that J Q^T Delta C = 0 identically.

    Returns a list of M x M PolyExpr matrices.
    """
    _same_space(J, constraints)
    M, N = constraints.M, J.N
    if M < 2:
        return []
    A = symbolic_A(J, constraints)
    C = compute_C(J, constraints).entries
    unknowns = []  # (n, m, monomial)
    columns = []  # coefficient dicts keyed by (row, col, exps)
    for n in range(M):
        for m in range(n + 1, M):
            # A (E_nm - E_mn) C = A[:, n] C[m, :] - A[:, m] C[n, :]
            base = [[A[r][n] * C[m][c] - A[r][m] * C[n][c] for c in range(M)] for r in range(N)]
            for e in _monomials(N, degree):
                mono = PolyExpr(N, {e: 1})
                coeffs = {}
                for r in range(N):
                    for c in range(M):
                        if base[r][c].is_zero():
                            continue
                        for ex, v in (base[r][c] * mono).items():
                            coeffs[(r, c, ex)] = v
                unknowns.append((n, m, e))
                columns.append(coeffs)
    keys = sorted({k for col in columns for k in col})
    if not keys:
        null = [[int(i == j) for i in range(len(unknowns))] for j in range(len(unknowns))]
    else:
        rows = [[col.get(k, 0) for col in columns] for k in keys]
        null = exact_nullspace(rows, len(unknowns))
    return [_delta_from_vector(vec, unknowns, M, N) for vec in null]


def _delta_from_vector(vec, unknowns, M, N):
    rows = [[PolyExpr.zero(N) for _ in range(M)] for _ in range(M)]
    for coef, (n, m, e) in zip(vec, unknowns):
        if coef:
            term = PolyExpr(N, {e: coef})
            rows[n][m] = rows[n][m] + term
            rows[m][n] = rows[m][n] - term
    return tuple(tuple(r) for r in rows)


def perturb_D(J: PoissonStructure, constraints: ConstraintSet, D: DSolution, seed: int,
              degree: int = 0) -> Perturbation:
    """Random admissible D + Delta with J Q^T Delta C = 0.

    Delta has polynomial entries of degree <= ``degree`` (constants by
    default); for D = K/d it is added to the numerator K.  When only
    Delta = 0 is admissible the result is flagged rigid and carries D
    unchanged.
    """
    if not D.is_symbolic:
        raise ValueError("perturb_D needs a symbolic D")
    basis = perturbation_space(J, constraints, degree)
    if not basis:
        return Perturbation(D, None, True, 0)
    rng = random.Random(seed)
    weights = [rng.choice([-3, -2, -1, 1, 2, 3]) for _ in basis]
    N, M = J.N, constraints.M
    delta = mat_zeros(N, M, M)
    for w, b in zip(weights, basis):
        delta = mat_add(delta, tuple(tuple(x.scale(w) for x in row) for row in b))
    D_new = symbolic_D(mat_add(D.matrix, delta), "perturbed", D.denominator)
    return Perturbation(D_new, delta, False, len(basis))


__all__ = [
    "CMatrix", "DSolution", "DiracSystem", "KernelCheck", "Perturbation",
    "DiracError", "ObstructionError", "ResidualError", "AntisymmetryError",
    "compute_C", "check_kernel_condition", "solve_D", "residual_forD",
    "build_dirac_matrix", "perturb_D", "perturbation_space", "symbolic_D", "symbolic_A",
    "same_jstar",
]
