"""Phase space, Poisson structures, constraint sets and the Jacobiator."""
from __future__ import annotations

import logging
from fractions import Fraction
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping, Sequence

import numpy as np

from .kernels import PolyBatch, jacobiator_contract
from .poly import PolyExpr, PolyParseError, mat_zeros, parse_poly
from .rational import RationalBatch, jacobiator_exact, rational, rational_point

logger = logging.getLogger(__name__)


class SpaceMismatchError(ValueError):
    pass


class NonFiniteError(ArithmeticError):
    """A matrix field produced NaN or infinity at an evaluation point."""


class EntryParseError(ValueError):
    """Parse failure of a matrix entry, carrying its (row, col) location."""

    def __init__(self, location, cause: PolyParseError):
        super().__init__(f"entry {location}: {cause}")
        self.location = location
        self.cause = cause


@dataclass(frozen=True)
class PhaseSpace:
    var_names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.var_names)
        object.__setattr__(self, "var_names", names)
        if len(names) < 1:
            raise ValueError("phase space needs at least one variable")
        if len(set(names)) != len(names):
            raise ValueError(f"variable names must be distinct: {names}")

    @property
    def N(self) -> int:
        return len(self.var_names)

    def parse(self, src: str) -> PolyExpr:
        return parse_poly(src, self.var_names)

    def format(self, p: PolyExpr) -> str:
        return p.to_string(self.var_names)

    def var(self, name_or_index) -> PolyExpr:
        i = name_or_index if isinstance(name_or_index, int) else self.var_names.index(name_or_index)
        return PolyExpr.var(self.N, i)


def _check_square(entries, n):
    if len(entries) != n or any(len(row) != n for row in entries):
        raise ValueError(f"matrix must be {n}x{n}")


@dataclass(frozen=True, eq=False)
class PoissonStructure:
    """Antisymmetric matrix field J(z) with polynomial entries.

    The Jacobi identity is not enforced here; see :func:`jacobiator`.
    """

    space: PhaseSpace
    entries: tuple

    def __post_init__(self):
        entries = tuple(tuple(row) for row in self.entries)
        object.__setattr__(self, "entries", entries)
        n = self.space.N
        _check_square(entries, n)
        for i in range(n):
            if not entries[i][i].is_zero():
                raise ValueError(f"diagonal entry ({i},{i}) must be zero")
            for j in range(i + 1, n):
                if entries[i][j] != -entries[j][i]:
                    raise ValueError(f"entries ({i},{j}) and ({j},{i}) are not antisymmetric")

    @property
    def N(self) -> int:
        return self.space.N

    def __eq__(self, other):
        if not isinstance(other, PoissonStructure):
            return NotImplemented
        return self.space == other.space and self.entries == other.entries

    __hash__ = None

    @cached_property
    def _batch(self) -> PolyBatch:
        return PolyBatch([x for row in self.entries for x in row], self.N)

    def at(self, z) -> np.ndarray:
        return self._batch(z).reshape(self.N, self.N)

    @cached_property
    def _rbatch(self) -> RationalBatch:
        return RationalBatch([x for row in self.entries for x in row])

    def exact_at(self, zq) -> list:
        """J at a point of exact rationals, as a nested list."""
        flat, n = self._rbatch(zq), self.N
        return [flat[i * n:(i + 1) * n] for i in range(n)]

    @cached_property
    def derivatives(self):
        """dJ[l][j][k] = d J_jk / d z_l, symbolically."""
        n = self.N
        return tuple(tuple(tuple(self.entries[j][k].diff(l) for k in range(n)) for j in range(n))
                     for l in range(n))

    @cached_property
    def _dbatch(self) -> PolyBatch:
        return PolyBatch([x for m in self.derivatives for row in m for x in row], self.N)

    def derivatives_at(self, z) -> np.ndarray:
        return self._dbatch(z).reshape(self.N, self.N, self.N)

    def is_constant(self) -> bool:
        return all(x.is_constant() for row in self.entries for x in row)

    def upper_strings(self) -> dict:
        n = self.N
        return {f"{i + 1},{j + 1}": self.space.format(self.entries[i][j])
                for i in range(n) for j in range(i + 1, n) if not self.entries[i][j].is_zero()}


def build_structure(space: PhaseSpace, upper_entries: Mapping) -> PoissonStructure:
    """Build J from its strict upper triangle.

    ``upper_entries`` maps ``(i, j)`` (0-based, i<j) or ``"i,j"`` strings
    (1-based, as in problem files) to polynomial strings or PolyExpr.
    Missing entries are zero.
    """
    n = space.N
    rows = [list(r) for r in mat_zeros(n, n, n)]
    for key, val in upper_entries.items():
        i, j = _parse_index(key, n)
        if isinstance(val, PolyExpr):
            p = val
        else:
            try:
                p = space.parse(str(val))
            except PolyParseError as exc:
                raise EntryParseError(key, exc) from exc
        rows[i][j] = p
        rows[j][i] = -p
    return PoissonStructure(space, tuple(tuple(r) for r in rows))


def _parse_index(key, n):
    if isinstance(key, str):
        parts = key.replace(" ", "").split(",")
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise ValueError(f"bad entry key {key!r}; expected 'i,j'")
        i, j = int(parts[0]) - 1, int(parts[1]) - 1
    else:
        i, j = key
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"entry {key!r} out of range for dimension {n}")
    if i >= j:
        raise ValueError(f"entry {key!r} is not strictly upper triangular")
    return i, j


def canonical_structure(space: PhaseSpace, pairs: Sequence[tuple[int, int]]) -> PoissonStructure:
    """J with {z_q, z_p} = 1 for each 0-based (q, p) index pair."""
    one = PolyExpr.const(space.N, 1)
    upper = {}
    for q, p in pairs:
        upper[(min(q, p), max(q, p))] = one if q < p else -one
    return build_structure(space, upper)


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    space: PhaseSpace
    phis: tuple
    gradients: tuple = field(default=None)

    def __post_init__(self):
        phis = tuple(self.phis)
        object.__setattr__(self, "phis", phis)
        for p in phis:
            if p.nvars != self.space.N:
                raise SpaceMismatchError("constraint defined over a different number of variables")
        grads = tuple(tuple(p.diff(i) for i in range(self.space.N)) for p in phis)
        if self.gradients is not None and tuple(tuple(r) for r in self.gradients) != grads:
            raise ValueError("supplied gradients do not match the constraint functions")
        object.__setattr__(self, "gradients", grads)
        M, N = len(phis), self.space.N
        if M and not M < N - 2:
            logger.warning("%d constraints on %d variables: M < N-2 does not hold", M, N)

    @classmethod
    def parse(cls, space: PhaseSpace, sources: Sequence[str]) -> "ConstraintSet":
        phis = []
        for n, src in enumerate(sources):
            try:
                phis.append(space.parse(src))
            except PolyParseError as exc:
                raise EntryParseError(n, exc) from exc
        return cls(space, tuple(phis))

    @property
    def M(self) -> int:
        return len(self.phis)

    @cached_property
    def _phi_batch(self) -> PolyBatch:
        return PolyBatch(self.phis, self.space.N)

    @cached_property
    def _grad_batch(self) -> PolyBatch:
        return PolyBatch([x for row in self.gradients for x in row], self.space.N)

    def values_at(self, z) -> np.ndarray:
        return self._phi_batch(z)

    def Q_at(self, z) -> np.ndarray:
        """Jacobian Q[n, i] = dPhi_n/dz_i at z."""
        return self._grad_batch(z).reshape(self.M, self.space.N)

    @cached_property
    def _grad_rbatch(self) -> RationalBatch:
        return RationalBatch([x for row in self.gradients for x in row])

    def exact_Q(self, zq) -> list:
        flat, n = self._grad_rbatch(zq), self.space.N
        return [flat[i * n:(i + 1) * n] for i in range(self.M)]


def _check_space(*objs):
    spaces = {o.space for o in objs}
    if len(spaces) != 1:
        raise SpaceMismatchError("objects live on different phase spaces")


def bracket(F: PolyExpr, G: PolyExpr, J: PoissonStructure) -> PolyExpr:
    """{F, G} = sum_ij dF/dz_i J_ij dG/dz_j, exactly."""
    n = J.N
    if F.nvars != n or G.nvars != n:
        raise SpaceMismatchError("F and G must be polynomials over the structure's variables")
    dF = [F.diff(i) for i in range(n)]
    dG = [G.diff(j) for j in range(n)]
    total = PolyExpr.zero(n)
    for i in range(n):
        if dF[i].is_zero():
            continue
        for j in range(n):
            if dG[j].is_zero() or J.entries[i][j].is_zero():
                continue
            total = total + dF[i] * J.entries[i][j] * dG[j]
    return total


# -- Jacobiator ----------------------------------------------------------

def symbolic_jacobiator(entries, denominator: PolyExpr | None = None) -> tuple:
    """Full N x N x N tensor of polynomials for a polynomial matrix field.

    With a ``denominator`` d the field is K/d and the returned tensor is
    d^3 times its Jacobiator, which is again polynomial:
    sum_l K_il (d dK_jk/dz_l - K_jk dd/dz_l) + cyclic.
    """
    n = len(entries)
    if n == 0:
        return ()
    nvars = entries[0][0].nvars
    if nvars != n:
        raise ValueError("matrix dimension must equal the number of variables")
    if denominator is not None and denominator == 1:
        denominator = None
    if denominator is None:
        d = [[[entries[j][k].diff(l) for k in range(n)] for j in range(n)] for l in range(n)]
    else:
        dd = [denominator.diff(l) for l in range(n)]
        d = [[[denominator * entries[j][k].diff(l) - entries[j][k] * dd[l] for k in range(n)]
              for j in range(n)] for l in range(n)]
    zero = PolyExpr.zero(n)
    T = [[[zero] * n for _ in range(n)] for _ in range(n)]

    def cyc(a, b, c):
        s = zero
        for l in range(n):
            if not entries[a][l].is_zero() and not d[l][b][c].is_zero():
                s = s + entries[a][l] * d[l][b][c]
        return s

    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                s = cyc(i, j, k) + cyc(j, k, i) + cyc(k, i, j)
                T[i][j][k] = T[j][k][i] = T[k][i][j] = s
                T[j][i][k] = T[i][k][j] = T[k][j][i] = -s
    return tuple(tuple(tuple(r) for r in m) for m in T)


def default_step(z: np.ndarray) -> np.ndarray:
    return np.finfo(float).eps ** (1.0 / 3.0) * np.maximum(1.0, np.abs(z))


STENCILS = {
    # (multiple of h, weight) pairs over central differences D(m h)
    "central": ((1, Fraction(1)),),
    # Richardson extrapolation (4 D(h) - D(2h)) / 3, O(h^4)
    "richardson4": ((1, Fraction(4, 3)), (2, Fraction(-1, 3))),
    # two Richardson levels over D(h), D(2h), D(4h), O(h^6)
    "richardson6": ((1, Fraction(64, 45)), (2, Fraction(-20, 45)), (4, Fraction(1, 45))),
}


def numeric_jacobiator(field: Callable[[np.ndarray], np.ndarray], z, step=None,
                       scheme: str = "central", exact: bool = False) -> np.ndarray:
    """Jacobiator of a pointwise matrix field via finite differences.

    ``step`` is a scalar or per-coordinate array; ``None`` selects
    eps^(1/3) * max(1, |z_l|).  ``scheme`` is ``"central"`` (O(h^2)) or
    ``"richardson4"`` (O(h^4)) or ``"richardson6"`` (O(h^6)).  With ``exact=True`` the field is called with
    a tuple of exact rationals and must return a nested list of rationals;
    differences and the contraction are then free of roundoff.
    """
    if scheme not in STENCILS:
        raise ValueError(f"unknown finite-difference scheme {scheme!r}")
    z = np.asarray(z, dtype=np.float64)
    n = z.shape[0]
    h = default_step(z) if step is None else np.broadcast_to(np.asarray(step, dtype=float), (n,))
    if np.any(h <= 0) or np.any(~np.isfinite(h)):
        raise ValueError("finite-difference step must be positive and finite")
    if exact:
        return _exact_jacobiator(field, z, h, STENCILS[scheme])
    J0 = np.asarray(field(z), dtype=np.float64)
    if not np.all(np.isfinite(J0)):
        raise NonFiniteError(f"non-finite matrix at {z.tolist()}")
    dJ = np.zeros((n, n, n))
    for l in range(n):
        for mult, weight in STENCILS[scheme]:
            zp, zm = z.copy(), z.copy()
            zp[l] += mult * h[l]
            zm[l] -= mult * h[l]
            width = zp[l] - zm[l]
            if width == 0.0:
                raise ValueError(f"finite-difference step underflows at coordinate {l}")
            dJ[l] += float(weight) * (np.asarray(field(zp)) - np.asarray(field(zm))) / width
    if not np.all(np.isfinite(dJ)):
        raise NonFiniteError(f"non-finite derivative at {z.tolist()}")
    return jacobiator_contract(np.ascontiguousarray(J0), dJ)


def _exact_jacobiator(field, z, h, stencil):
    n = z.shape[0]
    zq = rational_point(z)
    hq = [rational(x) for x in h]
    J0 = field(zq)
    dJ = []
    for l in range(n):
        acc = None
        for mult, weight in stencil:
            w = rational(weight) / (2 * mult * hq[l])
            zp, zm = list(zq), list(zq)
            zp[l] += mult * hq[l]
            zm[l] -= mult * hq[l]
            Fp, Fm = field(tuple(zp)), field(tuple(zm))
            term = [[(a - b) * w for a, b in zip(rp, rm)] for rp, rm in zip(Fp, Fm)]
            acc = term if acc is None else [[a + b for a, b in zip(ra, rb)]
                                             for ra, rb in zip(acc, term)]
        dJ.append(acc)
    return jacobiator_exact(J0, dJ)


def jacobiator(J, mode: str = "symbolic", point=None, step=None):
    """Jacobiator of a Poisson structure (or any antisymmetric matrix field).

    ``mode="symbolic"`` returns a tensor of PolyExpr; ``mode="numeric"``
    evaluates at ``point`` using central differences (``J`` may then be a
    callable field).
    """
    if mode == "symbolic":
        entries = J.entries if isinstance(J, PoissonStructure) else J
        return symbolic_jacobiator(entries)
    if mode == "numeric":
        if point is None:
            raise ValueError("numeric mode requires a point")
        field_fn = J.at if isinstance(J, PoissonStructure) else J
        return numeric_jacobiator(field_fn, point, step)
    raise ValueError(f"unknown mode {mode!r}")


def exact_jacobiator_at(J: PoissonStructure, z) -> np.ndarray:
    """Symbolic-derivative Jacobiator evaluated in floats (no finite differences)."""
    return jacobiator_contract(np.ascontiguousarray(J.at(z)), J.derivatives_at(z))
