"""Small dense linear algebra: exact over the rationals, and SVD-based in floats."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

try:
    from gmpy2 import mpq
except ImportError:  # pragma: no cover
    mpq = None

RCOND = 1e-10
AMBIGUITY_FACTOR = 100.0


# -- exact ----------------------------------------------------------------
# Entries stay in their own rational type (Fraction or gmpy2.mpq); anything
# else is converted to Fraction.

_RATIONAL = (Fraction,) if mpq is None else (Fraction, type(mpq(0)))


def _q(x):
    return x if isinstance(x, _RATIONAL) else Fraction(x)


def rref(rows):
    """Reduced row echelon form over Q. Returns (matrix, pivot columns)."""
    m = [[_q(x) for x in r] for r in rows]
    if not m:
        return m, []
    nrows, ncols = len(m), len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m, pivots


def exact_rank(rows) -> int:
    return len(rref(rows)[1])


def exact_nullspace(rows, ncols: int | None = None):
    """Basis of {x : A x = 0} over Q, one basis vector per free column."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    m, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -m[r][f]
        basis.append(v)
    return basis


def exact_matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b)))
             for j in range(len(b[0]))] for i in range(len(a))]


def exact_transpose(a):
    return [list(col) for col in zip(*a)] if a else []


def exact_inverse(a):
    n = len(a)
    one = _q(a[0][0]) * 0 + 1 if n else Fraction(1)
    aug = [[_q(x) for x in row] + [one * int(i == j) for j in range(n)]
           for i, row in enumerate(a)]
    m, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise np.linalg.LinAlgError("matrix is singular")
    return [row[n:] for row in m]


def exact_pinv(a):
    """Moore-Penrose pseudoinverse over Q via a full-rank factorization A = F G."""
    if not a or not a[0]:
        return [[Fraction(0)] * len(a) for _ in range(len(a[0]) if a else 0)]
    m, pivots = rref(a)
    if not pivots:
        zero = _q(a[0][0]) * 0
        return [[zero] * len(a) for _ in range(len(a[0]))]
    f = [[_q(row[c]) for c in pivots] for row in a]
    g = m[:len(pivots)]
    ft, gt = exact_transpose(f), exact_transpose(g)
    return exact_matmul(exact_matmul(gt, exact_inverse(exact_matmul(g, gt))),
                        exact_matmul(exact_inverse(exact_matmul(ft, f)), ft))


# -- numeric --------------------------------------------------------------

@dataclass(frozen=True)
class SpectralInfo:
    singular_values: np.ndarray
    threshold: float
    rank: int
    ambiguous: bool


def spectral_info(a: np.ndarray, rcond: float = RCOND) -> SpectralInfo:
    s = np.linalg.svd(a, compute_uv=False) if a.size else np.zeros(0)
    smax = s[0] if s.size else 0.0
    thr = rcond * smax
    rank = int(np.count_nonzero(s > thr)) if smax > 0 else 0
    ambiguous = bool(smax > 0 and np.any((s > thr / AMBIGUITY_FACTOR) & (s < thr * AMBIGUITY_FACTOR)))
    return SpectralInfo(s, thr, rank, ambiguous)


def skew_pinv(c: np.ndarray, rcond: float = RCOND) -> np.ndarray:
    """Pseudoinverse of an antisymmetric matrix, re-antisymmetrized."""
    if c.size == 0:
        return np.zeros_like(c, dtype=float)
    d = np.linalg.pinv(c, rcond=rcond)
    return 0.5 * (d - d.T)


def null_basis(a: np.ndarray, rcond: float = RCOND) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical null space of a square or wide matrix."""
    n = a.shape[1]
    if n == 0:
        return np.zeros((0, 0))
    if a.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(a)
    smax = s[0] if s.size else 0.0
    rank = int(np.count_nonzero(s > rcond * smax)) if smax > 0 else 0
    return vt[rank:].T.copy()
