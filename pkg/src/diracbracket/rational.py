"""Exact rational evaluation of polynomial lists and Jacobiator contraction.

Used by the finite-difference Jacobi check so that the only error left in
a difference quotient is the truncation error of the stencil.  Values are
``gmpy2.mpq`` when gmpy2 is installed, ``fractions.Fraction`` otherwise.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

try:
    from gmpy2 import mpq as _mpq
except ImportError:  # pragma: no cover
    _mpq = None


def rational(x):
    """Exact rational value of an int, float, Fraction or mpq."""
    if _mpq is not None:
        if isinstance(x, Fraction):
            return _mpq(x.numerator, x.denominator)
        return _mpq(float(x)) if isinstance(x, (float, np.floating)) else _mpq(x)
    return Fraction(float(x)) if isinstance(x, (float, np.floating)) else Fraction(x)


def rational_point(z):
    return tuple(rational(x) for x in np.asarray(z, dtype=object).ravel())


class RationalBatch:
    """A list of polynomials evaluated exactly at rational points."""

    def __init__(self, polys):
        self.polys = [[(e, rational(c)) for e, c in p.items()] for p in polys]

    def __call__(self, z) -> list:
        zero = rational(0)
        out = []
        for terms in self.polys:
            s = zero
            for exps, c in terms:
                m = c
                for x, k in zip(z, exps):
                    if k:
                        m = m * x ** k if k > 1 else m * x
                s += m
            out.append(s)
        return out


def matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))]
            for i in range(len(a))]


def jacobiator_exact(J, dJ) -> np.ndarray:
    """T_ijk = sum_l J_il dJ[l][j][k] + cyclic, exactly; returned as floats."""
    n = len(J)
    T = np.zeros((n, n, n))
    rng = range(n)
    for i in rng:
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                s = sum(J[i][l] * dJ[l][j][k] + J[j][l] * dJ[l][k][i] + J[k][l] * dJ[l][i][j]
                        for l in rng)
                v = float(s)
                T[i, j, k] = T[j, k, i] = T[k, i, j] = v
                T[j, i, k] = T[i, k, j] = T[k, j, i] = -v
    return T
