import random
from fractions import Fraction

import numpy as np
import pytest
import sympy

from diracbracket.linalg import (exact_inverse, exact_matmul, exact_nullspace, exact_pinv,
                                 exact_rank, null_basis, rref, skew_pinv, spectral_info)


def _rand_matrix(rng, rows, cols, rank=None):
    if rank == 0:
        return [[Fraction(0)] * cols for _ in range(rows)]
    if rank is None:
        return [[Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(cols)]
                for _ in range(rows)]
    left = _rand_matrix(rng, rows, rank)
    right = _rand_matrix(rng, rank, cols)
    return exact_matmul(left, right)


def _sym(m):
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in m])


@pytest.mark.parametrize("seed", range(8))
def test_rref_and_rank_match_sympy(seed):
    rng = random.Random(seed)
    m = _rand_matrix(rng, 4, 5, rank=rng.randint(0, 4))
    ref, pivots = rref(m)
    sref, spiv = _sym(m).rref()
    assert tuple(pivots) == spiv
    assert _sym(ref) == sref
    assert exact_rank(m) == _sym(m).rank()


@pytest.mark.parametrize("seed", range(8))
def test_nullspace_is_a_basis(seed):
    rng = random.Random(seed)
    m = _rand_matrix(rng, 3, 5, rank=rng.randint(1, 3))
    basis = exact_nullspace(m)
    assert len(basis) == 5 - exact_rank(m)
    for v in basis:
        assert all(row[0] == 0 for row in exact_matmul(m, [[x] for x in v]))
    assert (len(basis) == 0) or exact_rank(basis) == len(basis)


@pytest.mark.parametrize("seed", range(8))
def test_pinv_matches_sympy(seed):
    rng = random.Random(seed)
    m = _rand_matrix(rng, 4, 3, rank=rng.randint(0, 3))
    assert _sym(exact_pinv(m)) == _sym(m).pinv()


def test_pinv_of_skew_rank_two():
    C = [[0, -3, 2], [3, 0, -1], [-2, 1, 0]]  # -[z]x at z = (1, 2, 3)
    D = exact_pinv(C)
    assert all(D[i][j] == -D[j][i] for i in range(3) for j in range(3))
    CDC = exact_matmul(exact_matmul(C, D), C)
    assert CDC == [[Fraction(x) for x in r] for r in C]


def test_inverse_and_singular():
    a = [[2, 1], [1, 1]]
    assert exact_matmul(a, exact_inverse(a)) == [[1, 0], [0, 1]]
    with pytest.raises(np.linalg.LinAlgError):
        exact_inverse([[1, 2], [2, 4]])


def test_gmpy_entries_pass_through():
    gmpy2 = pytest.importorskip("gmpy2")
    a = [[gmpy2.mpq(0), gmpy2.mpq(1, 3)], [gmpy2.mpq(-1, 3), gmpy2.mpq(0)]]
    d = exact_pinv(a)
    assert d[0][1] == -3 and d[1][0] == 3


def test_spectral_info_rank_and_ambiguity():
    info = spectral_info(np.diag([1.0, 1e-3, 0.0]))
    assert info.rank == 2 and not info.ambiguous
    info = spectral_info(np.diag([1.0, 1e-10]))  # right at the threshold
    assert info.ambiguous


def test_skew_pinv_and_null_basis():
    C = np.array([[0.0, -3, 2], [3, 0, -1], [-2, 1, 0]])
    D = skew_pinv(C)
    np.testing.assert_allclose(D, -D.T)
    np.testing.assert_allclose(C @ D @ C, C, atol=1e-12)
    k = null_basis(C)
    assert k.shape == (3, 1)
    np.testing.assert_allclose(np.abs(k[:, 0]), np.array([1, 2, 3]) / np.sqrt(14))
