"""Backend selection for the hot numeric kernels.

The Cython extension ``_ckernels`` is used when it was built; otherwise (or
when ``DIRACBRACKET_PURE=1``) the numpy fallback in ``_pykernels`` is used.
Extended-precision inputs always take the numpy path.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_c = None
if os.environ.get("DIRACBRACKET_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _c  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:  # extension not built
        _c = None


def _use_c(*arrays) -> bool:
    return _c is not None and all(a.dtype == np.float64 for a in arrays)


class PolyBatch:
    """A list of polynomials flattened for fast float evaluation."""

    def __init__(self, polys, nvars: int):
        exps, coeffs, owner = [], [], []
        for idx, p in enumerate(polys):
            for e, c in p.items():
                exps.append(e)
                coeffs.append(c)
                owner.append(idx)
        self.nvars = nvars
        self.nout = len(polys)
        self.exps = np.ascontiguousarray(np.array(exps, dtype=np.int64).reshape(-1, nvars))
        self.exact_coeffs = coeffs
        self.coeffs = np.array([float(c) for c in coeffs], dtype=np.float64)
        self.owner = np.array(owner, dtype=np.int64)

    def _coeffs_as(self, dtype):
        if dtype == np.float64:
            return self.coeffs
        t = np.dtype(dtype).type
        return np.array([t(c.numerator) / t(c.denominator) for c in self.exact_coeffs], dtype=dtype)

    def __call__(self, point) -> np.ndarray:
        point = np.asarray(point)
        if point.dtype.kind != "f":
            point = point.astype(np.float64)
        if point.shape != (self.nvars,):
            raise ValueError(f"point has shape {point.shape}, expected ({self.nvars},)")
        if _use_c(point):
            return _c.eval_batch(self.exps, self.coeffs, self.owner, self.nout,
                                 np.ascontiguousarray(point))
        return _pykernels.eval_batch(self.exps, self._coeffs_as(point.dtype), self.owner,
                                     self.nout, point)

    def many(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if _use_c(points):
            return _c.eval_batch_points(self.exps, self.coeffs, self.owner, self.nout,
                                        np.ascontiguousarray(points))
        return _pykernels.eval_batch_points(self.exps, self.coeffs, self.owner, self.nout, points)


def jacobiator_contract(J: np.ndarray, dJ: np.ndarray) -> np.ndarray:
    if _use_c(J, dJ):
        return _c.jacobiator_contract(np.ascontiguousarray(J), np.ascontiguousarray(dJ))
    return _pykernels.jacobiator_contract(J, dJ)
