# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: batched polynomial evaluation and the Jacobiator contraction."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _monomial(const long long[:, ::1] exps, Py_ssize_t t,
                             const double[::1] point) nogil:
    cdef Py_ssize_t i, e
    cdef Py_ssize_t n = exps.shape[1]
    cdef double m = 1.0
    cdef double x
    for i in range(n):
        e = exps[t, i]
        if e:
            x = point[i]
            while e:
                m *= x
                e -= 1
    return m


def eval_batch(const long long[:, ::1] exps, const double[::1] coeffs,
               const long long[::1] owner, Py_ssize_t nout,
               const double[::1] point):
    out = np.zeros(nout, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t t
    with nogil:
        for t in range(exps.shape[0]):
            o[owner[t]] += coeffs[t] * _monomial(exps, t, point)
    return out


def eval_batch_points(const long long[:, ::1] exps, const double[::1] coeffs,
                      const long long[::1] owner, Py_ssize_t nout,
                      const double[:, ::1] points):
    cdef Py_ssize_t npts = points.shape[0]
    out = np.zeros((npts, nout), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t p, t
    with nogil:
        for p in range(npts):
            for t in range(exps.shape[0]):
                o[p, owner[t]] += coeffs[t] * _monomial(exps, t, points[p])
    return out


def jacobiator_contract(const double[:, ::1] J, const double[:, :, ::1] dJ):
    """T[i,j,k] = sum_l J[i,l] dJ[l,j,k] + J[j,l] dJ[l,k,i] + J[k,l] dJ[l,i,j].

    Only i<j<k is computed; the rest is filled by total antisymmetry.
    """
    cdef Py_ssize_t n = J.shape[0]
    out = np.zeros((n, n, n), dtype=np.float64)
    cdef double[:, :, ::1] T = out
    cdef Py_ssize_t i, j, k, l
    cdef double s
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    s = 0.0
                    for l in range(n):
                        s += J[i, l] * dJ[l, j, k] + J[j, l] * dJ[l, k, i] + J[k, l] * dJ[l, i, j]
                    T[i, j, k] = s
                    T[j, k, i] = s
                    T[k, i, j] = s
                    T[j, i, k] = -s
                    T[i, k, j] = -s
                    T[k, j, i] = -s
    return out
