"""Pure numpy versions of the compiled kernels (same signatures)."""
import numpy as np


def eval_batch(exps, coeffs, owner, nout, point):
    point = np.asarray(point)
    mono = np.prod(point[None, :] ** exps, axis=1) if exps.shape[0] else np.zeros(0, point.dtype)
    out = np.zeros(nout, dtype=np.result_type(point.dtype, np.float64))
    np.add.at(out, owner, coeffs.astype(out.dtype) * mono)
    return out


def eval_batch_points(exps, coeffs, owner, nout, points):
    points = np.asarray(points)
    mono = np.prod(points[:, None, :] ** exps[None, :, :], axis=2)
    out = np.zeros((points.shape[0], nout), dtype=np.result_type(points.dtype, np.float64))
    np.add.at(out.T, owner, (coeffs.astype(out.dtype)[None, :] * mono).T)
    return out


def jacobiator_contract(J, dJ):
    """T[i,j,k] = sum_l J[i,l] dJ[l,j,k] + cyclic, totally antisymmetrized from i<j<k."""
    n = J.shape[0]
    a = np.einsum("il,ljk->ijk", J, dJ)
    full = a + a.transpose(1, 2, 0) + a.transpose(2, 0, 1)
    out = np.zeros_like(full)
    i, j, k = np.array([(i, j, k) for i in range(n) for j in range(i + 1, n)
                        for k in range(j + 1, n)], dtype=int).reshape(-1, 3).T
    s = full[i, j, k]
    for (a_, b_, c_), sign in (((i, j, k), 1), ((j, k, i), 1), ((k, i, j), 1),
                               ((j, i, k), -1), ((i, k, j), -1), ((k, j, i), -1)):
        out[a_, b_, c_] = sign * s
    return out
