# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Same contracts as ``_numpy``; the two-form basis is imported from there so
both backends share one convention.  Loops run without the GIL, so
chunk-level thread pools parallelize cleanly.
"""

import numpy as np

from ._numpy import OMEGA as _OMEGA_ARR

BACKEND_NAME = "cython"

# sparse form of the two-form basis: each basis element has 4 nonzero entries
_nz = [np.nonzero(_OMEGA_ARR[a]) for a in range(6)]
_OI = np.ascontiguousarray(np.stack([idx[0] for idx in _nz]).astype(np.int64))
_OJ = np.ascontiguousarray(np.stack([idx[1] for idx in _nz]).astype(np.int64))
_OV = np.ascontiguousarray(np.stack([_OMEGA_ARR[a][_nz[a]] for a in range(6)]))

cdef long[:, ::1] OI = _OI
cdef long[:, ::1] OJ = _OJ
cdef double[:, ::1] OV = _OV


def rm_to_op(rm):
    rm = np.ascontiguousarray(rm, dtype=np.float64)
    cdef double[:, :, :, :, ::1] r = rm
    cdef Py_ssize_t n = r.shape[0]
    out = np.zeros((n, 6, 6))
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t s, a, b, p, q
    cdef double acc
    with nogil:
        for s in range(n):
            for a in range(6):
                for b in range(6):
                    acc = 0.0
                    for p in range(4):
                        for q in range(4):
                            acc += OV[a, p] * OV[b, q] * r[s, OI[a, p], OJ[a, p],
                                                           OI[b, q], OJ[b, q]]
                    o[s, a, b] = 0.25 * acc
    return out


def op_to_rm(op):
    op = np.ascontiguousarray(op, dtype=np.float64)
    cdef double[:, :, ::1] o = op
    cdef Py_ssize_t n = o.shape[0]
    out = np.zeros((n, 4, 4, 4, 4))
    cdef double[:, :, :, :, ::1] r = out
    cdef Py_ssize_t s, a, b, p, q
    cdef double val
    with nogil:
        for s in range(n):
            for a in range(6):
                for b in range(6):
                    val = o[s, a, b]
                    if val == 0.0:
                        continue
                    for p in range(4):
                        for q in range(4):
                            r[s, OI[a, p], OJ[a, p], OI[b, q], OJ[b, q]] += \
                                val * OV[a, p] * OV[b, q]
    return out


def wee(w4, e):
    w4 = np.ascontiguousarray(w4, dtype=np.float64)
    e = np.ascontiguousarray(e, dtype=np.float64)
    cdef double[:, :, :, :, ::1] w = w4
    cdef double[:, :, ::1] em = e
    cdef Py_ssize_t n = w.shape[0]
    out = np.zeros(n)
    cdef double[::1] o = out
    cdef Py_ssize_t s, i, j, k, l
    cdef double acc
    with nogil:
        for s in range(n):
            acc = 0.0
            for i in range(4):
                for j in range(4):
                    for k in range(4):
                        for l in range(4):
                            acc += w[s, i, j, k, l] * em[s, i, k] * em[s, j, l]
            o[s] = acc
    return out


def frame_transform(rm, f):
    rm = np.ascontiguousarray(rm, dtype=np.float64)
    f = np.ascontiguousarray(f, dtype=np.float64)
    cdef double[:, :, :, :, ::1] r = rm
    cdef double[:, :, ::1] fm = f
    cdef Py_ssize_t n = r.shape[0]
    out = np.zeros((n, 4, 4, 4, 4))
    cdef double[:, :, :, :, ::1] o = out
    cdef double t1[4][4][4][4]
    cdef double t2[4][4][4][4]
    cdef Py_ssize_t s, i, j, k, a, b, c, d, l
    cdef double acc
    with nogil:
        for s in range(n):
            for i in range(4):
                for j in range(4):
                    for k in range(4):
                        for d in range(4):
                            acc = 0.0
                            for l in range(4):
                                acc += r[s, i, j, k, l] * fm[s, l, d]
                            t1[i][j][k][d] = acc
            for i in range(4):
                for j in range(4):
                    for c in range(4):
                        for d in range(4):
                            acc = 0.0
                            for k in range(4):
                                acc += t1[i][j][k][d] * fm[s, k, c]
                            t2[i][j][c][d] = acc
            for i in range(4):
                for b in range(4):
                    for c in range(4):
                        for d in range(4):
                            acc = 0.0
                            for j in range(4):
                                acc += t2[i][j][c][d] * fm[s, j, b]
                            t1[i][b][c][d] = acc
            for a in range(4):
                for b in range(4):
                    for c in range(4):
                        for d in range(4):
                            acc = 0.0
                            for i in range(4):
                                acc += t1[i][b][c][d] * fm[s, i, a]
                            o[s, a, b, c, d] = acc
    return out


def riemann_from_derivs(g, ginv, dg, d2g):
    g = np.ascontiguousarray(g, dtype=np.float64)
    ginv = np.ascontiguousarray(ginv, dtype=np.float64)
    dg = np.ascontiguousarray(dg, dtype=np.float64)
    d2g = np.ascontiguousarray(d2g, dtype=np.float64)
    cdef double[:, :, ::1] gm = g
    cdef double[:, :, ::1] gi = ginv
    cdef double[:, :, :, ::1] dgm = dg
    cdef double[:, :, :, :, ::1] d2gm = d2g
    cdef Py_ssize_t n = gm.shape[0]
    out = np.zeros((n, 4, 4, 4, 4))
    cdef double[:, :, :, :, ::1] o = out
    cdef double gl[4][4][4]
    cdef double gamma[4][4][4]
    cdef double dgi[4][4][4]
    cdef double dgl[4][4][4][4]
    cdef double dgamma[4][4][4][4]
    cdef double rup[4][4][4][4]
    cdef Py_ssize_t s, i, j, k, l, m, a, b
    cdef double acc
    with nogil:
        for s in range(n):
            for m in range(4):
                for i in range(4):
                    for j in range(4):
                        gl[m][i][j] = 0.5 * (dgm[s, i, m, j] + dgm[s, j, m, i]
                                             - dgm[s, m, i, j])
            for l in range(4):
                for i in range(4):
                    for j in range(4):
                        acc = 0.0
                        for m in range(4):
                            acc += gi[s, l, m] * gl[m][i][j]
                        gamma[l][i][j] = acc
            # d_k g^{lm} = -g^{la} (d_k g_{ab}) g^{bm}
            for k in range(4):
                for l in range(4):
                    for m in range(4):
                        acc = 0.0
                        for a in range(4):
                            for b in range(4):
                                acc += gi[s, l, a] * dgm[s, k, a, b] * gi[s, b, m]
                        dgi[k][l][m] = -acc
            for k in range(4):
                for m in range(4):
                    for i in range(4):
                        for j in range(4):
                            dgl[k][m][i][j] = 0.5 * (d2gm[s, k, i, m, j]
                                                     + d2gm[s, k, j, m, i]
                                                     - d2gm[s, k, m, i, j])
            for k in range(4):
                for l in range(4):
                    for i in range(4):
                        for j in range(4):
                            acc = 0.0
                            for m in range(4):
                                acc += dgi[k][l][m] * gl[m][i][j] \
                                       + gi[s, l, m] * dgl[k][m][i][j]
                            dgamma[k][l][i][j] = acc
            # R^l_{kij} = d_i G^l_{jk} - d_j G^l_{ik} + G^l_{ia} G^a_{jk} - G^l_{ja} G^a_{ik}
            for l in range(4):
                for k in range(4):
                    for i in range(4):
                        for j in range(4):
                            acc = dgamma[i][l][j][k] - dgamma[j][l][i][k]
                            for a in range(4):
                                acc += gamma[l][i][a] * gamma[a][j][k] \
                                       - gamma[l][j][a] * gamma[a][i][k]
                            rup[l][k][i][j] = acc
            # lower the first index, reorder, flip sign (sphere-positive)
            for i in range(4):
                for j in range(4):
                    for k in range(4):
                        for l in range(4):
                            acc = 0.0
                            for m in range(4):
                                acc += gm[s, l, m] * rup[m][k][i][j]
                            o[s, i, j, k, l] = -acc
    return out
