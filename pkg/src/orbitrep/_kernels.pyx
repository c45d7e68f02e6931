# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled partial-map kernels; same contract as ``orbitrep._pykernels``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"

ctypedef cnp.int64_t i64
ctypedef cnp.uint8_t u8


cdef void _normalize(const i64[:] tgt, const u8[:] core, u8[:] rowc) noexcept nogil:
    cdef Py_ssize_t c, n = tgt.shape[0]
    for c in range(n):
        if core[c] and tgt[c] >= 0:
            rowc[tgt[c]] = 1


cdef void _inverse(const i64[:] tgt, const u8[:] core, i64[:] inv) noexcept nogil:
    cdef Py_ssize_t c, n = tgt.shape[0]
    for c in range(n):
        inv[c] = -1
    for c in range(n):
        if core[c] and tgt[c] >= 0:
            inv[tgt[c]] = c


def normalize(const i64[:] tgt, const u8[:] core, const u8[:] rowc):
    out = np.array(rowc, dtype=np.uint8)
    cdef u8[:] o = out
    _normalize(tgt, core, o)
    return out


def inverse(const i64[:] tgt, const u8[:] core):
    out = np.empty(tgt.shape[0], dtype=np.int64)
    cdef i64[:] o = out
    _inverse(tgt, core, o)
    return out


def compose(const i64[:] a_tgt, const u8[:] a_core, const u8[:] a_rowc,
            const i64[:] b_tgt, const u8[:] b_core, const u8[:] b_rowc):
    cdef Py_ssize_t c, k, n = b_tgt.shape[0]
    tgt = np.empty(n, dtype=np.int64)
    core = np.empty(n, dtype=np.uint8)
    rowc = np.empty(n, dtype=np.uint8)
    inv = np.empty(n, dtype=np.int64)
    cdef i64[:] t = tgt
    cdef u8[:] co = core
    cdef u8[:] ro = rowc
    cdef i64[:] ia = inv
    with nogil:
        for c in range(n):
            k = b_tgt[c]
            if not b_core[c]:
                co[c] = 0
                t[c] = -1
            elif k < 0:
                co[c] = 1
                t[c] = -1
            elif a_core[k]:
                co[c] = 1
                t[c] = a_tgt[k]
            else:
                co[c] = 0
                t[c] = -1
        _inverse(a_tgt, a_core, ia)
        for c in range(n):
            k = ia[c]
            ro[c] = 1 if (a_rowc[c] and (k < 0 or b_rowc[k])) else 0
        _normalize(t, co, ro)
    return tgt, core, rowc


def adjoint(const i64[:] tgt, const u8[:] core, const u8[:] rowc):
    cdef Py_ssize_t c, n = tgt.shape[0]
    new_core = np.array(rowc, dtype=np.uint8)
    inv = np.empty(n, dtype=np.int64)
    cdef u8[:] nc = new_core
    cdef i64[:] iv = inv
    with nogil:
        _normalize(tgt, core, nc)
        _inverse(tgt, core, iv)
        for c in range(n):
            if not nc[c]:
                iv[c] = -1
    return inv, new_core, np.array(core, dtype=np.uint8)


def compare(const i64[:] a_tgt, const u8[:] a_core, const i64[:] b_tgt, const u8[:] b_core):
    cdef Py_ssize_t c, n = a_tgt.shape[0]
    both = np.empty(n, dtype=np.bool_)
    bad = np.empty(n, dtype=np.bool_)
    cdef cnp.npy_bool[:] bo = both
    cdef cnp.npy_bool[:] ba = bad
    with nogil:
        for c in range(n):
            bo[c] = a_core[c] != 0 and b_core[c] != 0
            ba[c] = bo[c] and a_tgt[c] != b_tgt[c]
    return both, bad


def projection_defect(const i64[:] tgt, const u8[:] core):
    cdef Py_ssize_t c, n = tgt.shape[0]
    out = np.empty(n, dtype=np.bool_)
    cdef cnp.npy_bool[:] o = out
    with nogil:
        for c in range(n):
            o[c] = core[c] != 0 and tgt[c] >= 0 and tgt[c] != c
    return out
