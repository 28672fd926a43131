# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled accumulation kernel.

Mirrors ``_kernels_py`` exactly: plain ``+=`` for cluster and cell weights
(in universe order, so equal partitions cancel bit-for-bit) and compensated
(Neumaier) summation for the final metric sums. Contingency cells live in
C++ hash maps keyed by packed 64-bit codes.
"""

from libc.math cimport fabs
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector

import numpy as np

ctypedef long long i64

BACKEND_NAME = "compiled"


cdef struct Acc:
    double s
    double c


cdef inline void kadd(Acc* a, double y) nogil:
    cdef double t = a.s + y
    if fabs(a.s) >= fabs(y):
        a.c += (a.s - t) + y
    else:
        a.c += (y - t) + a.s
    a.s = t


cdef inline double kval(Acc* a) nogil:
    return a.s + a.c


cdef inline i64 slot_of(unordered_map[i64, i64]& m, vector[double]& cells,
                        i64 key, double wk) nogil:
    # Slots are stored 1-based so operator[]'s default 0 means "absent".
    cdef i64 slot1 = m[key]
    if slot1 == 0:
        cells.push_back(0.0)
        slot1 = <i64>cells.size()
        m[key] = slot1
    cells[slot1 - 1] += wk
    return slot1 - 1


def impact_sums(b, e, w, Py_ssize_t nb, Py_ssize_t ne):
    """Sums of weighted pointwise (jd, split, merge) plus total weight."""
    cdef i64[::1] bv = np.ascontiguousarray(b, dtype=np.int64)
    cdef i64[::1] ev = np.ascontiguousarray(e, dtype=np.int64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = wv.shape[0]
    if bv.shape[0] != n or ev.shape[0] != n:
        raise ValueError("code and weight arrays must have equal length")
    if nb > (<i64>1 << 31) or ne > (<i64>1 << 31) or n > (<i64>1 << 31):
        raise ValueError("input too large for packed cell keys")

    cdef vector[double] wb = vector[double](nb, 0.0)
    cdef vector[double] we = vector[double](ne, 0.0)
    cdef unordered_map[i64, i64] mbe
    cdef vector[double] cbe
    cdef vector[i64] sbe = vector[i64](n)
    cdef Py_ssize_t k
    cdef i64 bk, ek
    cdef double wk, wbb, wee, ibe, bs, es, diff
    cdef Acc a0, a1, a2, a3
    a0.s = 0.0
    a0.c = 0.0
    a1.s = 0.0
    a1.c = 0.0
    a2.s = 0.0
    a2.c = 0.0
    a3.s = 0.0
    a3.c = 0.0

    with nogil:
        mbe.reserve(<size_t>(n if n > 16 else 16))
        for k in range(n):
            bk = bv[k]
            ek = ev[k]
            wk = wv[k]
            wb[bk] += wk
            we[ek] += wk
            sbe[k] = slot_of(mbe, cbe, (bk << 32) | ek, wk)
        for k in range(n):
            wk = wv[k]
            wbb = wb[bv[k]]
            wee = we[ev[k]]
            ibe = cbe[sbe[k]]
            bs = wbb - ibe
            es = wee - ibe
            diff = bs + es
            kadd(&a0, wk * (diff / (diff + ibe)))
            kadd(&a1, wk * (bs / wbb))
            kadd(&a2, wk * (es / wee))
            kadd(&a3, wk)
    return (kval(&a0), kval(&a1), kval(&a2), kval(&a3))


def full_sums(b, e, i, w, Py_ssize_t nb, Py_ssize_t ne, Py_ssize_t ni):
    """Sums for the full quality report; see _kernels_py.full_sums."""
    cdef i64[::1] bv = np.ascontiguousarray(b, dtype=np.int64)
    cdef i64[::1] ev = np.ascontiguousarray(e, dtype=np.int64)
    cdef i64[::1] iv = np.ascontiguousarray(i, dtype=np.int64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = wv.shape[0]
    if bv.shape[0] != n or ev.shape[0] != n or iv.shape[0] != n:
        raise ValueError("code and weight arrays must have equal length")
    if (nb > (<i64>1 << 31) or ne > (<i64>1 << 31) or ni > (<i64>1 << 31)
            or n > (<i64>1 << 31)):
        raise ValueError("input too large for packed cell keys")

    cdef vector[double] wb = vector[double](nb, 0.0)
    cdef vector[double] we = vector[double](ne, 0.0)
    cdef vector[double] wi = vector[double](ni, 0.0)
    cdef unordered_map[i64, i64] mbe, mbi, mei, m3
    cdef vector[double] cbe, cbi, cei, c3
    cdef vector[i64] sbe = vector[i64](n)
    cdef vector[i64] sbi = vector[i64](n)
    cdef vector[i64] sei = vector[i64](n)
    cdef vector[i64] s3 = vector[i64](n)
    cdef Py_ssize_t k
    cdef i64 bk, ek, ik
    cdef double wk, wbb, wee, wii, ibe, ibi, iei, i3
    cdef double bs, es, bad_split_w, good_merge_w, diff, diff_bi, diff_ei
    cdef Acc acc[12]
    for k in range(12):
        acc[k].s = 0.0
        acc[k].c = 0.0

    with nogil:
        mbe.reserve(<size_t>(n if n > 16 else 16))
        mbi.reserve(<size_t>(n if n > 16 else 16))
        mei.reserve(<size_t>(n if n > 16 else 16))
        m3.reserve(<size_t>(n if n > 16 else 16))
        for k in range(n):
            bk = bv[k]
            ek = ev[k]
            ik = iv[k]
            wk = wv[k]
            wb[bk] += wk
            we[ek] += wk
            wi[ik] += wk
            sbe[k] = slot_of(mbe, cbe, (bk << 32) | ek, wk)
            sbi[k] = slot_of(mbi, cbi, (bk << 32) | ik, wk)
            sei[k] = slot_of(mei, cei, (ek << 32) | ik, wk)
            s3[k] = slot_of(m3, c3, (sbe[k] << 32) | ik, wk)
        for k in range(n):
            wk = wv[k]
            wbb = wb[bv[k]]
            wee = we[ev[k]]
            wii = wi[iv[k]]
            ibe = cbe[sbe[k]]
            ibi = cbi[sbi[k]]
            iei = cei[sei[k]]
            i3 = c3[s3[k]]
            bs = wbb - ibe
            es = wee - ibe
            diff = bs + es
            bad_split_w = ibi - i3
            good_merge_w = iei - i3
            kadd(&acc[0], wk * (diff / (diff + ibe)))
            kadd(&acc[1], wk * (bs / wbb))
            kadd(&acc[2], wk * (es / wee))
            kadd(&acc[3], wk * ((bs - bad_split_w) / wbb))
            kadd(&acc[4], wk * (bad_split_w / wbb))
            kadd(&acc[5], wk * (good_merge_w / wee))
            kadd(&acc[6], wk * ((es - good_merge_w) / wee))
            kadd(&acc[7], wk * (iei / wee - ibi / wbb))
            kadd(&acc[8], wk * ((iei - ibi) / wii))
            diff_bi = (wbb - ibi) + (wii - ibi)
            kadd(&acc[9], wk * (diff_bi / (diff_bi + ibi)))
            diff_ei = (wee - iei) + (wii - iei)
            kadd(&acc[10], wk * (diff_ei / (diff_ei + iei)))
            kadd(&acc[11], wk)
    return (
        kval(&acc[0]), kval(&acc[1]), kval(&acc[2]), kval(&acc[3]),
        kval(&acc[4]), kval(&acc[5]), kval(&acc[6]), kval(&acc[7]),
        kval(&acc[8]), kval(&acc[9]), kval(&acc[10]), kval(&acc[11]),
    )
