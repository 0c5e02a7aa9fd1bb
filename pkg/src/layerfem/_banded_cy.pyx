# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled banded LU with partial pivoting.

Same storage and semantics as ``_banded_py``: A[i, c] is at
``i * (w - 1) + c + kl`` of a flat buffer, ``w = 2 kl + ku + 1``.
"""
from libc.math cimport fabs


def gbtrf(double[::1] data, Py_ssize_t n, Py_ssize_t kl, Py_ssize_t ku,
          long long[::1] ipiv):
    cdef Py_ssize_t w = 2 * kl + ku + 1
    cdef Py_ssize_t rs = w - 1
    cdef Py_ssize_t j, i, c, km, jp, r, ju = 0, info = 0
    cdef double amax, v, piv, l, tmp
    cdef double* A = &data[0] + kl
    cdef double* rowj
    cdef double* rowi
    with nogil:
        for j in range(n):
            km = kl if kl < n - 1 - j else n - 1 - j
            jp = 0
            amax = fabs(A[j * rs + j])
            for i in range(1, km + 1):
                v = fabs(A[(j + i) * rs + j])
                if v > amax:
                    amax = v
                    jp = i
            ipiv[j] = j + jp
            if amax == 0.0:
                if info == 0:
                    info = j + 1
                continue
            r = j + ku + jp
            if r > n - 1:
                r = n - 1
            if r > ju:
                ju = r
            rowj = A + j * rs
            if jp:
                rowi = A + (j + jp) * rs
                for c in range(j, ju + 1):
                    tmp = rowj[c]
                    rowj[c] = rowi[c]
                    rowi[c] = tmp
            piv = rowj[j]
            for i in range(j + 1, j + km + 1):
                rowi = A + i * rs
                l = rowi[j] / piv
                rowi[j] = l
                if l != 0.0:
                    for c in range(j + 1, ju + 1):
                        rowi[c] -= l * rowj[c]
    return info


def gbtrs(double[::1] data, Py_ssize_t n, Py_ssize_t kl, Py_ssize_t ku,
          long long[::1] ipiv, double[::1] b):
    cdef Py_ssize_t w = 2 * kl + ku + 1
    cdef Py_ssize_t rs = w - 1
    cdef Py_ssize_t j, i, c, km, r, hi, kuu = kl + ku
    cdef double tmp, s
    cdef double* A = &data[0] + kl
    cdef double* rowi
    with nogil:
        for j in range(n):
            r = ipiv[j]
            if r != j:
                tmp = b[j]
                b[j] = b[r]
                b[r] = tmp
            km = kl if kl < n - 1 - j else n - 1 - j
            tmp = b[j]
            if tmp != 0.0:
                for i in range(j + 1, j + km + 1):
                    b[i] -= A[i * rs + j] * tmp
        for i in range(n - 1, -1, -1):
            hi = i + kuu + 1
            if hi > n:
                hi = n
            rowi = A + i * rs
            s = b[i]
            for c in range(i + 1, hi):
                s -= rowi[c] * b[c]
            b[i] = s / rowi[i]
