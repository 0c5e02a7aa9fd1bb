"""Pure numpy banded LU with partial pivoting (fallback backend).

Storage: a flat float64 buffer in which A[i, c] lives at
``i * (w - 1) + c + kl`` with ``w = 2 kl + ku + 1``. Every row occupies its
own window of length w, covering columns i - kl .. i + kl + ku, which is
wide enough for the fill produced by row interchanges. A strided (n, n)
view therefore indexes the band like a dense matrix.
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import as_strided


def band_view(data: np.ndarray, n: int, kl: int, ku: int) -> np.ndarray:
    w = 2 * kl + ku + 1
    step = data.itemsize
    return as_strided(data[kl:], shape=(n, n), strides=((w - 1) * step, step),
                      writeable=True)


def gbtrf(data: np.ndarray, n: int, kl: int, ku: int, ipiv: np.ndarray) -> int:
    """In-place LU; returns 0 or 1 + index of the first zero pivot."""
    A = band_view(data, n, kl, ku)
    ju = 0
    info = 0
    for j in range(n):
        km = min(kl, n - 1 - j)
        col = A[j:j + km + 1, j]
        jp = int(np.argmax(np.abs(col)))
        ipiv[j] = j + jp
        if col[jp] == 0.0:
            if info == 0:
                info = j + 1
            continue
        ju = max(ju, min(j + ku + jp, n - 1))
        if jp:
            r = j + jp
            tmp = A[j, j:ju + 1].copy()
            A[j, j:ju + 1] = A[r, j:ju + 1]
            A[r, j:ju + 1] = tmp
        if km:
            A[j + 1:j + km + 1, j] /= A[j, j]
            if ju > j:
                A[j + 1:j + km + 1, j + 1:ju + 1] -= np.multiply.outer(
                    A[j + 1:j + km + 1, j], A[j, j + 1:ju + 1])
    return info


def gbtrs(data: np.ndarray, n: int, kl: int, ku: int, ipiv: np.ndarray,
          b: np.ndarray) -> None:
    """Solve in place using the factors from :func:`gbtrf`."""
    A = band_view(data, n, kl, ku)
    for j in range(n):
        r = ipiv[j]
        if r != j:
            b[j], b[r] = b[r], b[j]
        km = min(kl, n - 1 - j)
        if km:
            b[j + 1:j + km + 1] -= A[j + 1:j + km + 1, j] * b[j]
    kuu = kl + ku
    for i in range(n - 1, -1, -1):
        hi = min(n, i + kuu + 1)
        s = b[i] - np.dot(A[i, i + 1:hi], b[i + 1:hi])
        b[i] = s / A[i, i]
