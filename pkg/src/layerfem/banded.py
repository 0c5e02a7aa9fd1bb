"""Non-symmetric banded matrices with an LU solver."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from . import kernels
from ._banded_py import band_view


class SingularMatrixError(ArithmeticError):
    def __init__(self, index: int, msg: str | None = None):
        self.index = index
        super().__init__(msg or f"zero pivot at row {index}")


class BandedMatrix:
    """n x n matrix with kl sub- and ku super-diagonals.

    Storage reserves kl extra super-diagonals for pivoting fill; see
    ``_banded_py`` for the layout. After :meth:`factorize` the buffer holds
    the LU factors and the matrix can no longer be modified.
    """

    def __init__(self, n: int, kl: int, ku: int):
        self.n, self.kl, self.ku = n, kl, ku
        self.width = 2 * kl + ku + 1
        self.data = np.zeros(n * self.width + kl)
        self.ipiv: np.ndarray | None = None
        self.backend = kernels.BACKEND

    @property
    def view(self) -> np.ndarray:
        """Dense-indexed strided view; only in-band entries are meaningful."""
        return band_view(self.data, self.n, self.kl, self.ku)

    @property
    def factorized(self) -> bool:
        return self.ipiv is not None

    def _flat(self, rows, cols):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        d = cols - rows
        if np.any(d > self.ku) or np.any(-d > self.kl):
            raise IndexError("entry outside the declared band")
        return rows * (self.width - 1) + cols + self.kl

    def add(self, rows, cols, vals) -> None:
        """Accumulate ``vals`` at (rows, cols); duplicates add up."""
        if self.factorized:
            raise RuntimeError("matrix already factorized")
        np.add.at(self.data, self._flat(rows, cols).ravel(), np.ravel(vals))

    def __getitem__(self, ij):
        i, j = ij
        if j - i > self.ku or i - j > self.kl:
            return 0.0
        return float(self.data[self._flat(i, j)])

    def __setitem__(self, ij, val):
        if self.factorized:
            raise RuntimeError("matrix already factorized")
        i, j = ij
        self.data[self._flat(i, j)] = val

    def row_band(self, i: int) -> tuple[int, int]:
        return max(0, i - self.kl), min(self.n, i + self.ku + 1)

    def zero_row(self, i: int) -> None:
        lo, hi = self.row_band(i)
        self.view[i, lo:hi] = 0.0

    def zero_col(self, j: int) -> None:
        lo, hi = max(0, j - self.ku), min(self.n, j + self.kl + 1)
        self.view[lo:hi, j] = 0.0

    @classmethod
    def from_dense(cls, A: np.ndarray, kl: int | None = None, ku: int | None = None):
        A = np.asarray(A, dtype=float)
        n = A.shape[0]
        nz = np.nonzero(A)
        if kl is None:
            kl = int(max(0, np.max(nz[0] - nz[1], initial=0)))
        if ku is None:
            ku = int(max(0, np.max(nz[1] - nz[0], initial=0)))
        M = cls(n, kl, ku)
        i, j = np.indices(A.shape)
        mask = (j - i <= ku) & (i - j <= kl)
        M.add(i[mask], j[mask], A[mask])
        return M

    def to_dense(self) -> np.ndarray:
        if self.factorized:
            raise RuntimeError("matrix already factorized")
        out = np.zeros((self.n, self.n))
        V = self.view
        for i in range(self.n):
            lo, hi = self.row_band(i)
            out[i, lo:hi] = V[i, lo:hi]
        return out

    def matvec(self, x: np.ndarray) -> np.ndarray:
        if self.factorized:
            raise RuntimeError("matrix already factorized")
        x = np.asarray(x, dtype=float)
        V = self.view
        out = np.empty(self.n)
        for i in range(self.n):
            lo, hi = self.row_band(i)
            out[i] = V[i, lo:hi] @ x[lo:hi]
        return out

    def factorize(self) -> None:
        gbtrf, _ = kernels.get_backend(self.backend)
        ipiv = np.zeros(self.n, dtype=np.int64)
        info = gbtrf(self.data, self.n, self.kl, self.ku, ipiv)
        if info:
            raise SingularMatrixError(info - 1)
        self.ipiv = ipiv

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solve A x = b, factorizing on first use."""
        if not self.factorized:
            self.factorize()
        _, gbtrs = kernels.get_backend(self.backend)
        x = np.array(b, dtype=float, copy=True)
        gbtrs(self.data, self.n, self.kl, self.ku, self.ipiv, x)
        return x

    def dump(self, path: str | Path) -> None:
        """Coordinate-format text dump of the stored band (1-based indices)."""
        if self.factorized:
            raise RuntimeError("matrix already factorized")
        V = self.view
        entries = []
        for i in range(self.n):
            lo, hi = self.row_band(i)
            for j in range(lo, hi):
                if V[i, j] != 0.0:
                    entries.append((i + 1, j + 1, V[i, j]))
        with open(path, "w") as fh:
            fh.write("%%MatrixMarket matrix coordinate real general\n")
            fh.write(f"% banded kl={self.kl} ku={self.ku}\n")
            fh.write(f"{self.n} {self.n} {len(entries)}\n")
            for i, j, v in entries:
                fh.write(f"{i} {j} {v:.17g}\n")
