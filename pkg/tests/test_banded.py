import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layerfem.banded import BandedMatrix, SingularMatrixError


def _random_banded(rng, n, kl, ku, dominant=True):
    A = np.zeros((n, n))
    for i in range(n):
        lo, hi = max(0, i - kl), min(n, i + ku + 1)
        A[i, lo:hi] = rng.standard_normal(hi - lo)
        if dominant:
            A[i, i] += 2.0 * (kl + ku + 1)
    return A


def _with_backend(M, backend):
    M.backend = backend
    return M


def test_tridiagonal_poisson(backend):
    A = np.array([[2.0, -1, 0], [-1, 2, -1], [0, -1, 2]])
    M = _with_backend(BandedMatrix.from_dense(A), backend)
    assert (M.kl, M.ku) == (1, 1)
    assert np.allclose(M.solve(np.ones(3)), [1.5, 2.0, 1.5], atol=1e-15)


def test_identity_solve(backend):
    M = _with_backend(BandedMatrix.from_dense(np.eye(5)), backend)
    b = np.arange(5.0)
    assert np.array_equal(M.solve(b), b)


@pytest.mark.parametrize("n,kl,ku", [(10, 2, 3), (60, 5, 5), (200, 7, 4), (200, 20, 20)])
def test_matches_dense_solve(backend, rng, n, kl, ku):
    A = _random_banded(rng, n, kl, ku)
    b = rng.standard_normal(n)
    M = _with_backend(BandedMatrix.from_dense(A, kl, ku), backend)
    x = M.solve(b)
    ref = np.linalg.solve(A, b)
    assert np.max(np.abs(x - ref)) / np.max(np.abs(ref)) < 1e-11


def test_pivoting_needed(backend):
    # zero leading pivot forces a row swap
    A = np.array([[0.0, 1, 0], [1, 0, 1], [0, 1, 1]])
    M = _with_backend(BandedMatrix.from_dense(A, 1, 1), backend)
    b = np.array([1.0, 2, 3])
    assert np.allclose(M.solve(b), np.linalg.solve(A, b), atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.integers(0, 6), st.integers(0, 6), st.integers(0, 2**31))
def test_random_nonsymmetric_backends_agree(n, kl, ku, seed):
    rng = np.random.default_rng(seed)
    A = _random_banded(rng, n, kl, ku, dominant=False) + 3 * np.eye(n)
    if abs(np.linalg.det(A)) < 1e-8 or np.linalg.cond(A) > 1e8:
        return
    b = rng.standard_normal(n)
    ref = np.linalg.solve(A, b)
    for name in ("python", "cython"):
        M = BandedMatrix.from_dense(A, kl, ku)
        M.backend = name
        try:
            x = M.solve(b)
        except ImportError:
            continue
        assert np.allclose(x, ref, rtol=1e-8, atol=1e-9 * np.max(np.abs(ref)))


def test_singular_reports_index(backend):
    A = np.array([[1.0, 1, 0], [1, 1, 0], [0, 0, 1]])
    M = _with_backend(BandedMatrix.from_dense(A, 1, 1), backend)
    with pytest.raises(SingularMatrixError) as info:
        M.factorize()
    assert info.value.index == 1


def test_band_access_and_dense_round_trip(rng):
    A = _random_banded(rng, 12, 2, 3)
    M = BandedMatrix.from_dense(A, 2, 3)
    assert np.array_equal(M.to_dense(), A)
    assert np.allclose(M.matvec(np.ones(12)), A.sum(axis=1))
    assert M[0, 11] == 0.0
    with pytest.raises(IndexError):
        M.add([0], [11], [1.0])
    M.zero_row(4)
    M.zero_col(4)
    D = M.to_dense()
    assert not D[4].any() and not D[:, 4].any()


def test_add_accumulates():
    M = BandedMatrix(4, 1, 1)
    M.add([1, 1, 1], [2, 2, 1], [1.0, 2.0, 5.0])
    assert M[1, 2] == 3.0 and M[1, 1] == 5.0


def test_frozen_after_factorize():
    M = BandedMatrix.from_dense(np.eye(3))
    M.factorize()
    with pytest.raises(RuntimeError):
        M[0, 0] = 2.0
    with pytest.raises(RuntimeError):
        M.to_dense()


def test_matrix_market_dump(tmp_path):
    A = np.array([[2.0, -1, 0], [-1, 2, -1], [0, -1, 2]])
    path = tmp_path / "a.mtx"
    BandedMatrix.from_dense(A).dump(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("%%MatrixMarket matrix coordinate real general")
    assert lines[2] == "3 3 7"
    entries = {(int(a), int(b)): float(c) for a, b, c in (ln.split() for ln in lines[3:])}
    assert entries[(1, 1)] == 2.0 and entries[(3, 2)] == -1.0


def test_pure_python_fallback_selected_by_env():
    import os
    import subprocess
    import sys
    env = dict(os.environ, LAYERFEM_PURE_PYTHON="1")
    res = subprocess.run([sys.executable, "-c", "import layerfem; print(layerfem.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert res.stdout.strip() == "python"
