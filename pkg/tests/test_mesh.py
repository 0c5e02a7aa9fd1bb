import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layerfem.mesh import (Mesh1D, MeshError, ShishkinMesh1D, build_mesh_1d, build_mesh_2d,
                           dump_mesh_csv, max_admissible_eps, transition_point)


def test_quarter_transition_example():
    N, sigma, beta = 4, 4.5, 1.0
    eps = 0.25 * beta / (sigma * math.log(N))
    m = build_mesh_1d(N, sigma, eps, beta)
    assert np.allclose(m.points, [0, 1 / 8, 1 / 4, 5 / 8, 1], atol=1e-15)


def test_transition_value():
    lam = transition_point(16, 4.5, 1e-6, 2.0)
    assert lam == pytest.approx(2.25e-6 * math.log(16))
    assert lam == pytest.approx(6.23832e-6, rel=1e-5)
    m = build_mesh_1d(16, 4.5, 1e-6, 2.0)
    assert m.points[8] == m.lam


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 64).map(lambda k: 2 * k),
       st.floats(1e-10, 1e-3), st.sampled_from([1.0, 2.0, 3.0]))
def test_two_width_structure(N, eps, beta):
    sigma = 4.5
    if eps > max_admissible_eps(N, sigma, beta):
        with pytest.raises(MeshError):
            build_mesh_1d(N, sigma, eps, beta)
        return
    m = build_mesh_1d(N, sigma, eps, beta)
    h = m.widths
    assert np.all(h > 0)
    assert np.allclose(h[: N // 2], 2 * m.lam / N, rtol=1e-9)
    assert np.allclose(h[N // 2:], 2 * (1 - m.lam) / N, rtol=1e-12)
    assert m.points[0] == 0.0 and m.points[-1] == 1.0


@pytest.mark.parametrize("N", [3, 2, 7])
def test_rejects_bad_N(N):
    with pytest.raises(MeshError):
        build_mesh_1d(N, 4.5, 1e-6, 2.0)


def test_inadmissible_eps_rejected_and_forced():
    with pytest.raises(MeshError):
        build_mesh_1d(8, 4.5, 0.5, 1.0)
    m = build_mesh_1d(8, 4.5, 0.5, 1.0, force=True)
    assert np.allclose(m.points, np.linspace(0, 1, 9))


def test_mesh1d_validation():
    with pytest.raises(MeshError):
        Mesh1D(np.array([0.0, 0.6, 0.5, 1.0]))
    m = Mesh1D(np.linspace(0, 1, 5))
    # ties resolve to the left cell
    assert list(m.locate([0.0, 0.25, 0.3, 1.0])) == [0, 0, 1, 3]


def test_regions_and_counts():
    m = build_mesh_2d(8, 4.5, 1e-6, 2.0, 3.0)
    assert m.n_cells == 64 and m.n_nodes == 81
    assert m.region(5, 5) == "11"
    assert m.region(1, 1) == "22"
    assert m.region(1, 8) == "12"  # x fine, y coarse
    assert m.region(8, 1) == "21"
    rmap = m.region_map()
    assert rmap.shape == (8, 8)
    total = sum(m.region_measure(r) for r in ("11", "12", "21", "22"))
    assert total == pytest.approx(1.0)
    assert isinstance(m.mesh_x, ShishkinMesh1D)


def test_dump_mesh_csv(tmp_path):
    m = build_mesh_2d(4, 4.5, 1e-6, 2.0, 3.0)
    path = tmp_path / "mesh.csv"
    dump_mesh_csv(m, path)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "index,x,y"
    assert len(rows) == 6
    assert float(rows[-1].split(",")[1]) == 1.0


@pytest.mark.parametrize("N", [4, 8, 16, 32, 64, 128])
def test_monotone_and_lambda_below_half(N):
    sigma, beta = 4.5, 2.0
    # at eps equal to the bound lambda is exactly 1/2 and the mesh is rejected
    with pytest.raises(MeshError):
        build_mesh_1d(N, sigma, max_admissible_eps(N, sigma, beta) * (1 + 1e-12), beta)
    for eps in (0.999 * max_admissible_eps(N, sigma, beta), 1e-4, 1e-8):
        m = build_mesh_1d(N, sigma, eps, beta)
        assert np.all(np.diff(m.points) > 0)
        assert m.lam <= 0.5
    m = build_mesh_1d(N, sigma, 0.5 * max_admissible_eps(N, sigma, beta), beta)
    assert m.lam < 0.5


def test_region_measure_symbolic():
    import sympy as sp
    lx, ly = sp.symbols("lambda_x lambda_y", positive=True)
    x, y = sp.symbols("x y")
    meas12 = sp.integrate(1, (x, 0, lx), (y, ly, 1))
    assert sp.simplify(meas12 - lx * (1 - ly)) == 0
    m = build_mesh_2d(16, 4.5, 1e-2, 2.0, 3.0)
    lam_x, lam_y = m.mesh_x.lam, m.mesh_y.lam
    val = float(meas12.subs({lx: lam_x, ly: lam_y}))
    assert m.region_measure("12") == pytest.approx(val, rel=1e-13)
    assert m.region_measure("21") == pytest.approx(lam_y * (1 - lam_x), rel=1e-13)
    assert m.region_measure("22") == pytest.approx(lam_x * lam_y, rel=1e-13)
