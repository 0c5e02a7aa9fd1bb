"""Compare the compiled and numpy banded LU kernels on Galerkin matrices.

    python3 benchmarks/bench_kernels.py [--N 8 16 32] [--p 3] [--repeat 3]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from layerfem import galerkin, kernels
from layerfem.femspace import FeSpace
from layerfem.mesh import build_mesh_2d
from layerfem.problem import make_manufactured_problem


def time_solve(system, backend: str, repeat: int) -> tuple[float, np.ndarray]:
    data0 = system.matrix.data.copy()
    best, x = np.inf, None
    for _ in range(repeat):
        M = system.matrix
        M.data, M.ipiv, M.backend = data0.copy(), None, backend
        t0 = time.perf_counter()
        x = M.solve(system.rhs)
        best = min(best, time.perf_counter() - t0)
    system.matrix.data, system.matrix.ipiv = data0, None
    return best, x


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, nargs="+", default=[8, 16, 32])
    ap.add_argument("--p", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["python"]
    try:
        kernels.get_backend("cython")
        backends.insert(0, "cython")
    except ImportError:
        print("compiled kernel not available; timing the numpy fallback only")
    eps = 1e-6
    prob = make_manufactured_problem(eps, args.p)
    print(f"{'N':>4} {'unknowns':>9} {'band':>5} " + " ".join(f"{b + ' [s]':>12}" for b in backends)
          + ("  speedup  max|dx|" if len(backends) == 2 else ""))
    for N in args.N:
        space = FeSpace(build_mesh_2d(N, args.p + 1.5, eps, 2.0, 3.0), args.p)
        system = galerkin.assemble(space, prob)
        res = {b: time_solve(system, b, args.repeat) for b in backends}
        line = f"{N:>4} {space.ndofs:>9} {space.bandwidth:>5} " + " ".join(
            f"{res[b][0]:>12.4f}" for b in backends)
        if len(backends) == 2:
            diff = float(np.max(np.abs(res["cython"][1] - res["python"][1])))
            line += f"  {res['python'][0] / res['cython'][0]:7.1f}  {diff:.1e}"
        print(line)


if __name__ == "__main__":
    main()
