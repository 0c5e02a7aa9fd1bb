"""Backend selection for the banded LU kernels.

The compiled extension is used when it imports; set
``LAYERFEM_PURE_PYTHON=1`` to force the numpy fallback.
"""
from __future__ import annotations

import os

from . import _banded_py

BACKEND = "python"
gbtrf = _banded_py.gbtrf
gbtrs = _banded_py.gbtrs

if os.environ.get("LAYERFEM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _banded_cy
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        gbtrf = _banded_cy.gbtrf
        gbtrs = _banded_cy.gbtrs


def get_backend(name: str | None = None):
    """(gbtrf, gbtrs) for ``name`` in {"cython", "python"}, default the active one."""
    if name is None or name == BACKEND:
        return gbtrf, gbtrs
    if name == "python":
        return _banded_py.gbtrf, _banded_py.gbtrs
    if name == "cython":
        from . import _banded_cy
        return _banded_cy.gbtrf, _banded_cy.gbtrs
    raise ValueError(f"unknown backend {name!r}")
