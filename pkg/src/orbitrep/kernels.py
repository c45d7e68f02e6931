"""Backend selection for the partial-map kernels.

The compiled extension is used when it imports; ``ORBITREP_PURE_PYTHON=1``
forces the numpy fallback.
"""

from __future__ import annotations

import os

from orbitrep import _pykernels


def _load():
    if os.environ.get("ORBITREP_PURE_PYTHON", "") not in ("", "0"):
        return _pykernels
    try:
        from orbitrep import _kernels
    except ImportError:
        return _pykernels
    return _kernels


backend = _load()
BACKEND = backend.BACKEND

normalize = backend.normalize
inverse = backend.inverse
compose = backend.compose
adjoint = backend.adjoint
compare = backend.compare
projection_defect = backend.projection_defect

__all__ = ["BACKEND", "adjoint", "compare", "compose", "inverse", "normalize", "projection_defect", "backend"]
