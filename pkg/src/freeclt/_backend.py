"""Kernel backend selection.

The compiled extension is used when it imports; otherwise (or when
``FREECLT_PURE_PYTHON`` is set to a non-empty value other than ``0``) the
numpy fallback is used.  ``BACKEND`` names the active one.
"""
from __future__ import annotations

import os

from . import _kernels_py

_force_py = os.environ.get("FREECLT_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        kernels = _kernels_py
        BACKEND = "python"

cauchy_eval = kernels.cauchy_eval
solve_z = kernels.solve_z
