"""Kernel dispatch: compiled extension when available, NumPy fallback otherwise.

Set ``AFFINE_ENERGY_KERNELS=numpy`` to force the fallback (used by the
benchmark and by tests comparing the two backends).
"""

from __future__ import annotations

import os

from . import _kernels_py

_FORCED = os.environ.get("AFFINE_ENERGY_KERNELS", "").lower()

if _FORCED in ("", "compiled", "cython"):
    try:
        from . import _kernels as _impl

        BACKEND = "compiled"
    except ImportError:
        if _FORCED:
            raise
        _impl = _kernels_py
        BACKEND = "numpy"
else:
    _impl = _kernels_py
    BACKEND = "numpy"

one_sided_power_sums = _impl.one_sided_power_sums
radial_from_support = _impl.radial_from_support


def backend() -> str:
    """Name of the active kernel backend ('compiled' or 'numpy')."""
    return BACKEND


def backends() -> dict:
    """All importable backends, keyed by name."""
    out = {"numpy": _kernels_py}
    try:
        from . import _kernels

        out["compiled"] = _kernels
    except ImportError:
        pass
    return out
