"""Kernel backend selection.

The compiled extension is used when importable; ``COMPSUM_BACKEND=python``
forces the pure-Python kernels (handy for debugging and parity tests).
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _kernels as _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = ("cython", "python")


def available() -> tuple[str, ...]:
    return BACKENDS if _ckernels is not None else ("python",)


def get_backend(name: str | None = None) -> ModuleType:
    """Kernel module for ``name`` ("cython", "python" or None/"auto")."""
    if name is None or name == "auto":
        name = os.environ.get("COMPSUM_BACKEND", "auto")
        if name == "auto":
            return _ckernels if _ckernels is not None else _pykernels
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built; reinstall with Cython available")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def backend_name(mod: ModuleType) -> str:
    return "python" if mod is _pykernels else "cython"
