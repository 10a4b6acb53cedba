"""Select the kernel implementation at import time.

The compiled ``_kernels`` extension is used when it imports cleanly. Set
``DENSINTERP_BACKEND=python`` to force the numpy fallback (``cython`` makes a
missing extension an error instead of a silent fallback).
"""
import importlib
import os

from . import _fallback

_requested = os.environ.get("DENSINTERP_BACKEND", "auto").lower()
if _requested not in ("auto", "python", "cython"):
    raise ImportError(f"DENSINTERP_BACKEND must be auto, python or cython, got {_requested!r}")

if _requested == "python":
    impl = _fallback
else:
    try:
        impl = importlib.import_module("densinterp._kernels")
    except ImportError:
        if _requested == "cython":
            raise
        impl = _fallback

NAME = impl.NAME
lattice_basis = impl.lattice_basis
piecewise_query = impl.piecewise_query
kde_sum = impl.kde_sum


def compiled_available():
    try:
        importlib.import_module("densinterp._kernels")
    except ImportError:
        return False
    return True


def get(name):
    """Return the kernel module named ``"python"`` or ``"cython"``."""
    if name == "python":
        return _fallback
    if name == "cython":
        return importlib.import_module("densinterp._kernels")
    raise ValueError(f"unknown backend {name!r}")
