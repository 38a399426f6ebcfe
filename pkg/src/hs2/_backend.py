"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback is used. ``HS2_BACKEND=python`` forces the fallback.
"""
import importlib
import os

BACKENDS = ("cython", "python")


def load(name):
    if name == "cython":
        return importlib.import_module("hs2._kernels")
    if name == "python":
        return importlib.import_module("hs2._kernels_py")
    raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")


def _select():
    requested = os.environ.get("HS2_BACKEND", "").strip().lower()
    if requested:
        return requested, load(requested)
    try:
        return "cython", load("cython")
    except ImportError:
        return "python", load("python")


NAME, kernels = _select()


def use(name):
    """Switch the active backend at runtime (used by benchmarks and tests)."""
    global NAME, kernels
    kernels = load(name)
    NAME = name
    return kernels
