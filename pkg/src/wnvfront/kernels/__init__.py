"""Backend registry for the hot per-step solver kernels.

Two interchangeable implementations exist:

* ``numba``  -- loop kernels compiled with numba.njit (default when numba
                imports cleanly),
* ``numpy``  -- vectorized numpy/scipy fallback with identical signatures.

The initial choice honors the ``WNVFRONT_BACKEND`` environment variable
("numba" or "numpy"); ``use_backend`` switches at runtime, which the
benchmark and the cross-backend equivalence test rely on.
"""
from __future__ import annotations

import importlib
import os
import warnings

_BACKEND_NAMES = ("numba", "numpy")
_active_name: str | None = None
_active_module = None


def _load(name: str):
    return importlib.import_module(f".{name}_backend", __name__)


def use_backend(name: str) -> None:
    """Select the kernel implementation by name ("numba" or "numpy")."""
    global _active_name, _active_module
    if name not in _BACKEND_NAMES:
        raise ValueError(f"unknown kernel backend {name!r}; choose from {_BACKEND_NAMES}")
    if name == "numba":
        try:
            module = _load("numba")
        except ImportError as exc:
            warnings.warn(f"numba backend unavailable ({exc}); falling back to numpy")
            name, module = "numpy", _load("numpy")
    else:
        module = _load("numpy")
    _active_name, _active_module = name, module


def active_backend():
    """Return the active kernel module, initializing it on first use."""
    if _active_module is None:
        requested = os.environ.get("WNVFRONT_BACKEND", "").strip().lower()
        use_backend(requested if requested else "numba")
    return _active_module


def active_backend_name() -> str:
    active_backend()
    return _active_name
