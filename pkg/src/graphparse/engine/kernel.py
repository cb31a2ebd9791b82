"""Recognizer kernel selection.

The compiled Cython kernel is preferred when its extension module built;
otherwise the pure-Python twin takes over.  ``GRAPHPARSE_KERNEL=python`` (or
``=c``) forces a choice, which the benchmark and the parity tests use.
"""

from __future__ import annotations

import os

from . import _recognizer_py

try:
    from . import _recognizer_c
except ImportError:  # extension not built; pure Python fallback
    _recognizer_c = None


def available_kernels() -> dict[str, object]:
    kernels = {"python": _recognizer_py}
    if _recognizer_c is not None:
        kernels["c"] = _recognizer_c
    return kernels


def get_kernel(name: str | None = None):
    """Resolve a kernel module by name, env override, or default preference."""
    kernels = available_kernels()
    if name is None:
        name = os.environ.get("GRAPHPARSE_KERNEL")
    if name is None:
        return kernels["c"] if "c" in kernels else kernels["python"]
    if name not in kernels:
        raise ValueError(f"kernel {name!r} not available (have: {sorted(kernels)})")
    return kernels[name]


def active_kernel_id(name: str | None = None) -> str:
    return get_kernel(name).KERNEL_ID
