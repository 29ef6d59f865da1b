"""Kernel backend selection.

The compiled extension is preferred when importable; the NumPy fallback is
bit-identical, just slower. ``SEQLCD_BACKEND=python|compiled`` overrides,
which the test suite and the backend benchmark use to compare the two.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on the build environment
    _kernels = None


def available_backends() -> list[str]:
    names = ["python"]
    if _kernels is not None:
        names.insert(0, "compiled")
    return names


def get_kernels(name: str | None = None):
    """Return the kernel module for ``name`` (or the environment's choice)."""
    if name is None:
        name = os.environ.get("SEQLCD_BACKEND", "auto")
    if name in ("auto", ""):
        return _kernels if _kernels is not None else _kernels_py
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _kernels is None:
            raise RuntimeError("compiled kernels are not available in this install")
        return _kernels
    raise ValueError(f"unknown backend {name!r} (use 'auto', 'compiled' or 'python')")


def default_threads() -> int:
    """Worker cap for column fan-out; from SEQLCD_THREADS, default 1."""
    raw = os.environ.get("SEQLCD_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)
