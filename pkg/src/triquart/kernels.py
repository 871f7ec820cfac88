"""Backend selection for the visibility-scan hot loop.

Prefers the compiled Cython extension and falls back to the NumPy
implementation when the extension was not built.
"""

from __future__ import annotations

from . import _visscan_py

try:  # pragma: no cover - exercised indirectly via backend tests
    from . import _visscan_cy  # type: ignore[attr-defined]
except ImportError:
    _visscan_cy = None

_DEFAULT = _visscan_cy if _visscan_cy is not None else _visscan_py

BACKEND = _DEFAULT.BACKEND


def available_backends() -> tuple[str, ...]:
    names = ["python"]
    if _visscan_cy is not None:
        names.insert(0, "cython")
    return tuple(names)


def _module(backend: str | None):
    if backend is None:
        return _DEFAULT
    if backend == "python":
        return _visscan_py
    if backend == "cython":
        if _visscan_cy is None:
            raise ValueError("cython backend not built")
        return _visscan_cy
    raise ValueError(f"unknown backend {backend!r}")


def coarse_scan(splitter, phase_mode, occupations, radii, thetas, top_k=20, backend=None):
    """Top-k coherent-input visibility combos over the given amplitude grid."""
    return _module(backend).scan(splitter, phase_mode, occupations, radii, thetas, top_k)
