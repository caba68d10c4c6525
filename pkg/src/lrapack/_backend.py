"""Select the placement kernel at import: compiled if available, else pure.

Set LRAPACK_BACKEND=python or LRAPACK_BACKEND=cython to force one; forcing
cython raises if the extension was not built.
"""

from __future__ import annotations

import os

from . import _pure

_requested = os.environ.get("LRAPACK_BACKEND", "").strip().lower()

if _requested == "python":
    _impl = _pure
elif _requested == "cython":
    from . import _speedups as _impl  # noqa: F401  (ImportError is the diagnostic)
elif _requested in ("", "auto"):
    try:
        from . import _speedups as _impl
    except ImportError:
        _impl = _pure
else:
    raise RuntimeError(f"LRAPACK_BACKEND must be 'cython' or 'python', got {_requested!r}")

DEFAULT_BACKEND: str = _impl.BACKEND


def get_impl(backend: str | None = None):
    """Kernel module for ``backend`` (None means the import-time default)."""
    if backend is None or backend == DEFAULT_BACKEND or backend == "auto":
        return _impl
    if backend == "python":
        return _pure
    if backend == "cython":
        from . import _speedups
        return _speedups
    raise ValueError(f"unknown backend {backend!r}")


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _speedups  # noqa: F401
        names.insert(0, "cython")
    except ImportError:
        pass
    return names
