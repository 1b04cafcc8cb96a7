"""Pick the compiled core when it imports, else the pure-Python twin.

Set ``KSWAVE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("KSWAVE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl  # noqa: F811
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _fallback


def get(backend=None):
    """Kernel module for ``backend`` ('compiled', 'python' or None for the default)."""
    if backend is None:
        return _impl
    if backend == "python":
        return _fallback
    if backend == "compiled":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {backend!r}")


def available():
    try:
        from . import _core  # noqa: F401
        return ["compiled", "python"]
    except ImportError:
        return ["python"]
