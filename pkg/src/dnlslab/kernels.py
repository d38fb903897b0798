"""Kernel backend selection.

The compiled extension is used when importable; otherwise the numpy
fallback.  Set DNLSLAB_BACKEND=python to force the fallback (useful for
cross-checking the two implementations and for the benchmark).
"""

import os

from . import _kernels_py

_forced = os.environ.get("DNLSLAB_BACKEND", "").strip().lower()

if _forced in ("py", "python", "numpy"):
    _impl = _kernels_py
    BACKEND = "python"
elif _forced in ("c", "cython", "ext"):
    from . import _kernels as _impl  # noqa: F401  (raise if unavailable)

    BACKEND = "cython"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

quad_conv = _impl.quad_conv
rk4_run = _impl.rk4_run


def available_backends():
    """Name -> module for every importable kernel implementation."""
    impls = {"python": _kernels_py}
    try:
        from . import _kernels

        impls["cython"] = _kernels
    except ImportError:
        pass
    return impls
