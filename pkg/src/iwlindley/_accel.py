"""Optional numba acceleration.

Every hot kernel in this package is written as plain Python over scalars and
ndarrays and decorated with :func:`maybe_jit`.  When numba is importable and
the environment variable ``IWLINDLEY_DISABLE_JIT`` is unset (or set to
``0`` or the empty string), the kernel is compiled with ``numba.njit``;
otherwise the undecorated function runs as-is.
Kernels avoid numpy reductions (explicit accumulation loops instead), so both
paths execute the same floating-point operations and produce identical bits.
"""

from __future__ import annotations

import os
import warnings

__all__ = ["HAS_NUMBA", "JIT_ENABLED", "maybe_jit"]

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
    numba = None
    HAS_NUMBA = False

JIT_ENABLED = HAS_NUMBA and os.environ.get("IWLINDLEY_DISABLE_JIT", "0") in ("", "0")

if not HAS_NUMBA:  # pragma: no cover
    warnings.warn(
        "numba not available; iwlindley falls back to pure Python kernels "
        "(correct but much slower)",
        RuntimeWarning,
    )


def maybe_jit(func=None, **options):
    """Apply ``numba.njit`` when enabled, else return the function unchanged.

    Usable bare or with njit keyword options:

        @maybe_jit
        def f(x): ...

        @maybe_jit(cache=True)
        def g(x): ...
    """
    if func is not None:
        return numba.njit(func) if JIT_ENABLED else func

    def wrap(f):
        return numba.njit(**options)(f) if JIT_ENABLED else f

    return wrap
