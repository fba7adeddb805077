"""Backend switch for the hot kernels.

Set ``WBMARK_BACKEND=numpy`` to bypass numba (debugging, platforms without
an LLVM toolchain).  The default is numba when it imports cleanly.
"""

import os

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    NUMBA_AVAILABLE = False

_requested = os.environ.get("WBMARK_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"WBMARK_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

USE_NUMBA = NUMBA_AVAILABLE and _requested == "numba"
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` or, without numba, the identity decorator."""
    kwargs.setdefault("cache", True)
    if NUMBA_AVAILABLE:
        return numba.njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]
    return lambda fn: fn
