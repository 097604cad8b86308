"""Numba switch.

Hot kernels are compiled with ``numba.njit`` unless the environment variable
``SFWM_DISABLE_NUMBA`` is set to a truthy value or numba is not importable, in
which case the pure-numpy implementations are used.
"""

import os

_FLAG = os.environ.get("SFWM_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)

    def wrap(func):
        return func

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap
