"""Backend switch for the compiled hot loops.

Kernels that loop over grid pairs are compiled with numba when it is
available. Setting the environment variable ``PATHLAB_DISABLE_NUMBA=1``
(or calling :func:`set_backend`) selects the vectorized numpy
implementations instead. Both paths implement the same arithmetic and are
tested against each other.
"""

import os

ENV_FLAG = "PATHLAB_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _env_disabled():
    return os.environ.get(ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


_backend = "numba" if HAVE_NUMBA and not _env_disabled() else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` if numba is importable, otherwise an identity decorator."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)

    def wrap(f):
        return f

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap


def backend():
    """Name of the active backend, ``"numba"`` or ``"numpy"``."""
    return _backend


def set_backend(name):
    """Select the backend at runtime (used by tests and benchmarks).

    Returns the previously active backend name.
    """
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    previous, _backend = _backend, name
    return previous
