"""Hot inner loops, compiled with numba by default.

Every kernel here has two implementations: an ``@njit``-compiled one and a
fallback that needs only numpy.  The walk kernel's fallback is vectorized;
the two trainers' fallbacks run the identical update loop uncompiled, which
keeps their semantics exact but makes them slow on large corpora.  Set
``SENSENORM_DISABLE_NUMBA=1`` to force the fallback path everywhere;
``benchmarks/bench_kernels.py`` times one path against the other.
"""

import os

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def deco(func):
            return func

        return deco


def numba_enabled() -> bool:
    """Checked at every kernel call so tests can flip the env var live."""
    if os.environ.get("SENSENORM_DISABLE_NUMBA", "0") == "1":
        return False
    return HAVE_NUMBA
