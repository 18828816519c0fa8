# Use Numba when available and not disabled; otherwise the pure-numpy kernels run.
#
# Set OPTOSTA_DISABLE_NUMBA=1 to force the numpy path (useful for debugging
# and for benchmarking the two backends against each other).

import logging
import os

logger = logging.getLogger(__name__)

_DISABLED = os.environ.get("OPTOSTA_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba

    HAVE_NUMBA = True
    njit = numba.njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(pyfunc=None, **kwargs):
        """Null decorator used when numba cannot be imported."""
        def wrap(func):
            return func
        return wrap if pyfunc is None else wrap(pyfunc)

USE_NUMBA = HAVE_NUMBA and not _DISABLED

if _DISABLED:
    logger.debug("numba disabled by OPTOSTA_DISABLE_NUMBA")


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
