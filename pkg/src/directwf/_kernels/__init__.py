"""Hot batch kernels with a compiled core and a numpy fallback.

The Cython extension is used when it was built; set
``DIRECTWF_KERNEL=python`` to force the numpy path. ``BACKEND`` names the
active implementation.
"""
import os

from . import _fallback

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

if _ckernel is not None and os.environ.get("DIRECTWF_KERNEL", "").lower() not in ("python", "numpy"):
    _impl = _ckernel
    BACKEND = "cython"
else:
    _impl = _fallback
    BACKEND = "python"

fallback_state_moments = _fallback.state_moments
compiled_state_moments = _ckernel.state_moments if _ckernel is not None else None


def state_moments(z):
    """Moment table of shape (m, 8) for the rows of ``z``; see ``_fallback.state_moments``."""
    return _impl.state_moments(z)
