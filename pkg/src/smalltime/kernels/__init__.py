"""Hot simulation loops.

The compiled extension ``_ckernels`` is used when it was built; otherwise,
or when ``SMALLTIME_PURE_PYTHON`` is set to a non-empty value, the numpy
implementations in ``_pykernels`` are used. Both take the same pre-drawn
random arrays, so results agree to rounding.
"""

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

if _ckernels is not None and not os.environ.get("SMALLTIME_PURE_PYTHON"):
    _impl = _ckernels
    BACKEND = "cython"
else:
    _impl = _pykernels
    BACKEND = "python"

heston_terminal = _impl.heston_terminal
sde_euler = _impl.sde_euler
stable_cms = _impl.stable_cms


def backends():
    """Mapping of available backend name to module."""
    out = {"python": _pykernels}
    if _ckernels is not None:
        out["cython"] = _ckernels
    return out
