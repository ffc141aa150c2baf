"""Fused LSTM step kernels.

The compiled Cython module is used when it was built; otherwise, or when
``HYDROCAST_PURE_PYTHON`` is set to a non-empty value other than ``0``,
the numpy implementation is selected. ``BACKEND`` names the active one.
"""

import os

from . import _pykernels

_force_py = os.environ.get("HYDROCAST_PURE_PYTHON", "") not in ("", "0")

try:
    if _force_py:
        raise ImportError("pure-Python kernels requested")
    from . import _ckernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

forward_step = _impl.forward_step
backward_step = _impl.backward_step


def available_backends():
    """Map backend name to kernel module for every backend importable here."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
