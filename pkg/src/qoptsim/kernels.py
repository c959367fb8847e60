"""Backend selection for the permanent kernels.

The compiled extension ``qoptsim._ckernels`` is used when it was built;
otherwise the numpy implementation in ``qoptsim._pykernels`` is loaded.
Setting ``QOPTSIM_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _pykernels

if os.environ.get("QOPTSIM_PURE_PYTHON"):
    _backend = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _backend
        BACKEND = "cython"
    except ImportError:
        _backend = _pykernels
        BACKEND = "python"

permanent = _backend.permanent
ket_permanents = _backend.ket_permanents


def available_backends():
    """Map backend name to module for every backend importable here."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels
        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
