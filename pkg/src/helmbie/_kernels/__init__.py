"""Kernel backend selection.

The compiled extension is used when it imports; otherwise, or when
``HELMBIE_PURE_PYTHON`` is set to a non-empty value other than ``0``, the
numpy implementation is used. Both expose the same three functions.
"""

import os

from . import _pykernels

_force_python = os.environ.get("HELMBIE_PURE_PYTHON", "") not in ("", "0")

if _force_python:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

j_sharp_series = _impl.j_sharp_series
n_sharp_series = _impl.n_sharp_series
laplace_layer_sums = _impl.laplace_layer_sums

__all__ = ["BACKEND", "j_sharp_series", "n_sharp_series", "laplace_layer_sums"]
