"""Shared kernel operations with a compiled core and a pure-Python fallback.

The backend is selected once at import time:

* ``UNIFEC_KERNEL=pure`` forces the reference implementation;
* ``UNIFEC_KERNEL=c`` requires the compiled extension (ImportError if the
  build is missing);
* unset: the compiled extension when available, else the fallback.

Both decoders import their kernel steps from here, so this module is the
single definition site of the shared arithmetic.  ``fused`` additionally
exposes the compiled block routines (whole sweeps / rows); it is ``None``
on the pure backend and the decoders then run their scalar loops.
"""

import os

from .types import MaxStarMode, MetricPair, QuantSpec  # noqa: F401
from . import _pure

_choice = os.environ.get("UNIFEC_KERNEL", "").strip().lower()

if _choice == "pure":
    _impl = _pure
    fused = None
elif _choice == "c":
    from . import _core as _impl  # noqa: F401  (raises if not built)
    fused = _impl
else:
    try:
        from . import _core as _impl
        fused = _impl
    except ImportError:
        _impl = _pure
        fused = None

BACKEND = _impl.BACKEND_NAME

max_star = _impl.max_star
alpha_step = _impl.alpha_step
beta_llr_step = _impl.beta_llr_step
quantize = _impl.quantize
normalize = _pure.normalize  # list-of-pairs helper; not performance relevant

__all__ = [
    "BACKEND", "MaxStarMode", "MetricPair", "QuantSpec", "fused",
    "max_star", "alpha_step", "beta_llr_step", "normalize", "quantize",
]
