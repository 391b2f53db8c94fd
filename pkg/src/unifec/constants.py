"""Shared numeric conventions.

Sign convention (used by every module): an LLR is log P(bit=0) / P(bit=1),
so bit 0 maps to a positive LLR and to the BPSK symbol +1.  Hard decisions
use the tie rule LLR >= 0 -> bit 0.

The "minus infinity" state metric is a large finite negative constant
rather than an IEEE infinity, so that sentinel + finite stays orderable
and fixed-point quantization of a sentinel is well defined.
"""

import numpy as np

# Sentinel for an unreachable trellis state.  Adding any practically
# occurring metric to it is absorbed by double rounding, which is exactly
# the behaviour we want.
NEG_METRIC = -1.0e30

# Anything at or below this is treated as the sentinel.
SENTINEL_CUTOFF = -1.0e29


def is_sentinel(x: float) -> bool:
    return x <= SENTINEL_CUTOFF


def hard_decision(llrs) -> np.ndarray:
    """Map LLRs to bits; LLR >= 0 decides bit 0."""
    return np.where(np.asarray(llrs) >= 0.0, 0, 1).astype(np.int8)


def bit_to_sign(bits) -> np.ndarray:
    """Antipodal map consistent with the LLR convention: 0 -> +1, 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)
