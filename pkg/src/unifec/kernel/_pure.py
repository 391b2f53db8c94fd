"""Reference implementation of the shared kernel operations.

This is the readable, always-available definition of the arithmetic that
both decoders are built from.  The compiled backend in ``_core.pyx``
mirrors it operation for operation so that results are bit-identical.

All functions are pure (no state beyond the optional counter handle), so
they are safe to call from any number of concurrent decode jobs as long
as each job owns its own ``OpCounters``.
"""

from __future__ import annotations

import math

from ..constants import NEG_METRIC, SENTINEL_CUTOFF
from ..errors import DegenerateMetricError
from .types import MaxStarMode, MetricPair, QuantSpec

BACKEND_NAME = "pure"


def max_star(x: float, y: float, mode: MaxStarMode = MaxStarMode.MAXLOG) -> float:
    """max(x, y), plus ln(1 + e^-|x-y|) in EXACT mode.

    If either input is the negative-infinity sentinel the other input is
    returned unchanged (correction suppressed).
    """
    if x <= SENTINEL_CUTOFF or y <= SENTINEL_CUTOFF:
        return x if x > y else y
    if mode == MaxStarMode.MAXLOG:
        return x if x > y else y
    if x > y:
        return x + math.log1p(math.exp(y - x))
    return y + math.log1p(math.exp(x - y))


def quantize(x: float, q: QuantSpec) -> float:
    """Round to the nearest 2^-frac_bits multiple, saturating two's-complement."""
    if not q.enabled:
        raise ValueError("quantize called with a disabled QuantSpec")
    if x <= SENTINEL_CUTOFF:
        return q.lo
    v = math.floor(x * q.scale + 0.5)
    hi = (1 << (q.total_bits - 1)) - 1
    lo = -(1 << (q.total_bits - 1))
    if v > hi:
        v = hi
    elif v < lo:
        v = lo
    return v / q.scale


def _maybe_quantize(x: float, q: QuantSpec | None) -> float:
    return x if q is None else quantize(x, q)


def alpha_step(prev: MetricPair, lam: float,
               mode: MaxStarMode = MaxStarMode.MAXLOG,
               quant: QuantSpec | None = None,
               counters=None) -> MetricPair:
    """One forward (or backward) metric recursion of a single butterfly.

    out.m0 survives the +lam branches, out.m1 the -lam branches.
    """
    m0, m1 = prev
    o0 = max_star(m0 + lam, m1 - lam, mode)
    o1 = max_star(m0 - lam, m1 + lam, mode)
    if quant is not None:
        o0 = quantize(o0, quant)
        o1 = quantize(o1, quant)
    if counters is not None:
        counters.alpha += 1
        counters.add += 2
        counters.sub += 2
    return MetricPair(o0, o1)


def beta_llr_step(beta_next: MetricPair, alpha_prev: MetricPair, lam: float,
                  mode: MaxStarMode = MaxStarMode.MAXLOG,
                  quant: QuantSpec | None = None,
                  counters=None):
    """Combined backward-metric and output step of one butterfly.

    Returns ``(beta_cur, out1, out2)`` where ``beta_cur`` continues the
    backward recursion (identical formula to :func:`alpha_step`), and
    out1 / out2 pair ``alpha_prev`` with the incoming ``beta_next`` along
    the +lam and -lam edges respectively:

        out1 = max*(alpha_prev.m0 + beta_next.m0, alpha_prev.m1 + beta_next.m1)
        out2 = max*(alpha_prev.m0 + beta_next.m1, alpha_prev.m1 + beta_next.m0)
    """
    b0, b1 = beta_next
    a0, a1 = alpha_prev
    c0 = max_star(b0 + lam, b1 - lam, mode)
    c1 = max_star(b0 - lam, b1 + lam, mode)
    out1 = max_star(a0 + b0, a1 + b1, mode)
    out2 = max_star(a0 + b1, a1 + b0, mode)
    if quant is not None:
        c0 = quantize(c0, quant)
        c1 = quantize(c1, quant)
        out1 = quantize(out1, quant)
        out2 = quantize(out2, quant)
    if counters is not None:
        counters.beta_llr += 1
        counters.add += 6
        counters.sub += 2
    return MetricPair(c0, c1), out1, out2


def normalize(pairs):
    """Subtract the global maximum of the set from every metric.

    Relative differences and argmax structure are unchanged; sentinels are
    absorbed (subtracting a finite value from -1e30 rounds back to -1e30).
    """
    top = NEG_METRIC
    for m0, m1 in pairs:
        if m0 > top:
            top = m0
        if m1 > top:
            top = m1
    if top <= SENTINEL_CUTOFF:
        raise DegenerateMetricError("all metrics are at the sentinel")
    return [MetricPair(m0 - top, m1 - top) for m0, m1 in pairs]
