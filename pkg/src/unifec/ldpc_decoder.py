"""Layered LDPC decoding with the supercode check-node update.

Each parity row is a two-state trellis over its participating bits,
decoded by the same ``alpha_step`` / ``beta_llr_step`` pair the turbo SISO
uses.  The outgoing message halving of the supercode formulation is folded
into the branch values (each kernel step receives Li/2), which makes
MAXLOG mode exactly min-sum and EXACT mode exactly the tanh-rule
sum-product for the row.

A weight-w row costs exactly w ALPHA and w BetaLLR kernel calls: the
forward pass runs through the full row (the last alpha feeds no output
but keeps the serial unit usage at one call per edge), and the backward
pass emits one message per call while computing the next backward metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernel
from .constants import NEG_METRIC, hard_decision
from .errors import DegenerateRowError
from .instrument import OpCounters, OpKind, record
from .kernel import MaxStarMode, QuantSpec
from .ldpc_code import ParityCheckMatrix


@dataclass
class LdpcState:
    """Working buffers of one decode job."""

    a: np.ndarray          # posterior accumulators, length N
    lp: np.ndarray         # per-edge stored row outputs, aligned with col_idx
    iteration: int = 0

    @classmethod
    def fresh(cls, lam, h: ParityCheckMatrix) -> "LdpcState":
        lam = np.asarray(lam, dtype=np.float64)
        if lam.size != h.N:
            raise ValueError(f"LLR length {lam.size} != block length {h.N}")
        return cls(a=lam.copy(), lp=np.zeros(h.edges))


@dataclass
class LdpcResult:
    hard_bits: np.ndarray
    posterior: np.ndarray
    iterations_used: int
    converged: bool
    counters: OpCounters | None


def _resolve_ops(ops):
    if ops is None:
        return kernel, kernel.fused is not None
    return ops, False


def _qparams(quant: QuantSpec | None):
    return None if quant is None else (quant.scale, quant.lo, quant.hi)


def check_node_update(li, mode: MaxStarMode = MaxStarMode.MAXLOG,
                      quant: QuantSpec | None = None,
                      counters: OpCounters | None = None, ops=None) -> np.ndarray:
    """Outgoing messages of one parity row given its incoming messages."""
    li = np.asarray(li, dtype=np.float64)
    w = li.size
    if w < 2:
        raise DegenerateRowError(f"check node weight {w} < 2")
    ops, use_fused = _resolve_ops(ops)
    lam = 0.5 * li
    if use_fused:
        lo = kernel.fused.check_node(lam, int(mode) == int(MaxStarMode.EXACT),
                                     _qparams(quant))
    else:
        lo = _check_node_scalar(lam, mode, quant, ops)
    if counters is not None:
        record(counters, OpKind.ALPHA, w)
        record(counters, OpKind.BETA_LLR, w)
        record(counters, OpKind.ADD, 8 * w)
        record(counters, OpKind.SUB, 4 * w + w)
    return lo


def _check_node_scalar(lam, mode, quant, ops) -> np.ndarray:
    w = lam.size
    # forward: alpha[k] after absorbing lam[0..k-1]; alpha[w] is computed
    # to keep one kernel call per edge but feeds no output
    alpha = np.empty((w + 1, 2))
    cur = (0.0, NEG_METRIC)
    alpha[0] = cur
    for k in range(w):
        cur = ops.alpha_step(cur, lam[k], mode, quant)
        alpha[k + 1] = cur
    lo = np.empty(w)
    beta = (0.0, NEG_METRIC)
    for k in range(w - 1, -1, -1):
        beta, out1, out2 = ops.beta_llr_step(
            beta, (alpha[k, 0], alpha[k, 1]), lam[k], mode, quant)
        lo[k] = out1 - out2
    return lo


def layered_iteration(state: LdpcState, h: ParityCheckMatrix,
                      mode: MaxStarMode = MaxStarMode.MAXLOG,
                      quant: QuantSpec | None = None,
                      counters: OpCounters | None = None, ops=None,
                      row_order=None) -> LdpcState:
    """One full pass over all rows with immediate posterior updates.

    Per row j: Li_k = A[col] - Lp[j,k]; Lo = check_node_update(Li);
    A[col] = Li_k + Lo_k; Lp[j,k] = Lo_k.
    """
    opsr, use_fused = _resolve_ops(ops)
    if state.a.size != h.N or state.lp.size != h.edges:
        raise ValueError("decoder state does not match the matrix dimensions")
    if (h.row_weights() < 2).any():
        j = int(np.argmax(h.row_weights() < 2))
        raise DegenerateRowError(f"row {j} has weight < 2")
    if use_fused and row_order is None:
        kernel.fused.layered_pass(state.a, state.lp, h.row_ptr, h.col_idx,
                                  int(mode) == int(MaxStarMode.EXACT),
                                  _qparams(quant))
        if counters is not None:
            e = h.edges
            record(counters, OpKind.ALPHA, e)
            record(counters, OpKind.BETA_LLR, e)
            record(counters, OpKind.ADD, 8 * e + e)
            record(counters, OpKind.SUB, 5 * e + e)
    else:
        order = range(h.M) if row_order is None else row_order
        for j in order:
            lo_idx = slice(h.row_ptr[j], h.row_ptr[j + 1])
            cols = h.col_idx[lo_idx]
            li = state.a[cols] - state.lp[lo_idx]
            lo = check_node_update(li, mode, quant, counters, ops=ops)
            state.a[cols] = li + lo
            state.lp[lo_idx] = lo
        if counters is not None:
            record(counters, OpKind.ADD, h.edges)
            record(counters, OpKind.SUB, h.edges)
    state.iteration += 1
    return state


def parity_check(h: ParityCheckMatrix, bits) -> bool:
    """True iff every row has even parity over its adjacency."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.size != h.N:
        raise ValueError(f"word length {bits.size} != block length {h.N}")
    if h.edges == 0:
        return True
    row_of_edge = np.repeat(np.arange(h.M), h.row_weights())
    sums = np.bincount(row_of_edge, weights=bits[h.col_idx], minlength=h.M)
    return bool((sums.astype(np.int64) % 2 == 0).all())


def ldpc_decode(lam, h: ParityCheckMatrix, max_iters: int,
                mode: MaxStarMode = MaxStarMode.MAXLOG,
                early_stop: bool = False, quant: QuantSpec | None = None,
                counters: OpCounters | None = None, ops=None) -> LdpcResult:
    """Layered decoding for up to ``max_iters`` iterations."""
    if max_iters < 1:
        raise ValueError("iteration count must be >= 1")
    state = LdpcState.fresh(lam, h)
    converged = False
    while state.iteration < max_iters:
        layered_iteration(state, h, mode, quant, counters, ops=ops)
        if early_stop and parity_check(h, hard_decision(state.a)):
            converged = True
            break
    bits = hard_decision(state.a)
    if not early_stop:
        converged = parity_check(h, bits)
    record(counters, OpKind.STREAM, h.N)
    return LdpcResult(hard_bits=bits, posterior=state.a.copy(),
                      iterations_used=state.iteration, converged=converged,
                      counters=counters)
