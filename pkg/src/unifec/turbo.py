"""Sliding-window max-log (or exact log) MAP SISO and the iterative turbo loop.

The SISO is expressed entirely through the two shared kernel steps: one
``alpha_step`` per butterfly per trellis section forward, one
``beta_llr_step`` per butterfly per section backward, and a four-part
max* assembly that combines the butterfly outputs with +/-gamma into the
a-posteriori LLR.

Branch metrics are built at half LLR scale (gamma = (L_sys+L_apriori)/2
+/- L_parity/2).  That keeps path-metric differences at channel-LLR scale,
so the APP output needs no rescaling and, in EXACT mode, the sweep is the
true log-domain BCJR.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernel
from .constants import NEG_METRIC, hard_decision
from .instrument import OpCounters, OpKind, record
from .kernel import MaxStarMode, QuantSpec
from .trellis import Permutation, Trellis, butterfly_tables, derive_butterflies


class BetaInit(enum.Enum):
    """How interior window boundaries obtain their backward metrics."""

    ACQUISITION = "acquisition"   # warm-up recursion over the next window
    TERMINATION = "termination"   # exact chaining from the block end


@dataclass(frozen=True)
class WindowConfig:
    window_len: int = 64
    beta_init: BetaInit = BetaInit.ACQUISITION

    def __post_init__(self):
        if self.window_len < 1:
            raise ValueError("window length must be >= 1")


@dataclass(frozen=True)
class SisoInput:
    """Inputs of one component decoder, all length K (tails length memory)."""

    l_sys: np.ndarray
    l_apriori: np.ndarray
    l_parity: np.ndarray
    tail_sys: np.ndarray | None = None
    tail_par: np.ndarray | None = None


@dataclass(frozen=True)
class TurboTails:
    """Channel LLRs of the two encoders' termination tails."""

    sys1: np.ndarray
    par1: np.ndarray
    sys2: np.ndarray
    par2: np.ndarray


@dataclass
class TurboResult:
    hard_bits: np.ndarray
    app_llrs: np.ndarray
    iterations_run: int
    counters: OpCounters | None


class SisoResult(NamedTuple):
    extrinsic: np.ndarray
    app_llrs: np.ndarray


class BackwardResult(NamedTuple):
    app_llrs: np.ndarray
    extrinsic: np.ndarray
    beta_start: np.ndarray


def _resolve_ops(ops):
    """(ops, use_fused): scalar kernel namespace and fused-path eligibility."""
    if ops is None:
        return kernel, kernel.fused is not None
    return ops, False


def _qparams(quant: QuantSpec | None):
    return None if quant is None else (quant.scale, quant.lo, quant.hi)


def _gamma_table(a_llrs, parity_llrs):
    """Half-scale (gamma1, gamma2) per section, stacked as (T, 2)."""
    a = 0.5 * np.asarray(a_llrs, dtype=np.float64)
    p = 0.5 * np.asarray(parity_llrs, dtype=np.float64)
    return np.ascontiguousarray(np.stack([a + p, p - a], axis=1))


def _siso_gammas(inp: SisoInput, memory: int):
    """Gamma table over main + tail sections, and the tail step count."""
    l_sys = np.asarray(inp.l_sys, dtype=np.float64)
    l_apriori = np.asarray(inp.l_apriori, dtype=np.float64)
    l_parity = np.asarray(inp.l_parity, dtype=np.float64)
    k = l_sys.size
    if k == 0:
        raise ValueError("empty SISO input")
    if l_apriori.size != k or l_parity.size != k:
        raise ValueError("SISO input sequences must share length K")
    if (inp.tail_sys is None) != (inp.tail_par is None):
        raise ValueError("tail LLRs must be given for both streams or neither")
    g_main = _gamma_table(l_sys + l_apriori, l_parity)
    if inp.tail_sys is None:
        return g_main, 0
    tail_sys = np.asarray(inp.tail_sys, dtype=np.float64)
    tail_par = np.asarray(inp.tail_par, dtype=np.float64)
    if tail_sys.size != memory or tail_par.size != memory:
        raise ValueError(f"tail length must equal the trellis memory ({memory})")
    g_tail = _gamma_table(tail_sys, tail_par)
    return np.concatenate([g_main, g_tail]), memory


def _block_start_metrics(num_states: int) -> np.ndarray:
    m = np.full(num_states, NEG_METRIC)
    m[0] = 0.0
    return m


def _norm8(m):
    top = m[0]
    for v in m[1:]:
        if v > top:
            top = v
    for i in range(len(m)):
        m[i] -= top
    return m


def _forward_range(g, tables, alpha_init, mode, quant, counters, ops,
                   use_fused, do_norm):
    """Chained alpha recursion over ``g``; returns (steps+1, num_states)."""
    prev, nxt, kind = tables
    n_states = 2 * prev.shape[0]
    t_len = g.shape[0]
    if use_fused:
        alpha = kernel.fused.siso_forward(
            np.ascontiguousarray(alpha_init), g, prev, nxt, kind,
            int(mode) == int(MaxStarMode.EXACT), do_norm, _qparams(quant))
    else:
        alpha = np.empty((t_len + 1, n_states))
        cur = [float(v) for v in alpha_init]
        alpha[0] = cur
        n_bf = prev.shape[0]
        for t in range(t_len):
            g1, g2 = g[t, 0], g[t, 1]
            new = [0.0] * n_states
            for b in range(n_bf):
                lam = g1 if kind[b] == 0 else g2
                m0, m1 = ops.alpha_step((cur[prev[b, 0]], cur[prev[b, 1]]),
                                        lam, mode, quant)
                new[nxt[b, 0]] = m0
                new[nxt[b, 1]] = m1
            if do_norm:
                _norm8(new)
            alpha[t + 1] = new
            cur = new
    if counters is not None:
        n_bf = prev.shape[0]
        record(counters, OpKind.ALPHA, n_bf * t_len)
        record(counters, OpKind.ADD, 2 * n_bf * t_len)
        record(counters, OpKind.SUB, 2 * n_bf * t_len)
    return alpha


def _beta_only_range(g, tables, beta_init, mode, quant, ops, use_fused, do_norm):
    """Backward metric recursion without LLR output; returns beta at the start."""
    prev, nxt, kind = tables
    if use_fused:
        return kernel.fused.beta_only(
            np.ascontiguousarray(beta_init), g, prev, nxt, kind,
            int(mode) == int(MaxStarMode.EXACT), do_norm, _qparams(quant))
    n_states = 2 * prev.shape[0]
    n_bf = prev.shape[0]
    beta = [float(v) for v in beta_init]
    for t in range(g.shape[0] - 1, -1, -1):
        g1, g2 = g[t, 0], g[t, 1]
        new = [0.0] * n_states
        for b in range(n_bf):
            lam = g1 if kind[b] == 0 else g2
            # the backward recursion is the identical butterfly formula
            m0, m1 = ops.alpha_step((beta[nxt[b, 0]], beta[nxt[b, 1]]),
                                    lam, mode, quant)
            new[prev[b, 0]] = m0
            new[prev[b, 1]] = m1
        if do_norm:
            _norm8(new)
        beta = new
    return np.array(beta)


def _backward_llr_range(g, alpha, tables, beta_init, mode, quant, counters,
                        ops, use_fused, do_norm):
    """Backward sweep emitting one APP LLR per section.

    ``alpha`` holds rows 0..T for this range; ``beta_init`` is the metric
    vector at the end of the range.  Returns (llr, beta_at_start).
    """
    prev, nxt, kind = tables
    t_len = g.shape[0]
    n_bf = prev.shape[0]
    if use_fused:
        llr, beta_out = kernel.fused.siso_backward_llr(
            np.ascontiguousarray(beta_init), np.ascontiguousarray(alpha), g,
            prev, nxt, kind, int(mode) == int(MaxStarMode.EXACT), do_norm,
            _qparams(quant))
    else:
        n_states = 2 * n_bf
        llr = np.empty(t_len)
        beta = [float(v) for v in beta_init]
        for t in range(t_len - 1, -1, -1):
            g1, g2 = g[t, 0], g[t, 1]
            new = [0.0] * n_states
            num0 = None
            num1 = None
            a_row = alpha[t]
            for b in range(n_bf):
                lam = g1 if kind[b] == 0 else g2
                (c0, c1), out1, out2 = ops.beta_llr_step(
                    (beta[nxt[b, 0]], beta[nxt[b, 1]]),
                    (a_row[prev[b, 0]], a_row[prev[b, 1]]),
                    lam, mode, quant)
                new[prev[b, 0]] = c0
                new[prev[b, 1]] = c1
                if kind[b] == 0:
                    t0 = out1 + lam   # +gamma1 edges carry input bit 0
                    t1 = out2 - lam
                else:
                    t0 = out2 - lam   # -gamma2 edges carry input bit 0
                    t1 = out1 + lam
                num0 = t0 if num0 is None else ops.max_star(num0, t0, mode)
                num1 = t1 if num1 is None else ops.max_star(num1, t1, mode)
            llr[t] = num0 - num1
            if do_norm:
                _norm8(new)
            beta = new
        beta_out = np.array(beta)
    if counters is not None:
        record(counters, OpKind.BETA_LLR, n_bf * t_len)
        record(counters, OpKind.MAX, 2 * (n_bf - 1) * t_len)
        record(counters, OpKind.ADD, (6 + n_bf) * t_len)
        record(counters, OpKind.SUB, (2 + n_bf + 1) * t_len)
    return llr, beta_out


def _end_boundary(g, k, m_steps, tables, mode, quant, counters, ops,
                  use_fused, do_norm, num_states):
    """Beta at time K: termination metrics propagated through the tail."""
    if m_steps == 0:
        return np.zeros(num_states)
    beta_term = _block_start_metrics(num_states)
    beta_k = _beta_only_range(g[k:k + m_steps], tables, beta_term, mode,
                              quant, ops, use_fused, do_norm)
    n_bf = tables[0].shape[0]
    record(counters, OpKind.BETA_LLR_TAIL, n_bf * m_steps)
    record(counters, OpKind.ADD, 2 * n_bf * m_steps)
    record(counters, OpKind.SUB, 2 * n_bf * m_steps)
    return beta_k


def forward_sweep(inp: SisoInput, t: Trellis, window=None, alpha_boundary=None,
                  mode: MaxStarMode = MaxStarMode.MAXLOG,
                  quant: QuantSpec | None = None, counters: OpCounters | None = None,
                  ops=None, do_normalize: bool = True) -> np.ndarray:
    """Alpha metrics over one window; row r is time window_start + r."""
    ops, use_fused = _resolve_ops(ops)
    g, _ = _siso_gammas(inp, t.memory)
    k = np.asarray(inp.l_sys).size
    start, stop = window if window is not None else (0, k)
    if not (0 <= start < stop <= k):
        raise ValueError(f"window {window} outside the block [0, {k})")
    if alpha_boundary is None:
        if start != 0:
            raise ValueError("interior window needs an alpha boundary")
        alpha_boundary = _block_start_metrics(t.num_states)
    tables = butterfly_tables(derive_butterflies(t))
    return _forward_range(g[start:stop], tables, alpha_boundary, mode, quant,
                          counters, ops, use_fused, do_normalize)


def backward_llr_sweep(inp: SisoInput, t: Trellis, window, alpha: np.ndarray,
                       beta_boundary=None, mode: MaxStarMode = MaxStarMode.MAXLOG,
                       quant: QuantSpec | None = None,
                       counters: OpCounters | None = None, ops=None,
                       do_normalize: bool = True) -> BackwardResult:
    """Backward + LLR sweep over one window, given that window's alpha rows.

    Without an explicit ``beta_boundary`` the window must end at the block
    boundary, where termination (or the all-equal metric when there are no
    tails) applies.
    """
    ops, use_fused = _resolve_ops(ops)
    g, m_steps = _siso_gammas(inp, t.memory)
    l_sys = np.asarray(inp.l_sys, dtype=np.float64)
    k = l_sys.size
    start, stop = window
    if not (0 <= start < stop <= k):
        raise ValueError(f"window {window} outside the block [0, {k})")
    tables = butterfly_tables(derive_butterflies(t))
    if beta_boundary is None:
        if stop != k:
            raise ValueError("interior window needs a beta boundary")
        beta_boundary = _end_boundary(g, k, m_steps, tables, mode, quant,
                                      counters, ops, use_fused, do_normalize,
                                      t.num_states)
    if alpha.shape[0] != stop - start + 1:
        raise ValueError("alpha rows do not match the window length")
    llr, beta_start = _backward_llr_range(
        g[start:stop], alpha, tables, beta_boundary, mode, quant, counters,
        ops, use_fused, do_normalize)
    operand = l_sys[start:stop] + np.asarray(inp.l_apriori)[start:stop]
    extrinsic = llr - operand
    record(counters, OpKind.SUB, stop - start)
    return BackwardResult(llr, extrinsic, beta_start)


def siso_decode(inp: SisoInput, t: Trellis, wc: WindowConfig,
                mode: MaxStarMode = MaxStarMode.MAXLOG,
                quant: QuantSpec | None = None,
                counters: OpCounters | None = None, ops=None,
                do_normalize: bool = True) -> SisoResult:
    """One full SISO pass: windowed forward then backward/LLR sweeps."""
    ops, use_fused = _resolve_ops(ops)
    g, m_steps = _siso_gammas(inp, t.memory)
    l_sys = np.asarray(inp.l_sys, dtype=np.float64)
    l_apriori = np.asarray(inp.l_apriori, dtype=np.float64)
    k = l_sys.size
    tables = butterfly_tables(derive_butterflies(t))
    n_bf = tables[0].shape[0]
    record(counters, OpKind.ADD, 2 * k)  # gamma pair construction
    record(counters, OpKind.SUB, k)

    # Forward metrics: chained over the main block, then the tail.
    alpha = _forward_range(g[:k], tables, _block_start_metrics(t.num_states),
                           mode, quant, counters, ops, use_fused, do_normalize)
    if m_steps:
        alpha_tail = _forward_range(g[k:], tables, alpha[-1], mode, quant,
                                    None, ops, use_fused, do_normalize)
        record(counters, OpKind.ALPHA_TAIL, n_bf * m_steps)
        record(counters, OpKind.ADD, 2 * n_bf * m_steps)
        record(counters, OpKind.SUB, 2 * n_bf * m_steps)

    beta_k = _end_boundary(g, k, m_steps, tables, mode, quant, counters, ops,
                           use_fused, do_normalize, t.num_states)

    w = wc.window_len
    bounds = [(a, min(a + w, k)) for a in range(0, k, w)]
    llr = np.empty(k)
    if wc.beta_init is BetaInit.TERMINATION:
        # exact chaining: right-to-left, each window hands its start metrics
        # to the window on its left; bit-exact to the dense sweep for any W
        beta = beta_k
        for a, b in reversed(bounds):
            llr[a:b], beta = _backward_llr_range(
                g[a:b], alpha[a:b + 1], tables, beta, mode, quant, counters,
                ops, use_fused, do_normalize)
    else:
        for a, b in bounds:
            if b == k:
                beta_b = beta_k
            else:
                warm_stop = min(b + w, k)
                warm_init = beta_k if warm_stop == k else np.zeros(t.num_states)
                beta_b = _beta_only_range(g[b:warm_stop], tables, warm_init,
                                          mode, quant, ops, use_fused,
                                          do_normalize)
                record(counters, OpKind.ACQ, n_bf * (warm_stop - b))
            llr[a:b], _ = _backward_llr_range(
                g[a:b], alpha[a:b + 1], tables, beta_b, mode, quant, counters,
                ops, use_fused, do_normalize)

    extrinsic = llr - (l_sys + l_apriori)
    record(counters, OpKind.SUB, k)
    return SisoResult(extrinsic, llr)


def turbo_decode(l_sys, l_par1, l_par2, tails: TurboTails | None,
                 perm: Permutation, t: Trellis, wc: WindowConfig,
                 iters: int, mode: MaxStarMode = MaxStarMode.MAXLOG,
                 quant: QuantSpec | None = None,
                 counters: OpCounters | None = None, ops=None,
                 extrinsic_scale: float = 1.0,
                 do_normalize: bool = True) -> TurboResult:
    """Iterative exchange between the two component SISOs.

    Each full iteration runs SISO-1 in natural order and SISO-2 on
    interleaved systematic LLRs with SISO-1's interleaved extrinsic as a
    priori.  The final APP is SISO-2's output deinterleaved.
    """
    if iters < 1:
        raise ValueError("iteration count must be >= 1")
    l_sys = np.asarray(l_sys, dtype=np.float64)
    l_par1 = np.asarray(l_par1, dtype=np.float64)
    l_par2 = np.asarray(l_par2, dtype=np.float64)
    k = perm.size
    if l_sys.size != k or l_par1.size != k or l_par2.size != k:
        raise ValueError("LLR sequence lengths must equal the interleaver size")
    if tails is not None:
        for arr in (tails.sys1, tails.par1, tails.sys2, tails.par2):
            if np.asarray(arr).size != t.memory:
                raise ValueError("tail LLR lengths must equal the trellis memory")

    sys_i = perm.interleave(l_sys)
    la1 = np.zeros(k)  # a priori values start at zero
    app_int = None
    common = dict(mode=mode, quant=quant, counters=counters, ops=ops,
                  do_normalize=do_normalize)
    for _ in range(iters):
        in1 = SisoInput(l_sys, la1, l_par1,
                        None if tails is None else tails.sys1,
                        None if tails is None else tails.par1)
        ext1, _ = siso_decode(in1, t, wc, **common)
        la2 = perm.interleave(extrinsic_scale * ext1)
        in2 = SisoInput(sys_i, la2, l_par2,
                        None if tails is None else tails.sys2,
                        None if tails is None else tails.par2)
        ext2, app_int = siso_decode(in2, t, wc, **common)
        la1 = perm.deinterleave(extrinsic_scale * ext2)

    app = perm.deinterleave(app_int)
    hard = hard_decision(app)
    record(counters, OpKind.STREAM, k)
    return TurboResult(hard_bits=hard, app_llrs=app, iterations_run=iters,
                       counters=counters)
