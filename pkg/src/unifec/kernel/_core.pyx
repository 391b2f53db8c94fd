# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Mirrors ``_pure`` operation for operation (same max*/quantize formulas,
same evaluation order) so results are bit-identical, and adds fused block
routines for the decoder inner loops: whole forward/backward sweeps and
whole check-node rows / layered passes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, floor, log1p

from .types import MaxStarMode, MetricPair

cnp.import_array()

BACKEND_NAME = "c"

cdef double NEG_METRIC = -1.0e30
cdef double SENTINEL_CUTOFF = -1.0e29


# ---------------------------------------------------------------- primitives

cdef inline double _mstar(double x, double y, bint exact) noexcept nogil:
    if x <= SENTINEL_CUTOFF or y <= SENTINEL_CUTOFF:
        return x if x > y else y
    if not exact:
        return x if x > y else y
    if x > y:
        return x + log1p(exp(y - x))
    return y + log1p(exp(x - y))


cdef inline double _quant(double x, double scale, double lo, double hi) noexcept nogil:
    cdef double v
    if x <= SENTINEL_CUTOFF:
        return lo
    v = floor(x * scale + 0.5) / scale
    if v > hi:
        return hi
    if v < lo:
        return lo
    return v


cdef inline void _norm_row(double* m, Py_ssize_t n) noexcept nogil:
    cdef double top = m[0]
    cdef Py_ssize_t i
    for i in range(1, n):
        if m[i] > top:
            top = m[i]
    for i in range(n):
        m[i] -= top


cdef inline void _unpack_q(object qp, bint* q_on, double* scale,
                           double* lo, double* hi):
    if qp is None:
        q_on[0] = 0
        scale[0] = 1.0
        lo[0] = 0.0
        hi[0] = 0.0
    else:
        q_on[0] = 1
        scale[0] = qp[0]
        lo[0] = qp[1]
        hi[0] = qp[2]


# ----------------------------------------------------------- scalar wrappers

def max_star(double x, double y, mode=MaxStarMode.MAXLOG):
    return _mstar(x, y, int(mode) == 1)


def quantize(double x, q):
    if not q.enabled:
        raise ValueError("quantize called with a disabled QuantSpec")
    return _quant(x, q.scale, q.lo, q.hi)


def alpha_step(prev, double lam, mode=MaxStarMode.MAXLOG, quant=None,
               counters=None):
    cdef bint exact = int(mode) == 1
    cdef double m0 = prev[0]
    cdef double m1 = prev[1]
    cdef double o0 = _mstar(m0 + lam, m1 - lam, exact)
    cdef double o1 = _mstar(m0 - lam, m1 + lam, exact)
    if quant is not None:
        o0 = _quant(o0, quant.scale, quant.lo, quant.hi)
        o1 = _quant(o1, quant.scale, quant.lo, quant.hi)
    if counters is not None:
        counters.alpha += 1
        counters.add += 2
        counters.sub += 2
    return MetricPair(o0, o1)


def beta_llr_step(beta_next, alpha_prev, double lam, mode=MaxStarMode.MAXLOG,
                  quant=None, counters=None):
    cdef bint exact = int(mode) == 1
    cdef double b0 = beta_next[0]
    cdef double b1 = beta_next[1]
    cdef double a0 = alpha_prev[0]
    cdef double a1 = alpha_prev[1]
    cdef double c0 = _mstar(b0 + lam, b1 - lam, exact)
    cdef double c1 = _mstar(b0 - lam, b1 + lam, exact)
    cdef double out1 = _mstar(a0 + b0, a1 + b1, exact)
    cdef double out2 = _mstar(a0 + b1, a1 + b0, exact)
    if quant is not None:
        c0 = _quant(c0, quant.scale, quant.lo, quant.hi)
        c1 = _quant(c1, quant.scale, quant.lo, quant.hi)
        out1 = _quant(out1, quant.scale, quant.lo, quant.hi)
        out2 = _quant(out2, quant.scale, quant.lo, quant.hi)
    if counters is not None:
        counters.beta_llr += 1
        counters.add += 6
        counters.sub += 2
    return MetricPair(c0, c1), out1, out2


# ------------------------------------------------------------- fused sweeps

def siso_forward(double[::1] alpha0, double[:, ::1] g,
                 int[:, ::1] prev, int[:, ::1] nxt, int[::1] kind,
                 bint exact, bint do_norm, qp):
    cdef Py_ssize_t t_len = g.shape[0]
    cdef Py_ssize_t n_bf = prev.shape[0]
    cdef Py_ssize_t n_states = alpha0.shape[0]
    cdef bint q_on
    cdef double q_scale, q_lo, q_hi
    _unpack_q(qp, &q_on, &q_scale, &q_lo, &q_hi)

    out = np.empty((t_len + 1, n_states))
    cdef double[:, ::1] alpha = out
    cdef Py_ssize_t t, b
    cdef double lam, m0, m1
    with nogil:
        for b in range(n_states):
            alpha[0, b] = alpha0[b]
        for t in range(t_len):
            for b in range(n_bf):
                lam = g[t, kind[b]]
                m0 = _mstar(alpha[t, prev[b, 0]] + lam,
                            alpha[t, prev[b, 1]] - lam, exact)
                m1 = _mstar(alpha[t, prev[b, 0]] - lam,
                            alpha[t, prev[b, 1]] + lam, exact)
                if q_on:
                    m0 = _quant(m0, q_scale, q_lo, q_hi)
                    m1 = _quant(m1, q_scale, q_lo, q_hi)
                alpha[t + 1, nxt[b, 0]] = m0
                alpha[t + 1, nxt[b, 1]] = m1
            if do_norm:
                _norm_row(&alpha[t + 1, 0], n_states)
    return out


def beta_only(double[::1] beta_init, double[:, ::1] g,
              int[:, ::1] prev, int[:, ::1] nxt, int[::1] kind,
              bint exact, bint do_norm, qp):
    cdef Py_ssize_t t_len = g.shape[0]
    cdef Py_ssize_t n_bf = prev.shape[0]
    cdef Py_ssize_t n_states = beta_init.shape[0]
    cdef bint q_on
    cdef double q_scale, q_lo, q_hi
    _unpack_q(qp, &q_on, &q_scale, &q_lo, &q_hi)

    cur_arr = np.ascontiguousarray(beta_init).copy()
    new_arr = np.empty(n_states)
    cdef double[::1] cur = cur_arr
    cdef double[::1] new = new_arr
    cdef double* cur_p = &cur[0]
    cdef double* new_p = &new[0]
    cdef double* tmp_p
    cdef Py_ssize_t t, b
    cdef double lam, m0, m1
    with nogil:
        for t in range(t_len - 1, -1, -1):
            for b in range(n_bf):
                lam = g[t, kind[b]]
                m0 = _mstar(cur_p[nxt[b, 0]] + lam, cur_p[nxt[b, 1]] - lam, exact)
                m1 = _mstar(cur_p[nxt[b, 0]] - lam, cur_p[nxt[b, 1]] + lam, exact)
                if q_on:
                    m0 = _quant(m0, q_scale, q_lo, q_hi)
                    m1 = _quant(m1, q_scale, q_lo, q_hi)
                new_p[prev[b, 0]] = m0
                new_p[prev[b, 1]] = m1
            if do_norm:
                _norm_row(new_p, n_states)
            tmp_p = cur_p
            cur_p = new_p
            new_p = tmp_p
    result = np.empty(n_states)
    cdef double[::1] res = result
    for t in range(n_states):
        res[t] = cur_p[t]
    return result


def siso_backward_llr(double[::1] beta_init, double[:, ::1] alpha,
                      double[:, ::1] g, int[:, ::1] prev, int[:, ::1] nxt,
                      int[::1] kind, bint exact, bint do_norm, qp):
    cdef Py_ssize_t t_len = g.shape[0]
    cdef Py_ssize_t n_bf = prev.shape[0]
    cdef Py_ssize_t n_states = beta_init.shape[0]
    cdef bint q_on
    cdef double q_scale, q_lo, q_hi
    _unpack_q(qp, &q_on, &q_scale, &q_lo, &q_hi)

    llr_arr = np.empty(t_len)
    cur_arr = np.ascontiguousarray(beta_init).copy()
    new_arr = np.empty(n_states)
    cdef double[::1] llr = llr_arr
    cdef double[::1] cur = cur_arr
    cdef double[::1] new = new_arr
    cdef double* cur_p = &cur[0]
    cdef double* new_p = &new[0]
    cdef double* tmp_p
    cdef Py_ssize_t t, b
    cdef double lam, b0, b1, a0, a1, c0, c1, out1, out2, t0, t1, num0, num1
    with nogil:
        for t in range(t_len - 1, -1, -1):
            num0 = 0.0
            num1 = 0.0
            for b in range(n_bf):
                lam = g[t, kind[b]]
                b0 = cur_p[nxt[b, 0]]
                b1 = cur_p[nxt[b, 1]]
                a0 = alpha[t, prev[b, 0]]
                a1 = alpha[t, prev[b, 1]]
                c0 = _mstar(b0 + lam, b1 - lam, exact)
                c1 = _mstar(b0 - lam, b1 + lam, exact)
                out1 = _mstar(a0 + b0, a1 + b1, exact)
                out2 = _mstar(a0 + b1, a1 + b0, exact)
                if q_on:
                    c0 = _quant(c0, q_scale, q_lo, q_hi)
                    c1 = _quant(c1, q_scale, q_lo, q_hi)
                    out1 = _quant(out1, q_scale, q_lo, q_hi)
                    out2 = _quant(out2, q_scale, q_lo, q_hi)
                new_p[prev[b, 0]] = c0
                new_p[prev[b, 1]] = c1
                if kind[b] == 0:
                    t0 = out1 + lam
                    t1 = out2 - lam
                else:
                    t0 = out2 - lam
                    t1 = out1 + lam
                if b == 0:
                    num0 = t0
                    num1 = t1
                else:
                    num0 = _mstar(num0, t0, exact)
                    num1 = _mstar(num1, t1, exact)
            llr[t] = num0 - num1
            if do_norm:
                _norm_row(new_p, n_states)
            tmp_p = cur_p
            cur_p = new_p
            new_p = tmp_p
    beta_out = np.empty(n_states)
    cdef double[::1] res = beta_out
    for t in range(n_states):
        res[t] = cur_p[t]
    return llr_arr, beta_out


def check_node(double[::1] lam, bint exact, qp):
    cdef Py_ssize_t w = lam.shape[0]
    cdef bint q_on
    cdef double q_scale, q_lo, q_hi
    _unpack_q(qp, &q_on, &q_scale, &q_lo, &q_hi)

    lo_arr = np.empty(w)
    alpha_arr = np.empty((w + 1, 2))
    cdef double[::1] lo = lo_arr
    cdef double[:, ::1] alpha = alpha_arr
    with nogil:
        _check_node_core(&lam[0], w, exact, q_on, q_scale, q_lo, q_hi,
                         &alpha[0, 0], &lo[0])
    return lo_arr


cdef void _check_node_core(const double* lam, Py_ssize_t w, bint exact,
                           bint q_on, double q_scale, double q_lo, double q_hi,
                           double* alpha, double* lo) noexcept nogil:
    # alpha is scratch of (w + 1) * 2 doubles
    cdef Py_ssize_t k
    cdef double m0, m1, b0, b1, c0, c1, a0, a1, out1, out2
    alpha[0] = 0.0
    alpha[1] = NEG_METRIC
    for k in range(w):
        m0 = _mstar(alpha[2 * k] + lam[k], alpha[2 * k + 1] - lam[k], exact)
        m1 = _mstar(alpha[2 * k] - lam[k], alpha[2 * k + 1] + lam[k], exact)
        if q_on:
            m0 = _quant(m0, q_scale, q_lo, q_hi)
            m1 = _quant(m1, q_scale, q_lo, q_hi)
        alpha[2 * (k + 1)] = m0
        alpha[2 * (k + 1) + 1] = m1
    b0 = 0.0
    b1 = NEG_METRIC
    for k in range(w - 1, -1, -1):
        a0 = alpha[2 * k]
        a1 = alpha[2 * k + 1]
        c0 = _mstar(b0 + lam[k], b1 - lam[k], exact)
        c1 = _mstar(b0 - lam[k], b1 + lam[k], exact)
        out1 = _mstar(a0 + b0, a1 + b1, exact)
        out2 = _mstar(a0 + b1, a1 + b0, exact)
        if q_on:
            c0 = _quant(c0, q_scale, q_lo, q_hi)
            c1 = _quant(c1, q_scale, q_lo, q_hi)
            out1 = _quant(out1, q_scale, q_lo, q_hi)
            out2 = _quant(out2, q_scale, q_lo, q_hi)
        lo[k] = out1 - out2
        b0 = c0
        b1 = c1


def layered_pass(double[::1] a, double[::1] lp,
                 cnp.int64_t[::1] row_ptr, cnp.int64_t[::1] col_idx,
                 bint exact, qp):
    """One full layered iteration over all rows, updating a and lp in place."""
    cdef Py_ssize_t n_rows = row_ptr.shape[0] - 1
    cdef bint q_on
    cdef double q_scale, q_lo, q_hi
    _unpack_q(qp, &q_on, &q_scale, &q_lo, &q_hi)

    cdef Py_ssize_t max_w = 0, j
    for j in range(n_rows):
        if row_ptr[j + 1] - row_ptr[j] > max_w:
            max_w = row_ptr[j + 1] - row_ptr[j]
    if n_rows == 0 or max_w == 0:
        return None

    li_arr = np.empty(max_w)
    lam_arr = np.empty(max_w)
    lo_arr = np.empty(max_w)
    scratch_arr = np.empty((max_w + 1) * 2)
    cdef double[::1] li = li_arr
    cdef double[::1] lam = lam_arr
    cdef double[::1] lo = lo_arr
    cdef double[::1] scratch = scratch_arr
    cdef Py_ssize_t k, w, base
    with nogil:
        for j in range(n_rows):
            base = row_ptr[j]
            w = row_ptr[j + 1] - base
            for k in range(w):
                li[k] = a[col_idx[base + k]] - lp[base + k]
                lam[k] = 0.5 * li[k]
            _check_node_core(&lam[0], w, exact, q_on, q_scale, q_lo, q_hi,
                             &scratch[0], &lo[0])
            for k in range(w):
                a[col_idx[base + k]] = li[k] + lo[k]
                lp[base + k] = lo[k]
    return None
