"""Recursive systematic convolutional trellis machinery.

Covers trellis construction from (feedback, forward) polynomials, the
butterfly decomposition that feeds the shared kernel, branch-metric pair
construction, encoders for test-vector generation, and permutations
(quadratic permutation polynomial or file-based) for the turbo code.

Polynomials are integers with bit i holding the coefficient of D^i.
Octal notation in config files reads most-significant-first, e.g. for
memory 3 the pair (13, 15) octal is feedback 1+D^2+D^3, forward 1+D+D^3.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ButterflyError, ConfigError

DEFAULT_MEMORY = 3
DEFAULT_FEEDBACK_OCT = "13"
DEFAULT_FORWARD_OCT = "15"


def poly_from_octal(octal: str, memory: int) -> int:
    """Octal string (MSB-first generator notation) -> bit-i-is-D^i integer."""
    v = int(str(octal), 8)
    if v >= (1 << (memory + 1)):
        raise ConfigError(f"octal polynomial {octal} exceeds degree {memory}")
    return sum(((v >> (memory - i)) & 1) << i for i in range(memory + 1))


@dataclass(frozen=True)
class TrellisEdge:
    start_state: int
    end_state: int
    u: int  # input bit label
    c: int  # parity bit label


class GammaKind(enum.IntEnum):
    G1 = 0  # edge metric is +/-(l_sys_apriori + l_parity)
    G2 = 1  # edge metric is +/-(l_parity - l_sys_apriori)


@dataclass(frozen=True, eq=False)
class Trellis:
    memory: int
    feedback_poly: int
    forward_poly: int
    num_states: int
    edges: tuple
    next_state: np.ndarray = field(repr=False)  # (num_states, 2) int32
    parity: np.ndarray = field(repr=False)      # (num_states, 2) int8


@dataclass(frozen=True)
class ButterflyPair:
    prev_states: tuple
    next_states: tuple
    gamma_kind: GammaKind
    # sign_pattern[i][j] is the sign of gamma on the edge prev[i] -> next[j]
    sign_pattern: tuple


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


def build_rsc_trellis(feedback_poly: int, forward_poly: int, memory: int) -> Trellis:
    """Enumerate the full state-transition structure of an RSC encoder."""
    if memory < 1:
        raise ValueError(f"memory must be >= 1, got {memory}")
    if not feedback_poly & 1:
        raise ValueError("feedback polynomial must have constant term 1")
    limit = 1 << (memory + 1)
    if not (0 < feedback_poly < limit) or not (0 < forward_poly < limit):
        raise ValueError("polynomial degree exceeds the encoder memory")

    num_states = 1 << memory
    fb_taps = feedback_poly >> 1  # taps on register bits d1..dm
    fwd_taps = forward_poly >> 1
    fwd_const = forward_poly & 1

    next_state = np.zeros((num_states, 2), dtype=np.int32)
    parity = np.zeros((num_states, 2), dtype=np.int8)
    edges = []
    for s in range(num_states):
        fb = _parity(s & fb_taps)
        for u in (0, 1):
            a = u ^ fb
            c = (fwd_const & a) ^ _parity(s & fwd_taps)
            nxt = ((s << 1) | a) & (num_states - 1)
            next_state[s, u] = nxt
            parity[s, u] = c
            edges.append(TrellisEdge(s, nxt, u, c))
    return Trellis(memory=memory, feedback_poly=feedback_poly,
                   forward_poly=forward_poly, num_states=num_states,
                   edges=tuple(edges), next_state=next_state, parity=parity)


def default_trellis() -> Trellis:
    return build_rsc_trellis(
        poly_from_octal(DEFAULT_FEEDBACK_OCT, DEFAULT_MEMORY),
        poly_from_octal(DEFAULT_FORWARD_OCT, DEFAULT_MEMORY),
        DEFAULT_MEMORY)


def _edge_gamma(u: int, c: int):
    """(kind, sign) of the edge metric sign_u*A + sign_c*P."""
    if u == c:
        return GammaKind.G1, (1 if u == 0 else -1)
    return GammaKind.G2, (1 if u == 1 else -1)


def derive_butterflies(t: Trellis):
    """Partition the trellis into butterflies of a single gamma kind each.

    Previous states pairing differ only in the oldest register bit; the
    pair maps onto the two next states differing in the newest bit.  Each
    resulting 2x2 subgraph must carry metrics {+g, -g} of one gamma kind
    in the cross pattern, which holds whenever the forward polynomial has
    both its constant and degree-`memory` terms.
    """
    half = t.num_states >> 1
    butterflies = []
    covered = 0
    for p0 in range(half):
        p1 = p0 | half
        kinds = set()
        for p in (p0, p1):
            for u in (0, 1):
                kinds.add(_edge_gamma(u, int(t.parity[p, u]))[0])
        if len(kinds) != 1:
            raise ButterflyError(
                f"states ({p0},{p1}) mix gamma kinds; trellis is not "
                f"butterfly-decomposable")
        kind = kinds.pop()
        u_plus = 0 if kind == GammaKind.G1 else 1
        q0 = int(t.next_state[p0, u_plus])
        q1 = int(t.next_state[p0, 1 - u_plus])
        # verify the cross pattern edge by edge
        sign = {}
        for p in (p0, p1):
            for u in (0, 1):
                _, s = _edge_gamma(u, int(t.parity[p, u]))
                sign[(p, int(t.next_state[p, u]))] = s
        expect = {(p0, q0): 1, (p0, q1): -1, (p1, q0): -1, (p1, q1): 1}
        if sign != expect:
            raise ButterflyError(
                f"states ({p0},{p1}) do not form the +/-gamma cross pattern")
        butterflies.append(ButterflyPair(
            prev_states=(p0, p1), next_states=(q0, q1), gamma_kind=kind,
            sign_pattern=((1, -1), (-1, 1))))
        covered += 4
    if covered != len(t.edges):
        raise ButterflyError("butterflies do not cover the edge set")
    return butterflies


def butterfly_tables(butterflies):
    """Wiring arrays for the sweep loops: prev (B,2), next (B,2), kind (B,)."""
    prev = np.array([b.prev_states for b in butterflies], dtype=np.int32)
    nxt = np.array([b.next_states for b in butterflies], dtype=np.int32)
    kind = np.array([int(b.gamma_kind) for b in butterflies], dtype=np.int32)
    return prev, nxt, kind


def branch_metric_pair(l_sys_apriori: float, l_parity: float):
    """The two materialized branch metrics; the other two are their negatives."""
    return l_sys_apriori + l_parity, -l_sys_apriori + l_parity


def rsc_encode(bits, t: Trellis, terminate: bool = True):
    """Run the encoder; returns (parity, (tail_input_bits, tail_parity_bits)).

    With ``terminate`` the final ``memory`` steps feed the input that
    drives the feedback to zero, ending in state 0.
    """
    bits = np.asarray(bits, dtype=np.int8)
    if bits.size == 0:
        raise ValueError("cannot encode an empty bit sequence")
    fb_taps = t.feedback_poly >> 1
    parity = np.empty(bits.size, dtype=np.int8)
    s = 0
    for k, u in enumerate(bits):
        parity[k] = t.parity[s, u]
        s = int(t.next_state[s, u])
    if not terminate:
        return parity, (np.zeros(0, dtype=np.int8), np.zeros(0, dtype=np.int8))
    tail_u = np.empty(t.memory, dtype=np.int8)
    tail_p = np.empty(t.memory, dtype=np.int8)
    for j in range(t.memory):
        u = _parity(s & fb_taps)  # cancels the feedback, shifting in 0
        tail_u[j] = u
        tail_p[j] = t.parity[s, u]
        s = int(t.next_state[s, u])
    assert s == 0
    return parity, (tail_u, tail_p)


@dataclass(frozen=True)
class TurboCodeword:
    systematic: np.ndarray
    parity1: np.ndarray
    parity2: np.ndarray
    tail_sys1: np.ndarray
    tail_par1: np.ndarray
    tail_sys2: np.ndarray
    tail_par2: np.ndarray

    @property
    def k(self) -> int:
        return self.systematic.size

    @property
    def total_bits(self) -> int:
        return (self.systematic.size + self.parity1.size + self.parity2.size
                + self.tail_sys1.size + self.tail_par1.size
                + self.tail_sys2.size + self.tail_par2.size)

    def stream(self) -> np.ndarray:
        """Canonical serialization order used by the CLI and the channel."""
        return np.concatenate([
            self.systematic, self.parity1, self.parity2,
            self.tail_sys1, self.tail_par1, self.tail_sys2, self.tail_par2])


def turbo_encode(bits, t: Trellis, perm: "Permutation") -> TurboCodeword:
    """Parallel concatenation: two independently terminated RSC encoders."""
    bits = np.asarray(bits, dtype=np.int8)
    if bits.size != perm.size:
        raise ValueError(f"payload length {bits.size} != interleaver size {perm.size}")
    p1, (ts1, tp1) = rsc_encode(bits, t, terminate=True)
    p2, (ts2, tp2) = rsc_encode(perm.interleave(bits), t, terminate=True)
    return TurboCodeword(systematic=bits, parity1=p1, parity2=p2,
                         tail_sys1=ts1, tail_par1=tp1,
                         tail_sys2=ts2, tail_par2=tp2)


class Permutation:
    """Bijection on 0..K-1 with its inverse; interleave(x)[i] = x[map[i]]."""

    def __init__(self, mapping):
        mapping = np.asarray(mapping, dtype=np.int64)
        k = mapping.size
        if k < 2:
            raise ValueError("permutation size must be >= 2")
        counts = np.bincount(mapping, minlength=k) if mapping.min() >= 0 else None
        if counts is None or mapping.max() >= k or not (counts == 1).all():
            raise ValueError("mapping is not a bijection on 0..K-1")
        inverse = np.empty(k, dtype=np.int64)
        inverse[mapping] = np.arange(k, dtype=np.int64)
        self.size = k
        self.mapping = mapping
        self.inverse = inverse

    def interleave(self, x):
        x = np.asarray(x)
        if x.shape[0] != self.size:
            raise ValueError(f"sequence length {x.shape[0]} != {self.size}")
        return x[self.mapping]

    def deinterleave(self, y):
        y = np.asarray(y)
        if y.shape[0] != self.size:
            raise ValueError(f"sequence length {y.shape[0]} != {self.size}")
        return y[self.inverse]


def qpp_interleaver(k: int, f1: int, f2: int) -> Permutation:
    """map(i) = (f1*i + f2*i^2) mod K, verified bijective."""
    if k < 2:
        raise ValueError("K must be >= 2")
    if f1 < 0 or f2 < 0:
        raise ValueError("f1, f2 must be nonnegative")
    i = np.arange(k, dtype=np.int64)
    mapping = (f1 * i + f2 * i * i) % k
    try:
        return Permutation(mapping)
    except ValueError:
        raise ValueError(f"QPP (K={k}, f1={f1}, f2={f2}) is not bijective") from None


def identity_permutation(k: int) -> Permutation:
    return Permutation(np.arange(k, dtype=np.int64))


def load_permutation(path) -> Permutation:
    """One 0-based index per line."""
    with open(path, "r", encoding="ascii") as fh:
        idx = [int(line) for line in fh if line.strip()]
    return Permutation(idx)
