"""End-to-end simulation: BPSK over AWGN, channel LLRs, BER/FER sweeps.

Randomness: every frame draws from its own Philox4x64 counter-based
stream keyed by (seed, 2*frame + lane), lane 0 for payload bits and
lane 1 for noise.  Frame sets are therefore identical across decoder
configurations and across sweep points (common random numbers), and
results do not depend on how frames are distributed over workers.
"""

from __future__ import annotations

import concurrent.futures
import io
from dataclasses import dataclass, field

import numpy as np

from .constants import bit_to_sign
from .errors import ConfigError, EncoderRankError
from .kernel import MaxStarMode, QuantSpec
from .ldpc_code import ParityCheckMatrix
from .ldpc_decoder import ldpc_decode, parity_check
from .trellis import Permutation, Trellis, turbo_encode
from .turbo import TurboTails, WindowConfig, turbo_decode

RNG_ID = "philox4x64:key=(seed<<1|lane)+frame<<1"

_LANE_PAYLOAD = 0
_LANE_NOISE = 1


def frame_rng(seed: int, frame: int, lane: int) -> np.random.Generator:
    key = (int(seed) << 64) | (int(frame) << 1) | lane
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class ChannelSpec:
    ebn0_db: float
    code_rate: float
    seed: int = 0

    @property
    def sigma2(self) -> float:
        # unit-energy BPSK: N0/2 per dimension
        return 1.0 / (2.0 * self.code_rate * 10.0 ** (self.ebn0_db / 10.0))


def bpsk_modulate(bits) -> np.ndarray:
    """0 -> +1.0, 1 -> -1.0 (consistent with the LLR sign convention)."""
    return bit_to_sign(bits)


def awgn(symbols, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    if sigma2 <= 0:
        raise ValueError("noise variance must be positive")
    symbols = np.asarray(symbols, dtype=np.float64)
    return symbols + np.sqrt(sigma2) * rng.standard_normal(symbols.size)


def channel_llr(y, sigma2: float) -> np.ndarray:
    if sigma2 <= 0:
        raise ValueError("noise variance must be positive")
    return 2.0 * np.asarray(y, dtype=np.float64) / sigma2


class LdpcEncoder:
    """Systematic GF(2) encoder from a one-time Gaussian elimination of H."""

    def __init__(self, h: ParityCheckMatrix):
        self.h = h
        dense = h.to_dense().astype(np.uint8)
        m, n = dense.shape
        pivots = []
        r = 0
        for c in range(n):
            rows = np.nonzero(dense[r:, c])[0]
            if rows.size == 0:
                continue
            pr = r + rows[0]
            dense[[r, pr]] = dense[[pr, r]]
            above_below = np.nonzero(dense[:, c])[0]
            for rr in above_below:
                if rr != r:
                    dense[rr] ^= dense[r]
            pivots.append(c)
            r += 1
            if r == m:
                break
        if r < m:
            raise EncoderRankError(
                f"H has rank {r} < {m}; systematic encoding impossible")
        self.pivot_cols = np.asarray(pivots)
        free = np.setdiff1d(np.arange(n), self.pivot_cols)
        self.free_cols = free
        self.reduced = dense  # RREF: x[pivot_r] = sum(reduced[r, free] * x[free])

    @property
    def message_len(self) -> int:
        return self.free_cols.size

    def encode(self, message) -> np.ndarray:
        message = np.asarray(message, dtype=np.uint8)
        if message.size != self.message_len:
            raise ValueError(
                f"message length {message.size} != {self.message_len}")
        x = np.zeros(self.h.N, dtype=np.int8)
        x[self.free_cols] = message
        par = (self.reduced[:, self.free_cols] @ message) % 2
        x[self.pivot_cols] = par
        return x


def ldpc_encode_or_zero(h: ParityCheckMatrix, message=None) -> np.ndarray:
    """All-zero codeword (valid for any linear code), or systematic encode."""
    if message is None:
        return np.zeros(h.N, dtype=np.int8)
    return LdpcEncoder(h).encode(message)


@dataclass(frozen=True)
class TurboSweepSpec:
    trellis: Trellis
    perm: Permutation
    iterations: int
    window: WindowConfig = WindowConfig()
    mode: MaxStarMode = MaxStarMode.MAXLOG
    quant: QuantSpec | None = None
    extrinsic_scale: float = 1.0

    @property
    def rate(self) -> float:
        k = self.perm.size
        return k / (3 * k + 4 * self.trellis.memory)


@dataclass(frozen=True)
class LdpcSweepSpec:
    h: ParityCheckMatrix
    max_iters: int
    mode: MaxStarMode = MaxStarMode.MAXLOG
    early_stop: bool = True
    quant: QuantSpec | None = None

    @property
    def rate(self) -> float:
        return (self.h.N - self.h.M) / self.h.N


@dataclass(frozen=True)
class SweepConfig:
    spec: TurboSweepSpec | LdpcSweepSpec
    ebn0_points: tuple
    frames_per_point: int
    seed: int = 0
    threads: int = 1
    fail_budget_fer: float | None = None
    code_id: str = ""

    def __post_init__(self):
        if len(self.ebn0_points) < 1:
            raise ConfigError("sweep needs at least one Eb/N0 point")
        if self.frames_per_point < 1:
            raise ConfigError("frame budget must be >= 1")
        if self.threads < 1:
            raise ConfigError("thread count must be >= 1")


@dataclass
class SweepPoint:
    ebn0_db: float
    frames: int
    bit_errors: int
    frame_errors: int
    iter_sum: int
    payload_bits: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.payload_bits

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames

    @property
    def avg_iterations(self) -> float:
        return self.iter_sum / self.frames


@dataclass
class SweepResult:
    points: list
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        out = io.StringIO()
        for key, value in self.metadata.items():
            out.write(f"# {key}={value}\n")
        out.write("ebn0_db,frames,bit_errors,ber,frame_errors,fer,avg_iterations\n")
        for p in self.points:
            out.write(f"{p.ebn0_db:g},{p.frames},{p.bit_errors},{p.ber:.6e},"
                      f"{p.frame_errors},{p.fer:.6e},{p.avg_iterations:.4f}\n")
        return out.getvalue()


def _turbo_frame(spec: TurboSweepSpec, sigma2: float, seed: int, frame: int):
    k = spec.perm.size
    payload = frame_rng(seed, frame, _LANE_PAYLOAD).integers(0, 2, size=k,
                                                             dtype=np.int8)
    cw = turbo_encode(payload, spec.trellis, spec.perm)
    y = awgn(bpsk_modulate(cw.stream()), sigma2,
             frame_rng(seed, frame, _LANE_NOISE))
    llr = channel_llr(y, sigma2)
    m = spec.trellis.memory
    l_sys, l_par1, l_par2 = llr[:k], llr[k:2 * k], llr[2 * k:3 * k]
    t = llr[3 * k:]
    tails = TurboTails(sys1=t[:m], par1=t[m:2 * m],
                       sys2=t[2 * m:3 * m], par2=t[3 * m:])
    res = turbo_decode(l_sys, l_par1, l_par2, tails, spec.perm, spec.trellis,
                       spec.window, spec.iterations, mode=spec.mode,
                       quant=spec.quant, extrinsic_scale=spec.extrinsic_scale)
    errs = int((res.hard_bits != payload).sum())
    return errs, int(errs > 0), res.iterations_run


def _ldpc_frame(spec: LdpcSweepSpec, sigma2: float, seed: int, frame: int):
    # all-zero codeword transmission, exact for the symmetric channel
    n = spec.h.N
    y = awgn(np.ones(n), sigma2, frame_rng(seed, frame, _LANE_NOISE))
    llr = channel_llr(y, sigma2)
    res = ldpc_decode(llr, spec.h, spec.max_iters, mode=spec.mode,
                      early_stop=spec.early_stop, quant=spec.quant)
    errs = int(res.hard_bits.sum())
    return errs, int(errs > 0), res.iterations_used


def _run_chunk(spec, sigma2: float, seed: int, lo: int, hi: int):
    frame_fn = _turbo_frame if isinstance(spec, TurboSweepSpec) else _ldpc_frame
    bit_errors = frame_errors = iter_sum = 0
    for f in range(lo, hi):
        be, fe, it = frame_fn(spec, sigma2, seed, f)
        bit_errors += be
        frame_errors += fe
        iter_sum += it
    return bit_errors, frame_errors, iter_sum


def run_sweep(config: SweepConfig) -> SweepResult:
    """Simulate every point; deterministic for a fixed seed and config,
    independent of the worker count (tallies merge associatively)."""
    spec = config.spec
    is_turbo = isinstance(spec, TurboSweepSpec)
    payload_len = spec.perm.size if is_turbo else spec.h.N
    points = []
    for ebn0 in config.ebn0_points:
        sigma2 = ChannelSpec(ebn0, spec.rate, config.seed).sigma2
        frames = config.frames_per_point
        if config.threads == 1:
            tally = _run_chunk(spec, sigma2, config.seed, 0, frames)
        else:
            n_chunks = min(frames, config.threads * 4)
            edges = np.linspace(0, frames, n_chunks + 1, dtype=int)
            with concurrent.futures.ProcessPoolExecutor(config.threads) as pool:
                futures = [pool.submit(_run_chunk, spec, sigma2, config.seed,
                                       int(lo), int(hi))
                           for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]
                parts = [f.result() for f in futures]
            tally = tuple(sum(col) for col in zip(*parts))
        points.append(SweepPoint(
            ebn0_db=float(ebn0), frames=frames, bit_errors=tally[0],
            frame_errors=tally[1], iter_sum=tally[2],
            payload_bits=frames * payload_len))
    meta = {
        "mode": "turbo" if is_turbo else "ldpc",
        "code": config.code_id or ("turbo" if is_turbo else "ldpc"),
        "seed": config.seed,
        "rng": RNG_ID,
        "frames_per_point": config.frames_per_point,
        "decoder": _describe_spec(spec),
    }
    return SweepResult(points=points, metadata=meta)


def _describe_spec(spec) -> str:
    if isinstance(spec, TurboSweepSpec):
        return (f"turbo k={spec.perm.size} iters={spec.iterations} "
                f"window={spec.window.window_len} "
                f"beta_init={spec.window.beta_init.value} "
                f"maxstar={spec.mode.name.lower()} "
                f"extrinsic_scale={spec.extrinsic_scale} "
                f"quant={_describe_quant(spec.quant)}")
    return (f"ldpc n={spec.h.N} m={spec.h.M} max_iters={spec.max_iters} "
            f"early_stop={spec.early_stop} maxstar={spec.mode.name.lower()} "
            f"quant={_describe_quant(spec.quant)}")


def _describe_quant(q: QuantSpec | None) -> str:
    return "off" if q is None else f"q{q.total_bits}.{q.frac_bits}"
