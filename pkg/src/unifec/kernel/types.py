"""Value types shared by both kernel backends."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple


class MetricPair(NamedTuple):
    """Log-domain metrics of the two states of one butterfly / supercode."""

    m0: float
    m1: float


class MaxStarMode(enum.IntEnum):
    """max* selection: plain max, or max with the Jacobian correction."""

    MAXLOG = 0
    EXACT = 1


@dataclass(frozen=True)
class QuantSpec:
    """Two's-complement fixed-point format applied after each kernel op.

    ``frac_bits`` of fraction inside ``total_bits`` total, always saturating.
    """

    total_bits: int
    frac_bits: int
    enabled: bool = True

    def __post_init__(self):
        if not (0 < self.frac_bits < self.total_bits <= 32):
            raise ValueError(
                f"need 0 < frac_bits < total_bits <= 32, "
                f"got total={self.total_bits} frac={self.frac_bits}")

    @property
    def scale(self) -> float:
        return float(1 << self.frac_bits)

    @property
    def lo(self) -> float:
        return -float(1 << (self.total_bits - 1)) / self.scale

    @property
    def hi(self) -> float:
        return float((1 << (self.total_bits - 1)) - 1) / self.scale
