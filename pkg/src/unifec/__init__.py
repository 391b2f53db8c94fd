"""Turbo and LDPC decoding built on one shared pair of kernel operations."""

from .kernel import BACKEND, MaxStarMode, MetricPair, QuantSpec
from .instrument import OpCounters, OpKind, record, report, throughput_model

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "MaxStarMode", "MetricPair", "QuantSpec",
    "OpCounters", "OpKind", "record", "report", "throughput_model",
    "__version__",
]
