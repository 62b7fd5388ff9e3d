"""Jitter monitoring for software-defined networks.

A deterministic discrete-event simulator of a linear switch topology, two
families of jitter estimators (controller counter polling and data-plane
windowed deviation under fixed-point constraints), and DTW scoring of the
estimates against end-to-end ground truth.
"""

from jittermon.core import (
    NS_PER_S,
    NS_PER_US,
    FixedDelay,
    JitterSeries,
    Packet,
    fixed_shr,
    fixed_sub_abs,
    seconds,
)

__all__ = [
    "NS_PER_S",
    "NS_PER_US",
    "FixedDelay",
    "JitterSeries",
    "Packet",
    "fixed_shr",
    "fixed_sub_abs",
    "seconds",
]

__version__ = "0.1.0"
