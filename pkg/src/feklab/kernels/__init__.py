"""Integration kernels: per-element loop-order variants and the batch driver."""

from .batched import BatchResult, TrafficCounters, integrate_batch
from .counts import (
    PhaseOpCounts,
    access_breakdown,
    global_accesses,
    phase_op_counts,
)
from .scalar import integrate_element

__all__ = [
    "BatchResult",
    "TrafficCounters",
    "integrate_batch",
    "integrate_element",
    "PhaseOpCounts",
    "access_breakdown",
    "global_accesses",
    "phase_op_counts",
]
