"""Adversarial finite-sum instances, an exact proximal incremental oracle, and benchmarks."""

from .instances import FiniteSumInstance, from_descriptor
from .oracle import PifoResponse, QueryCounter, pifo

__all__ = ["FiniteSumInstance", "PifoResponse", "QueryCounter", "from_descriptor", "pifo"]
