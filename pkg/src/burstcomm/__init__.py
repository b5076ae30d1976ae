"""Burst-communication compiler for distributed quantum programs."""
from .ir import Circuit, CircuitError, Gate, commutes, decompose_to_basis
from .partition import Partition, interaction_graph, partition
from .aggregate import CommBlock, aggregate

__version__ = "0.1.0"
