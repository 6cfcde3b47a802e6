"""Exact solver for group-constrained totally unimodular feasibility.

The usual entry points are re-exported here; every module can also be used
on its own.
"""

from __future__ import annotations

from .groups import AbelianGroup, GroupElement, TargetSet
from .instances import GctufInstance, make_instance
from .ip_reduction import IpInstance, reduce_ip
from .oracle import brute_gctuf
from .rgctuf import SolverReport, solve, solve_with_report
from .tu_structure import decompose

__all__ = [
    "AbelianGroup",
    "GroupElement",
    "TargetSet",
    "GctufInstance",
    "make_instance",
    "IpInstance",
    "reduce_ip",
    "brute_gctuf",
    "SolverReport",
    "solve",
    "solve_with_report",
    "decompose",
]

__version__ = "0.1.0"
