"""Fully dynamic approximate matching through fractional matchings and sampled kernels."""

from .engine import Engine, UpdateReport
from .graph import DynamicGraph, Matching, edge, matching_is_valid
from .mwm import MWMEngine, class_of, greedy_merge
from .partition import LevelState, PartitionParams, derive_cd

__all__ = [
    "DynamicGraph",
    "Engine",
    "LevelState",
    "MWMEngine",
    "Matching",
    "PartitionParams",
    "UpdateReport",
    "class_of",
    "derive_cd",
    "edge",
    "greedy_merge",
    "matching_is_valid",
]

__version__ = "0.1.0"
