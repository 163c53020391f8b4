from ._backend import BACKEND
from .model import (
    DEFAULT_MAX_STEPS,
    DEFAULT_WEIGHT_FLOOR,
    DiffusionConfig,
    DiffusionTrace,
    Simulator,
    Snapshot,
    coverage,
    edge_usage_distribution,
    infection_probability,
    run,
    snapshot_first_k,
    transmission_probabilities,
)

__all__ = [
    "BACKEND",
    "DEFAULT_MAX_STEPS",
    "DEFAULT_WEIGHT_FLOOR",
    "DiffusionConfig",
    "DiffusionTrace",
    "Simulator",
    "Snapshot",
    "coverage",
    "edge_usage_distribution",
    "infection_probability",
    "run",
    "snapshot_first_k",
    "transmission_probabilities",
]
