"""Hybrid quantum-classical ant colony optimisation for the TSP."""

from .aco import AcoConfig, aco_solve
from .cluster import decompose, hierarchical_solve, kmeans, recombine
from .errors import ConfigError, DecompositionRequired, TsplibParseError
from .pheromone import QacoConfig, SolveResult, qaco_solve
from .qsim import NoiseModel, NoisePlacement, NoiseSpec
from .tspio import Metric, TspInstance, load_tsplib, parse_tsplib, random_instance, tour_length

__version__ = "0.1.0"

__all__ = [
    "AcoConfig",
    "ConfigError",
    "DecompositionRequired",
    "Metric",
    "NoiseModel",
    "NoisePlacement",
    "NoiseSpec",
    "QacoConfig",
    "SolveResult",
    "TspInstance",
    "TsplibParseError",
    "aco_solve",
    "decompose",
    "hierarchical_solve",
    "kmeans",
    "load_tsplib",
    "parse_tsplib",
    "qaco_solve",
    "random_instance",
    "recombine",
    "tour_length",
]
