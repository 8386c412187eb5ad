"""Steiner tree search guided by a graph neural network.

Exact (Dreyfus-Wagner) and 2-approximation baselines, random instance
generators, a numpy SE-GNN with manual backpropagation, PUCT tree search and
a benchmark harness.
"""

from .approx import two_approximation
from .exact import brute_force_solve, exact_solve
from .generators import GeneratorConfig, generate, make_dataset
from .gnn import ModelConfig, SEGNN, load_checkpoint, save_checkpoint
from .graph import InvalidSolution, SteinerInstance, SteinerTree, check_solution, validate_solution
from .io import load_instance, parse_stp, serialize_stp
from .mcts import GuidedSearch, run_search
from .training import TrainingSample, expand_permutations, label_instances, train

__version__ = "0.1.0"

__all__ = [
    "GeneratorConfig", "GuidedSearch", "InvalidSolution", "ModelConfig", "SEGNN", "SteinerInstance",
    "SteinerTree", "TrainingSample", "brute_force_solve", "check_solution", "exact_solve",
    "expand_permutations", "generate", "label_instances", "load_checkpoint", "load_instance",
    "make_dataset", "parse_stp", "run_search", "save_checkpoint", "serialize_stp", "train",
    "two_approximation", "validate_solution",
]
