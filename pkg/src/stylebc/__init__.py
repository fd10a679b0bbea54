"""Trajectory-style imitation learning on 2D mazes.

The package covers the whole loop: maze simulation, scripted-expert
dataset synthesis, style-codebook behavior cloning (plain, per-style
and relabel-weighted), and the diversity / controllability /
robustness evaluation around it, plus a CLI and an HTTP service.
"""

from .dataset_io import load_dataset, save_dataset
from .env import Env, EnvConfig, variant_config
from .evaluation import (EvalConfig, Property, conditioned_styles,
                         control_report, density, evaluate, generate,
                         l1_distance)
from .experts import DatasetRecipe, bundled_recipe, generate_dataset
from .maze import MazeSpec, load_bundled, load_maze, parse_maze
from .neural import ArchConfig, Model, load_checkpoint, save_checkpoint
from .similarity import DissimilarityMatrix, dissimilarity_matrix
from .training import TrainConfig, train
from .types import Dataset, RngStream, Trajectory, behavior_of

__version__ = "0.1.0"

__all__ = [
    "ArchConfig", "Dataset", "DatasetRecipe", "DissimilarityMatrix",
    "Env", "EnvConfig", "EvalConfig", "MazeSpec", "Model", "Property",
    "RngStream", "TrainConfig", "Trajectory", "behavior_of",
    "bundled_recipe", "conditioned_styles", "control_report", "density",
    "dissimilarity_matrix", "evaluate", "generate", "generate_dataset",
    "l1_distance", "load_bundled", "load_checkpoint", "load_dataset",
    "load_maze", "parse_maze", "save_checkpoint", "save_dataset", "train",
    "variant_config", "__version__",
]
