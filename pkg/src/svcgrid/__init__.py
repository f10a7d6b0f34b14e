"""Support vector clustering with grid-based cluster labeling.

A ball enclosing kernel-mapped data is fitted through its dual; clusters
are the connected in-ball regions of a 2-D projection, found on a hashed
lattice (or, for comparison, by segment tests between neighbouring points).
"""
__version__ = "0.1.0"

from .data import (DataMatrix, FormatError, ParseError, TermDataset, build_feature_matrix, load_matrix,
                   load_terms, parse_tag, save_matrix, tokenize_term)
from .datasets import load_iris, sample_terms, sporulation_terms
from .evaluation import bench_labeling, class_distribution, precision
from .kernels import (KernelKind, KernelMatrix, LevenshteinWeights, build_kernel_matrix, gaussian_kernel, jaccard,
                      levenshtein, string_kernel)
from .labeling import (ClusterAssignment, GridLabeling, RadiusField, build_adjacency, label_grid,
                       label_knn_adjacency, label_mst_adjacency)
from .optimize import BallProblem, SvcModel, is_inside, radius_sq, solve_dual
from .pipeline import PRESETS, SvcParams, SvcResult, find_svc_model
from .projection import Projection2D, coa, project

__all__ = [
    "DataMatrix", "TermDataset", "FormatError", "ParseError", "load_matrix", "save_matrix", "load_terms",
    "parse_tag", "tokenize_term", "build_feature_matrix",
    "load_iris", "sample_terms", "sporulation_terms",
    "KernelKind", "KernelMatrix", "LevenshteinWeights", "build_kernel_matrix", "gaussian_kernel", "jaccard",
    "levenshtein", "string_kernel",
    "BallProblem", "SvcModel", "solve_dual", "radius_sq", "is_inside",
    "Projection2D", "project", "coa",
    "ClusterAssignment", "GridLabeling", "RadiusField", "label_grid", "build_adjacency", "label_knn_adjacency",
    "label_mst_adjacency",
    "precision", "class_distribution", "bench_labeling",
    "SvcParams", "SvcResult", "find_svc_model", "PRESETS",
]
