"""Samplers for random and deterministic tree families."""

from .attachment import bary, port, rrt, sample_preferential_attachment
from .cmj import BirthSpec, GapLaw, sample_cmj_tree
from .deterministic import complete_bary, path, star, superstar
from .galton_watson import (
    InfeasibleSize,
    RejectionCapExceeded,
    cycle_lemma_rotate,
    sample_conditioned_gw,
)
from .models import make_source
from .offspring import DEFAULT_TYPE_II, OffspringSpec
from .simply_generated import SimplyGeneratedSampler, factorial_log_weights, sample_simply_generated_exact
from .split_trees import SplitSpec, sample_bst, sample_split_tree

__all__ = [
    "BirthSpec", "DEFAULT_TYPE_II", "GapLaw", "InfeasibleSize", "OffspringSpec",
    "RejectionCapExceeded", "SimplyGeneratedSampler", "SplitSpec", "bary",
    "complete_bary", "cycle_lemma_rotate", "factorial_log_weights", "make_source",
    "path", "port", "rrt", "sample_bst", "sample_cmj_tree", "sample_conditioned_gw",
    "sample_preferential_attachment", "sample_simply_generated_exact",
    "sample_split_tree", "star", "superstar",
]
