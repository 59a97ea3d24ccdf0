"""Random trees, their scaled distance matrices, and long-dendron limits."""

from .tree_core import (
    LcaIndex,
    RootedTree,
    TreeError,
    build_tree,
    distance,
    exact_distance_distribution,
    exact_mean_distance,
    from_preorder_degrees,
    max_outdegree_vertex,
    rho_r,
    sample_vertices,
)

__version__ = "0.1.0"
