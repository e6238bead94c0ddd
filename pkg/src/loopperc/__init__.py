"""Random loop model toolkit: loop decomposition, blocking edges, samplers,
percolation estimates and the blocking-domination bound."""

__version__ = "0.1.0"

from .config import CROSS, DOUBLE_BAR, LinkConfig, Params, log_weight
from .graph import Graph, GraphError, build_box, build_from_edge_list, neighborhood
from .loops import LoopDecomposition, connected_by_loop, decompose
from .blocking import EdgeIndicators, indicators, is_blocking
from .sampler import MetropolisChain, SamplerConfig, sample_direct_theta1
from .oracle import GuardError, enumerate_configs, naive_trace
from .percolation import InvariantError, clusters_from_edges, clusters_from_loops, decay_profile
from .domination import DeltaInputs, build_coupling, delta, verify_theorem1_exact

__all__ = [
    "CROSS", "DOUBLE_BAR", "LinkConfig", "Params", "log_weight",
    "Graph", "GraphError", "build_box", "build_from_edge_list", "neighborhood",
    "LoopDecomposition", "connected_by_loop", "decompose",
    "EdgeIndicators", "indicators", "is_blocking",
    "MetropolisChain", "SamplerConfig", "sample_direct_theta1",
    "GuardError", "enumerate_configs", "naive_trace",
    "InvariantError", "clusters_from_edges", "clusters_from_loops", "decay_profile",
    "DeltaInputs", "build_coupling", "delta", "verify_theorem1_exact",
]
