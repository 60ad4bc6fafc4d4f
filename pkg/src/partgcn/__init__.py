"""Partition-parallel GCN training with random boundary-node sampling."""

from .data import SbmSpec, generate_sbm, load_dataset, save_dataset
from .graph import Graph, SubgraphWithHalo, build_graph, induced_subgraph
from .partition import Assignment, load_assignment, partition_greedy, partition_random, save_assignment
from .plan import PartitionPlan, boundary_inner_ratios, build_plan, comm_volume, memory_estimate
from .runtime import TrainConfig, evaluate, train, train_reference
from .sampling import EpochSamplePlan, drop_edge_global, sample_boundary, sample_boundary_edges

__all__ = [
    "Assignment", "EpochSamplePlan", "Graph", "PartitionPlan", "SbmSpec", "SubgraphWithHalo",
    "TrainConfig", "boundary_inner_ratios", "build_graph", "build_plan", "comm_volume",
    "drop_edge_global", "evaluate", "generate_sbm", "induced_subgraph", "load_assignment",
    "load_dataset", "memory_estimate", "partition_greedy", "partition_random", "sample_boundary",
    "sample_boundary_edges", "save_assignment", "save_dataset", "train", "train_reference",
]
