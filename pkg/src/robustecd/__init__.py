"""Community detection enhancement by graph rewiring.

Two enhancers wrap any community detector: a genetic algorithm that searches
for a modularity-improving rewiring, and a similarity ensemble that merges the
partitions of many similarity-guided rewirings.
"""

from ._kernels import BACKEND
from .adversarial import AttackConfig, ExtractionConfig, dm_deception, extract_missing_data_subgraph, q_attack
from .bench import ExperimentConfig, load_dataset, register_dataset, run_experiment
from .detectors import DetectorSpec, detect
from .errors import RobustECDError
from .ga import GAConfig, GAResult, run_ga
from .graph import Graph, ModificationScheme, Partition, read_edge_list, read_labels
from .metrics import MetricsReport, ari, modularity, nmi, rimp
from .se import SEConfig, run_se
from .similarity import KINDS, compute_similarity

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "KINDS", "AttackConfig", "DetectorSpec", "ExperimentConfig", "ExtractionConfig", "GAConfig",
    "GAResult", "Graph", "MetricsReport", "ModificationScheme", "Partition", "RobustECDError", "SEConfig",
    "ari", "compute_similarity", "detect", "dm_deception", "extract_missing_data_subgraph", "load_dataset",
    "modularity", "nmi", "q_attack", "read_edge_list", "read_labels", "register_dataset", "rimp",
    "run_experiment", "run_ga", "run_se",
]
