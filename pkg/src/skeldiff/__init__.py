"""Schema skeleton induction from event graphs by latent denoising."""

from .data import (
    SyntheticSpec,
    corpus_stats,
    generate_synthetic_corpus,
    load_dataset,
    register_adapter,
    save_dataset,
)
from .diffusion import NoiseSchedule, build_schedule, sample_x0, sample_xt
from .estimator import FrequencyBasedSampler, SchemaDiffusionModel
from .exceptions import ConfigError, DataError, NumericError, SkeldiffError
from .fbs import EdgeFrequencyTable, count_frequencies, fbs_schema
from .generation import GenerationConfig, generate_candidates, generate_one, select_schema
from .graphs import (
    InstanceGraph,
    SortedGraph,
    augment_by_resorting,
    to_instance_graph,
    topological_sort,
    truncate_to_limit,
)
from .metrics import MetricsReport, evaluate, event_seq_f1, event_type_f1
from .network import (
    EventDenoiser,
    NetworkConfig,
    load_checkpoint,
    parameter_fingerprint,
    save_checkpoint,
)
from .ontology import PAD_TYPE, EventOntology
from .schema import Schema, load_schema, save_schema
from .training import TrainConfig, TrainReport, train

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "EdgeFrequencyTable",
    "EventDenoiser",
    "EventOntology",
    "FrequencyBasedSampler",
    "GenerationConfig",
    "InstanceGraph",
    "MetricsReport",
    "NetworkConfig",
    "NoiseSchedule",
    "NumericError",
    "PAD_TYPE",
    "Schema",
    "SchemaDiffusionModel",
    "SkeldiffError",
    "SortedGraph",
    "SyntheticSpec",
    "TrainConfig",
    "TrainReport",
    "augment_by_resorting",
    "build_schedule",
    "corpus_stats",
    "count_frequencies",
    "evaluate",
    "event_seq_f1",
    "event_type_f1",
    "fbs_schema",
    "generate_candidates",
    "generate_one",
    "generate_synthetic_corpus",
    "load_checkpoint",
    "load_dataset",
    "load_schema",
    "parameter_fingerprint",
    "register_adapter",
    "sample_x0",
    "sample_xt",
    "save_checkpoint",
    "save_dataset",
    "save_schema",
    "select_schema",
    "to_instance_graph",
    "topological_sort",
    "train",
    "truncate_to_limit",
]
