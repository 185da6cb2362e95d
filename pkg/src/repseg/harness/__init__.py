from .folds import FoldSplit, make_folds
from .synth import SynthParams, synth_generate
from .experiment import (
    ExperimentConfig,
    ExperimentResult,
    FoldResult,
    Sample,
    config_from_json_dict,
    config_hash,
    config_to_json_dict,
    load_benchmark_config,
    load_dataset,
    predict_sample,
    run_experiment,
    run_fold,
    samples_from_pairs,
    write_dataset,
)

__all__ = [
    "FoldSplit",
    "make_folds",
    "SynthParams",
    "synth_generate",
    "ExperimentConfig",
    "ExperimentResult",
    "FoldResult",
    "Sample",
    "config_from_json_dict",
    "config_hash",
    "config_to_json_dict",
    "load_benchmark_config",
    "load_dataset",
    "predict_sample",
    "run_experiment",
    "run_fold",
    "samples_from_pairs",
    "write_dataset",
]
