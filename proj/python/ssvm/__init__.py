"""Streaming kernel-SVM toolkit: exact incremental/decremental training,
semi-online LASVM, a batch SMO baseline, synthetic pipe-scan data and
evaluation utilities."""

from ._ssvm import (
    Dataset,
    EpochSchedule,
    IsvmTrainer,
    KernelSpec,
    LasvmTrainer,
    Model,
    PipeScanConfig,
    eval_kernel,
    evaluate,
    generate_pipe_scan,
    load_dataset,
    save_sparse_text,
    shuffle_epoch,
    smo_solve,
    split,
)

__all__ = [
    "Dataset",
    "EpochSchedule",
    "IsvmTrainer",
    "KernelSpec",
    "LasvmTrainer",
    "Model",
    "PipeScanConfig",
    "eval_kernel",
    "evaluate",
    "generate_pipe_scan",
    "load_dataset",
    "save_sparse_text",
    "shuffle_epoch",
    "smo_solve",
    "split",
]

__version__ = "0.1.0"
