"""Dataset ingestion, transfer experiments and result containers."""

from segtransfer.harness.dataset import load_dataset
from segtransfer.harness.experiment import (
    TransferService,
    derive_seed,
    evaluate_models,
    run_transfer_experiment,
)
from segtransfer.harness.results import ImageQuality, SweepRow, TransferCell, TransferMatrix
from segtransfer.harness.sweep import run_iteration_sweep

__all__ = [
    "load_dataset",
    "TransferService",
    "derive_seed",
    "evaluate_models",
    "run_transfer_experiment",
    "run_iteration_sweep",
    "ImageQuality",
    "SweepRow",
    "TransferCell",
    "TransferMatrix",
]
