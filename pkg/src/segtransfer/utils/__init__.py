"""Utility functions for segtransfer."""

from segtransfer.utils.logger import setup_logging, setup_logging_from_settings
from segtransfer.utils.validation import (
    validate_experiment_config,
    validate_image_label_pair,
    validate_model_entry,
)

__all__ = [
    "setup_logging",
    "setup_logging_from_settings",
    "validate_experiment_config",
    "validate_image_label_pair",
    "validate_model_entry",
]
