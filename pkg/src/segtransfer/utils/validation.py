"""Validation utilities for inputs and experiment configurations."""

import logging
from typing import Any, Dict, List, Optional

from segtransfer.oracle.types import ImageTensor, LabelMap

logger = logging.getLogger(__name__)


def validate_image_label_pair(image: ImageTensor, labels: LabelMap) -> Dict[str, Any]:
    """Validate an image/label pair and report any issues.

    Args:
        image: Image to check
        labels: Labels that should pair with ``image``

    Returns:
        Dictionary with validation results
    """
    issues = []

    if image.spatial_shape != labels.shape:
        issues.append(f"Image spatial shape {image.spatial_shape} differs from labels {labels.shape}")

    if not labels.valid_mask.any():
        issues.append("Every label pixel carries the ignore index")

    return {
        "is_valid": len(issues) == 0,
        "issues": issues
    }


def validate_model_entry(entry, prefix: str = "model", num_classes: Optional[int] = None) -> Dict[str, Any]:
    """Cross-field checks on one model registry entry.

    Args:
        entry: ModelRegistryEntry to check
        prefix: Location reported in front of each issue
        num_classes: Class count the entry must agree with, if known

    Returns:
        Dictionary with validation results
    """
    issues: List[str] = []

    if entry.weights is not None and not entry.weights.is_file():
        issues.append(f"{prefix}.weights: file {entry.weights} does not exist")
    if entry.adapter == "toy-linear" and entry.weights is None:
        if not entry.params or "weights" not in entry.params:
            issues.append(f"{prefix}.params: toy-linear needs inline 'weights' or a weights file")
    if entry.adapter == "external" and entry.weights is None:
        issues.append(f"{prefix}.weights: external models need a TorchScript file")
    if entry.adapter in ("toy-conv", "external") and entry.num_classes is None:
        issues.append(f"{prefix}.num_classes: required for {entry.adapter} models")
    if num_classes is not None and entry.num_classes is not None and entry.num_classes != num_classes:
        issues.append(
            f"{prefix}.num_classes: {entry.num_classes} differs from "
            f"dataset.num_classes {num_classes}"
        )
    for stats in ("mean", "std"):
        values = getattr(entry, stats)
        if values is not None and len(values) != entry.in_channels:
            issues.append(f"{prefix}.{stats}: expected {entry.in_channels} values, got {len(values)}")

    return {
        "is_valid": len(issues) == 0,
        "issues": issues
    }


def validate_experiment_config(config) -> Dict[str, Any]:
    """Cross-field checks on an already parsed ExperimentConfig.

    Args:
        config: ExperimentConfig to check

    Returns:
        Dictionary with validation results
    """
    from segtransfer.attacks.registry import ATTACKS

    issues: List[str] = []

    model_ids = [entry.id for entry in config.models]
    duplicates = sorted({model_id for model_id in model_ids if model_ids.count(model_id) > 1})
    if duplicates:
        issues.append(f"models: duplicate ids {duplicates}")

    for role in ("sources", "targets"):
        for model_id in getattr(config, role):
            if model_id not in model_ids:
                issues.append(f"{role}: '{model_id}' is not a registered model id")

    keys = []
    for i, attack in enumerate(config.attacks):
        if attack.name not in ATTACKS:
            issues.append(
                f"attacks.{i}.name: unknown attack '{attack.name}' "
                f"(registered: {', '.join(ATTACKS)})"
            )
        keys.append(attack.key)
    repeated = sorted({key for key in keys if keys.count(key) > 1})
    if repeated:
        issues.append(f"attacks: duplicate labels {repeated}; set 'label' to disambiguate")

    if not config.dataset.images_dir.is_dir():
        issues.append(f"dataset.images_dir: directory {config.dataset.images_dir} does not exist")
    if not config.dataset.labels_dir.is_dir():
        issues.append(f"dataset.labels_dir: directory {config.dataset.labels_dir} does not exist")

    for i, entry in enumerate(config.models):
        issues.extend(validate_model_entry(
            entry, prefix=f"models.{i} ({entry.id})", num_classes=config.dataset.num_classes
        )["issues"])

    if issues:
        logger.debug(f"Experiment config has {len(issues)} issues")
    return {
        "is_valid": len(issues) == 0,
        "issues": issues
    }
