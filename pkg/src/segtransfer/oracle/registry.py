"""Builds oracles from model registry entries."""

import logging

import numpy as np
import torch

from segtransfer.config.experiment import ModelRegistryEntry
from segtransfer.exceptions import RejectedInputError
from segtransfer.oracle.model_oracle import ModelOracle
from segtransfer.oracle.toy_conv import build_toy_conv
from segtransfer.oracle.toy_linear import ToyLinearSegmenter
from segtransfer.oracle.torch_segmenter import TorchSegmenter

logger = logging.getLogger(__name__)


def _toy_linear(entry: ModelRegistryEntry) -> ModelOracle:
    if entry.weights is not None:
        with np.load(entry.weights) as archive:
            weights = archive["weights"]
            biases = archive["biases"] if "biases" in archive else None
    else:
        params = entry.params or {}
        weights = np.asarray(params["weights"], dtype=np.float64)
        biases = params.get("biases")
    return ToyLinearSegmenter(weights, biases, identifier=entry.id, input_size=entry.input_size)


def _toy_conv(entry: ModelRegistryEntry) -> ModelOracle:
    params = dict(entry.params or {})
    module = build_toy_conv(
        params.pop("architecture", "plain"),
        in_channels=entry.in_channels,
        num_classes=entry.num_classes,
        hidden=int(params.pop("hidden", 16)),
        depth=int(params.pop("depth", 3)),
        seed=int(params.pop("seed", 0)),
    )
    if params:
        raise RejectedInputError(f"Unknown toy-conv params for '{entry.id}': {sorted(params)}")
    if entry.weights is not None:
        module.load_state_dict(torch.load(entry.weights, map_location="cpu", weights_only=True))
        logger.info(f"Loaded toy-conv weights for '{entry.id}' from {entry.weights}")
    return TorchSegmenter(
        module,
        num_classes=entry.num_classes,
        in_channels=entry.in_channels,
        identifier=entry.id,
        mean=entry.mean,
        std=entry.std,
        input_size=entry.input_size,
    )


def _external(entry: ModelRegistryEntry) -> ModelOracle:
    module = torch.jit.load(str(entry.weights), map_location="cpu")
    # TorchScript modules are not guaranteed to tolerate concurrent autograd calls
    return TorchSegmenter(
        module,
        num_classes=entry.num_classes,
        in_channels=entry.in_channels,
        identifier=entry.id,
        mean=entry.mean,
        std=entry.std,
        dtype=torch.float32,
        input_size=entry.input_size,
        exclusive=True,
    )


_ADAPTERS = {
    "toy-linear": _toy_linear,
    "toy-conv": _toy_conv,
    "external": _external,
}


def load_oracle(entry: ModelRegistryEntry) -> ModelOracle:
    """Instantiate the oracle a registry entry describes.

    Args:
        entry: Model registry entry

    Returns:
        The oracle

    Raises:
        RejectedInputError: If the entry cannot be turned into a model
    """
    try:
        oracle = _ADAPTERS[entry.adapter](entry)
    except RejectedInputError:
        raise
    except (KeyError, OSError, RuntimeError, TypeError, ValueError) as e:
        logger.error(f"Error loading model '{entry.id}': {str(e)}")
        raise RejectedInputError(f"Cannot load model '{entry.id}': {e}") from e
    return oracle
