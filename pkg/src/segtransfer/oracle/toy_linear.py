"""Per-pixel linear segmenter with closed-form gradients."""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy.special import log_softmax, softmax

from segtransfer.exceptions import RejectedInputError
from segtransfer.oracle.model_oracle import ModelOracle

logger = logging.getLogger(__name__)


class ToyLinearSegmenter(ModelOracle):
    """Segmenter whose logits at pixel (u, v) are ``x_uv · weights + biases``.

    Every pixel is classified independently, which makes the input gradient
    available in closed form. Used as a test fixture and in desk-scale runs.
    """

    def __init__(
        self,
        weights: np.ndarray,
        biases: Optional[np.ndarray] = None,
        identifier: str = "toy-linear",
        input_size: Optional[Tuple[int, int]] = None
    ):
        """Initialize the segmenter.

        Args:
            weights: Array of shape (C, num_classes)
            biases: Array of shape (num_classes,); zeros when omitted
            identifier: Model identifier used in logs and results
            input_size: Optional fixed (H, W) the model accepts
        """
        weights = np.asarray(weights, dtype=np.float64)
        if weights.ndim != 2:
            raise RejectedInputError(f"weights must have shape (C, K), got {weights.shape}")
        if biases is None:
            biases = np.zeros(weights.shape[1])
        biases = np.asarray(biases, dtype=np.float64)
        if biases.shape != (weights.shape[1],):
            raise RejectedInputError(
                f"biases must have shape ({weights.shape[1]},), got {biases.shape}"
            )
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(biases))):
            raise RejectedInputError("weights and biases must be finite")

        self.weights = weights
        self.biases = biases
        self.identifier = identifier
        self.in_channels = weights.shape[0]
        self.num_classes = weights.shape[1]
        self.input_size = tuple(input_size) if input_size else None
        logger.info(
            f"Initialized ToyLinearSegmenter '{identifier}' "
            f"with {self.in_channels} channels and {self.num_classes} classes"
        )

    def logits(self, image: np.ndarray) -> np.ndarray:
        return image @ self.weights + self.biases

    def weighted_loss_and_grad(
        self,
        image: np.ndarray,
        labels: np.ndarray,
        weights: np.ndarray,
        normalizer: float
    ) -> Tuple[float, np.ndarray]:
        logits = self.logits(image)
        one_hot = np.eye(self.num_classes)[labels]
        ce = -np.sum(log_softmax(logits, axis=-1) * one_hot, axis=-1)
        loss = float(np.sum(weights * ce) / normalizer)

        # d CE / d logits = softmax - onehot
        d_logits = (softmax(logits, axis=-1) - one_hot) * (weights / normalizer)[..., None]
        grad = d_logits @ self.weights.T
        return loss, grad

    def selection_grad(
        self,
        image: np.ndarray,
        rows: np.ndarray,
        cols: np.ndarray,
        classes: np.ndarray,
        weights: np.ndarray
    ) -> np.ndarray:
        grad = np.zeros_like(image, dtype=np.float64)
        if len(rows) == 0:
            return grad
        contributions = np.asarray(weights, dtype=np.float64)[:, None] * self.weights[:, classes].T
        np.add.at(grad, (rows, cols), contributions)
        return grad
