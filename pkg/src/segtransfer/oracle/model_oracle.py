"""Base class for differentiable segmentation models."""

from abc import ABC, abstractmethod
from typing import Optional, Tuple

import numpy as np

from segtransfer.exceptions import RejectedInputError


class ModelOracle(ABC):
    """Abstract base class for the models every attack consumes.

    Oracles work on raw float arrays in attack space: images of shape
    (H, W, C) with values nominally in [0, 1]. Adapters that need another
    input normalization apply it internally. Oracles are read-only after
    construction; an adapter that cannot serve concurrent callers sets
    ``exclusive`` and the harness serializes access to it.
    """

    identifier: str
    num_classes: int
    in_channels: int
    input_size: Optional[Tuple[int, int]] = None
    exclusive: bool = False

    @abstractmethod
    def logits(self, image: np.ndarray) -> np.ndarray:
        """Compute class scores.

        Args:
            image: Array of shape (H, W, C)

        Returns:
            Array of shape (H, W, num_classes)
        """
        pass

    @abstractmethod
    def weighted_loss_and_grad(
        self,
        image: np.ndarray,
        labels: np.ndarray,
        weights: np.ndarray,
        normalizer: float
    ) -> Tuple[float, np.ndarray]:
        """Compute a weighted cross-entropy and its input gradient.

        The loss is ``sum(weights * CE) / normalizer``. Callers pass labels
        that are valid class indices everywhere; ignored pixels are expressed
        through zero weights.

        Args:
            image: Array of shape (H, W, C)
            labels: Integer array of shape (H, W)
            weights: Non-negative array of shape (H, W)
            normalizer: Positive divisor of the weighted sum

        Returns:
            Tuple of (loss, gradient with the shape of ``image``)
        """
        pass

    @abstractmethod
    def selection_grad(
        self,
        image: np.ndarray,
        rows: np.ndarray,
        cols: np.ndarray,
        classes: np.ndarray,
        weights: np.ndarray
    ) -> np.ndarray:
        """Gradient of ``sum(weights * logits[rows, cols, classes])`` w.r.t. the image."""
        pass

    def check_image(self, image: np.ndarray) -> None:
        """Raise if the image cannot be fed to this oracle."""
        if image.ndim != 3 or image.shape[2] != self.in_channels:
            raise RejectedInputError(
                f"Oracle '{self.identifier}' expects (H, W, {self.in_channels}) images, "
                f"got {image.shape}"
            )
        if self.input_size is not None and tuple(image.shape[:2]) != tuple(self.input_size):
            raise RejectedInputError(
                f"Oracle '{self.identifier}' expects spatial size {tuple(self.input_size)}, "
                f"got {image.shape[:2]}"
            )

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(identifier={self.identifier!r}, num_classes={self.num_classes})"
