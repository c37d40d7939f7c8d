"""Adapter exposing a torch segmentation network as a ModelOracle."""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
import torch
import torch.nn.functional as F

from segtransfer.oracle.model_oracle import ModelOracle

logger = logging.getLogger(__name__)


class TorchSegmenter(ModelOracle):
    """Wraps a module mapping (N, C, H, W) inputs to (N, K, H, W) logits.

    The module is put in eval mode and its parameters are frozen, so outputs
    are deterministic. Inputs arrive in [0, 1] attack space; the optional
    per-channel ``mean``/``std`` normalization happens inside the adapter and
    is differentiated through.
    """

    def __init__(
        self,
        module: torch.nn.Module,
        num_classes: int,
        in_channels: int = 3,
        identifier: str = "torch",
        mean: Optional[Sequence[float]] = None,
        std: Optional[Sequence[float]] = None,
        dtype: torch.dtype = torch.float64,
        input_size: Optional[Tuple[int, int]] = None,
        exclusive: bool = False
    ):
        """Initialize the adapter.

        Args:
            module: Segmentation network
            num_classes: Number of output classes
            in_channels: Number of input channels
            identifier: Model identifier used in logs and results
            mean: Optional per-channel mean subtracted after scaling to [0, 1]
            std: Optional per-channel standard deviation
            dtype: Floating type used for the forward and backward passes
            input_size: Optional fixed (H, W) the model accepts
            exclusive: Whether concurrent calls must be serialized
        """
        self.module = module.to(dtype=dtype).eval()
        for parameter in self.module.parameters():
            parameter.requires_grad_(False)
        self.dtype = dtype
        self.num_classes = num_classes
        self.in_channels = in_channels
        self.identifier = identifier
        self.input_size = tuple(input_size) if input_size else None
        self.exclusive = exclusive
        self._mean = self._channel_tensor(mean, 0.0)
        self._std = self._channel_tensor(std, 1.0)
        logger.info(f"Initialized TorchSegmenter '{identifier}' ({module.__class__.__name__})")

    def _channel_tensor(self, values: Optional[Sequence[float]], default: float) -> torch.Tensor:
        if values is None:
            values = [default] * self.in_channels
        return torch.tensor(list(values), dtype=self.dtype).view(1, -1, 1, 1)

    def _to_tensor(self, image: np.ndarray) -> torch.Tensor:
        return torch.from_numpy(np.ascontiguousarray(image.transpose(2, 0, 1)[None])).to(self.dtype)

    def _forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.module((x - self._mean) / self._std)

    def logits(self, image: np.ndarray) -> np.ndarray:
        with torch.no_grad():
            out = self._forward(self._to_tensor(image))
        return out[0].permute(1, 2, 0).to(torch.float64).numpy()

    def weighted_loss_and_grad(
        self,
        image: np.ndarray,
        labels: np.ndarray,
        weights: np.ndarray,
        normalizer: float
    ) -> Tuple[float, np.ndarray]:
        x = self._to_tensor(image).requires_grad_(True)
        target = torch.from_numpy(np.asarray(labels, dtype=np.int64))[None]
        pixel_weights = torch.from_numpy(np.asarray(weights, dtype=np.float64)).to(self.dtype)[None]

        ce = F.cross_entropy(self._forward(x), target, reduction="none")
        loss = (ce * pixel_weights).sum() / normalizer
        (grad,) = torch.autograd.grad(loss, x)
        return float(loss.item()), grad[0].permute(1, 2, 0).to(torch.float64).numpy()

    def selection_grad(
        self,
        image: np.ndarray,
        rows: np.ndarray,
        cols: np.ndarray,
        classes: np.ndarray,
        weights: np.ndarray
    ) -> np.ndarray:
        if len(rows) == 0:
            return np.zeros_like(image, dtype=np.float64)
        x = self._to_tensor(image).requires_grad_(True)
        out = self._forward(x)[0]
        index = (
            torch.from_numpy(np.asarray(classes, dtype=np.int64)),
            torch.from_numpy(np.asarray(rows, dtype=np.int64)),
            torch.from_numpy(np.asarray(cols, dtype=np.int64)),
        )
        selected = (out[index] * torch.from_numpy(np.asarray(weights, dtype=np.float64)).to(self.dtype)).sum()
        (grad,) = torch.autograd.grad(selected, x)
        return grad[0].permute(1, 2, 0).to(torch.float64).numpy()
