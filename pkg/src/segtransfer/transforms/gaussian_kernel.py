"""Gaussian kernel and gradient smoothing for translation invariance."""

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import ndimage

from segtransfer.exceptions import RejectedInputError


class KernelSpec(BaseModel):
    """Configured kernel: odd size and an optional sigma (defaults to size / 3)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    size: int = Field(default=7, ge=1)
    sigma: Optional[float] = Field(default=None, gt=0.0)

    @property
    def resolved_sigma(self) -> float:
        return self.sigma if self.sigma is not None else self.size / 3.0

    def build(self) -> "GaussianKernel":
        return make_gaussian_kernel(self.size, self.resolved_sigma)


class GaussianKernel:
    """Normalized, symmetric 2-D Gaussian weights."""

    def __init__(self, size: int, sigma: float, values: np.ndarray):
        self.size = size
        self.sigma = sigma
        self.values = values

    def __repr__(self) -> str:
        return f"GaussianKernel(size={self.size}, sigma={self.sigma})"


def make_gaussian_kernel(size: int, sigma: float) -> GaussianKernel:
    """Build a ``size``×``size`` Gaussian kernel summing to one.

    Args:
        size: Odd kernel width
        sigma: Positive standard deviation in pixels

    Returns:
        The kernel

    Raises:
        RejectedInputError: If size is even or non-positive, or sigma is not positive
    """
    if size < 1 or size % 2 == 0:
        raise RejectedInputError(f"Kernel size must be a positive odd integer, got {size}")
    if not sigma > 0:
        raise RejectedInputError(f"Kernel sigma must be positive, got {sigma}")
    radius = (size - 1) / 2
    offsets = np.arange(size) - radius
    squared = offsets[:, None] ** 2 + offsets[None, :] ** 2
    values = np.exp(-squared / (2.0 * sigma ** 2))
    return GaussianKernel(size, float(sigma), values / values.sum())


def convolve_gradient(grad: np.ndarray, kernel: GaussianKernel) -> np.ndarray:
    """Smooth each channel of an (H, W, C) gradient with zero padding."""
    grad = np.asarray(grad, dtype=np.float64)
    if grad.ndim != 3:
        raise RejectedInputError(f"Gradient must have shape (H, W, C), got {grad.shape}")
    return ndimage.correlate(grad, kernel.values[:, :, None], mode="constant", cval=0.0)
