"""Input diversity: random down-scaling followed by zero padding.

The transform is linear in the image, so its adjoint maps a gradient taken
on the transformed image back onto the original one.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from segtransfer.oracle.types import ImageTensor, LabelMap, check_pair

logger = logging.getLogger(__name__)


class DiverseInputParams(BaseModel):
    """Parameters of the random resize-and-pad transform."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    probability: float = Field(default=0.7, ge=0.0, le=1.0)
    scale_min: float = Field(default=0.9, gt=0.0, le=1.0)
    scale_max: float = Field(default=1.0, gt=0.0, le=1.0)
    rng_seed: int = 0

    @model_validator(mode="after")
    def _check_scale_range(self) -> "DiverseInputParams":
        if self.scale_min > self.scale_max:
            raise ValueError(
                f"scale_min ({self.scale_min}) must not exceed scale_max ({self.scale_max})"
            )
        return self


def _bilinear_matrix(out_size: int, in_size: int) -> np.ndarray:
    """Row-interpolation matrix of half-pixel-centred bilinear resizing."""
    matrix = np.zeros((out_size, in_size))
    source = (np.arange(out_size) + 0.5) * (in_size / out_size) - 0.5
    source = np.clip(source, 0.0, None)
    lower = np.minimum(np.floor(source).astype(np.int64), in_size - 1)
    upper = np.minimum(lower + 1, in_size - 1)
    frac = source - lower
    rows = np.arange(out_size)
    np.add.at(matrix, (rows, lower), 1.0 - frac)
    np.add.at(matrix, (rows, upper), frac)
    return matrix


def _nearest_index(out_size: int, in_size: int) -> np.ndarray:
    source = np.floor((np.arange(out_size) + 0.5) * (in_size / out_size)).astype(np.int64)
    return np.minimum(source, in_size - 1)


class ResizePad:
    """One realized draw of the transform: resize to (h, w), paste at (top, left)."""

    def __init__(
        self,
        spatial_shape: Tuple[int, int],
        resized: Tuple[int, int],
        offset: Tuple[int, int]
    ):
        self.spatial_shape = spatial_shape
        self.resized = resized
        self.offset = offset
        (height, width), (h, w) = spatial_shape, resized
        self._rows = _bilinear_matrix(h, height)
        self._cols = _bilinear_matrix(w, width)
        self._label_rows = _nearest_index(h, height)
        self._label_cols = _nearest_index(w, width)

    @classmethod
    def from_scale(
        cls,
        spatial_shape: Tuple[int, int],
        scale: float,
        offset: Tuple[int, int] = (0, 0)
    ) -> "ResizePad":
        """Build the transform for a given scale; extents are clamped to at least 1."""
        height, width = spatial_shape
        resized = (
            max(1, int(math.floor(scale * height + 0.5))),
            max(1, int(math.floor(scale * width + 0.5))),
        )
        return cls(spatial_shape, resized, offset)

    @property
    def _window(self) -> Tuple[slice, slice]:
        (top, left), (h, w) = self.offset, self.resized
        return slice(top, top + h), slice(left, left + w)

    def apply_image(self, image: np.ndarray) -> np.ndarray:
        content = np.einsum("ih,hwc,jw->ijc", self._rows, image, self._cols)
        canvas = np.zeros_like(image, dtype=np.float64)
        canvas[self._window] = content
        return canvas

    def apply_labels(self, labels: np.ndarray, ignore_index: int) -> np.ndarray:
        content = labels[np.ix_(self._label_rows, self._label_cols)]
        canvas = np.full_like(labels, ignore_index)
        canvas[self._window] = content
        return canvas

    def adjoint(self, grad: np.ndarray) -> np.ndarray:
        """Map a gradient w.r.t. the transformed image to the original image."""
        return np.einsum("ih,ijc,jw->hwc", self._rows, grad[self._window], self._cols)


def draw_resize_pad(
    spatial_shape: Tuple[int, int],
    params: DiverseInputParams,
    rng: np.random.Generator
) -> Optional[ResizePad]:
    """Draw a transform, or ``None`` when the probability gate keeps the input.

    Args:
        spatial_shape: (H, W) of the input
        params: Transform parameters
        rng: Generator driving the gate, the scale and the offset

    Returns:
        The drawn transform, or None with probability 1 - p
    """
    if not rng.random() < params.probability:
        return None
    height, width = spatial_shape
    scale = rng.uniform(params.scale_min, params.scale_max)
    transform = ResizePad.from_scale(spatial_shape, scale)
    h, w = transform.resized
    top = int(rng.integers(0, height - h + 1))
    left = int(rng.integers(0, width - w + 1))
    transform.offset = (top, left)
    return transform


def diverse_input(
    image: ImageTensor,
    labels: LabelMap,
    params: DiverseInputParams,
    rng: Optional[np.random.Generator] = None
) -> Tuple[ImageTensor, LabelMap, bool]:
    """Apply the random resize-and-pad transform to an image/label pair.

    Labels are resized with nearest-neighbour and padded with the ignore
    index so the loss on the transformed pair stays well-defined.

    Args:
        image: Input image
        labels: Labels paired with ``image``
        params: Transform parameters
        rng: Seeded generator; one seeded from ``params.rng_seed`` when omitted

    Returns:
        Tuple of (image', labels', applied); shapes always equal the inputs'
    """
    check_pair(image, labels)
    if rng is None:
        rng = np.random.default_rng(params.rng_seed)
    transform = draw_resize_pad(image.spatial_shape, params, rng)
    if transform is None:
        return image, labels, False
    logger.debug(f"Diverse input: resized to {transform.resized} at offset {transform.offset}")
    return (
        ImageTensor(transform.apply_image(image.data)),
        labels.with_data(transform.apply_labels(labels.data, labels.ignore_index)),
        True,
    )
