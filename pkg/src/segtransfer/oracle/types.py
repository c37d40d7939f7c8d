"""Array containers shared by oracles, attacks and metrics."""

from typing import Tuple

import numpy as np

from segtransfer.exceptions import RejectedInputError

DEFAULT_IGNORE_INDEX = 255


class ImageTensor:
    """An H×W×C floating raster with every element in [0, 1]."""

    def __init__(self, data: np.ndarray):
        """Initialize the image.

        Args:
            data: Array of shape (H, W, C); converted to float64

        Raises:
            RejectedInputError: If the shape or value range is invalid
        """
        array = np.asarray(data, dtype=np.float64)
        if array.ndim != 3 or min(array.shape) < 1:
            raise RejectedInputError(
                f"Image must have shape (H, W, C) with every extent >= 1, got {array.shape}"
            )
        if not np.all(np.isfinite(array)):
            raise RejectedInputError("Image contains non-finite values")
        if array.min() < 0.0 or array.max() > 1.0:
            raise RejectedInputError(
                f"Image values must lie in [0, 1], got [{array.min()}, {array.max()}]"
            )
        self.data = array

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.data.shape  # type: ignore[return-value]

    @property
    def spatial_shape(self) -> Tuple[int, int]:
        return self.data.shape[0], self.data.shape[1]

    def copy(self) -> "ImageTensor":
        return ImageTensor(self.data.copy())

    def __repr__(self) -> str:
        return f"ImageTensor(shape={self.shape})"


class LabelMap:
    """An H×W map of class indices, with ``ignore_index`` marking unlabeled pixels."""

    def __init__(
        self,
        data: np.ndarray,
        num_classes: int,
        ignore_index: int = DEFAULT_IGNORE_INDEX
    ):
        """Initialize the label map.

        Args:
            data: Integer array of shape (H, W)
            num_classes: Number of valid classes
            ignore_index: Label value excluded from losses and metrics

        Raises:
            RejectedInputError: If the shape or any label is invalid
        """
        array = np.asarray(data)
        if array.ndim != 2 or min(array.shape) < 1:
            raise RejectedInputError(f"Label map must have shape (H, W), got {array.shape}")
        if array.dtype.kind == "f":
            if not np.all(array == np.round(array)):
                raise RejectedInputError("Label map contains non-integer values")
        elif array.dtype.kind not in "iub":
            raise RejectedInputError(f"Label map must be integer-valued, got {array.dtype}")
        if num_classes < 1:
            raise RejectedInputError(f"num_classes must be >= 1, got {num_classes}")
        array = array.astype(np.int64)
        valid = (array >= 0) & (array < num_classes)
        if not np.all(valid | (array == ignore_index)):
            bad = np.unique(array[~(valid | (array == ignore_index))])
            raise RejectedInputError(
                f"Labels outside [0, {num_classes}) and not ignore_index={ignore_index}: {bad.tolist()}"
            )
        self.data = array
        self.num_classes = int(num_classes)
        self.ignore_index = int(ignore_index)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape  # type: ignore[return-value]

    @property
    def valid_mask(self) -> np.ndarray:
        """Boolean mask of pixels that carry a class label."""
        return self.data != self.ignore_index

    def with_data(self, data: np.ndarray) -> "LabelMap":
        """Return a label map with the same classes and ignore index."""
        return LabelMap(data, self.num_classes, self.ignore_index)

    def __repr__(self) -> str:
        return (
            f"LabelMap(shape={self.shape}, num_classes={self.num_classes}, "
            f"ignore_index={self.ignore_index})"
        )


class Logits:
    """Pre-softmax class scores of shape (H, W, num_classes)."""

    def __init__(self, data: np.ndarray):
        array = np.asarray(data, dtype=np.float64)
        if array.ndim != 3:
            raise RejectedInputError(f"Logits must have shape (H, W, K), got {array.shape}")
        if not np.all(np.isfinite(array)):
            raise RejectedInputError("Logits contain NaN or Inf")
        self.data = array

    @property
    def num_classes(self) -> int:
        return self.data.shape[2]


def check_pair(image: ImageTensor, labels: LabelMap) -> None:
    """Raise if an image and its label map are not spatially paired."""
    if image.spatial_shape != labels.shape:
        raise RejectedInputError(
            f"Image spatial shape {image.spatial_shape} does not match labels {labels.shape}"
        )
