"""Confusion matrices and mean intersection-over-union."""

import logging
from typing import List, Optional, Tuple

import numpy as np

from segtransfer.exceptions import DegenerateInputError, RejectedInputError
from segtransfer.oracle.types import LabelMap

logger = logging.getLogger(__name__)


class ConfusionMatrix:
    """Pixel counts with ground truth along rows and predictions along columns.

    Accumulation is associative and commutative, so per-worker matrices can be
    merged in any order.
    """

    def __init__(self, num_classes: int, counts: Optional[np.ndarray] = None):
        if counts is None:
            counts = np.zeros((num_classes, num_classes), dtype=np.int64)
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (num_classes, num_classes):
            raise RejectedInputError(
                f"Confusion counts must have shape ({num_classes}, {num_classes}), got {counts.shape}"
            )
        if np.any(counts < 0):
            raise RejectedInputError("Confusion counts must be non-negative")
        self.num_classes = num_classes
        self.counts = counts

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.num_classes != self.num_classes:
            raise RejectedInputError("Cannot merge confusion matrices with different class counts")
        return ConfusionMatrix(self.num_classes, self.counts + other.counts)

    def to_list(self) -> List[List[int]]:
        return self.counts.tolist()

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ConfusionMatrix)
            and other.num_classes == self.num_classes
            and np.array_equal(other.counts, self.counts)
        )

    def __repr__(self) -> str:
        return f"ConfusionMatrix(num_classes={self.num_classes}, total={self.total})"


def accumulate_confusion(cm: ConfusionMatrix, pred: LabelMap, gt: LabelMap) -> ConfusionMatrix:
    """Add one prediction/ground-truth pair to a confusion matrix.

    Args:
        cm: Matrix to extend; it is not modified
        pred: Predicted labels, which must not contain the ignore index
        gt: Ground truth; ignore-index pixels are skipped

    Returns:
        The updated matrix
    """
    if pred.shape != gt.shape:
        raise RejectedInputError(f"Prediction shape {pred.shape} differs from ground truth {gt.shape}")
    if np.any(pred.data == gt.ignore_index) or np.any(pred.data >= cm.num_classes) or np.any(pred.data < 0):
        raise RejectedInputError("Predictions must be class indices in [0, num_classes)")
    valid = gt.valid_mask
    if np.any(gt.data[valid] >= cm.num_classes):
        raise RejectedInputError("Ground truth contains classes beyond the matrix size")
    flat = gt.data[valid] * cm.num_classes + pred.data[valid]
    counts = np.bincount(flat, minlength=cm.num_classes ** 2).reshape(cm.num_classes, cm.num_classes)
    return ConfusionMatrix(cm.num_classes, cm.counts + counts)


def miou(cm: ConfusionMatrix) -> Tuple[float, np.ndarray]:
    """Mean IoU over classes with a non-empty union.

    Args:
        cm: Accumulated confusion matrix

    Returns:
        Tuple of (mIoU, per-class IoU with NaN for classes with zero union)

    Raises:
        DegenerateInputError: If no class has a non-empty union
    """
    counts = cm.counts.astype(np.float64)
    true_positive = np.diag(counts)
    union = counts.sum(axis=0) + counts.sum(axis=1) - true_positive
    present = union > 0
    if not present.any():
        raise DegenerateInputError("mIoU is undefined: every class has an empty union")
    per_class = np.full(cm.num_classes, np.nan)
    per_class[present] = true_positive[present] / union[present]
    return float(np.mean(per_class[present])), per_class
