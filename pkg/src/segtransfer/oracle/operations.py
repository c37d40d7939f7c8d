"""Oracle operations consumed by the attacks.

All losses are cross-entropies mean-reduced over the non-ignored pixels.
"""

from typing import Iterable, Optional, Tuple

import numpy as np
from scipy.special import log_softmax

from segtransfer.exceptions import DegenerateInputError, RejectedInputError
from segtransfer.oracle.model_oracle import ModelOracle
from segtransfer.oracle.types import ImageTensor, LabelMap, Logits

# (u, v, class, weight) entries of a logit selection
Selection = Iterable[Tuple[int, int, int, float]]


def _raw(image) -> np.ndarray:
    return image.data if isinstance(image, ImageTensor) else np.asarray(image, dtype=np.float64)


def check_labels(oracle: ModelOracle, image: np.ndarray, labels: LabelMap) -> None:
    """Reject labels whose size or class count does not fit the oracle and image."""
    oracle.check_image(image)
    if tuple(image.shape[:2]) != labels.shape:
        raise RejectedInputError(
            f"Image spatial shape {image.shape[:2]} does not match labels {labels.shape}"
        )
    if labels.num_classes != oracle.num_classes:
        raise RejectedInputError(
            f"Labels declare {labels.num_classes} classes, "
            f"oracle '{oracle.identifier}' predicts {oracle.num_classes}"
        )


def compute_logits(oracle: ModelOracle, image) -> Logits:
    """Run the oracle and validate its output."""
    x = _raw(image)
    oracle.check_image(x)
    logits = Logits(oracle.logits(x))
    if logits.data.shape != (x.shape[0], x.shape[1], oracle.num_classes):
        raise RejectedInputError(
            f"Oracle '{oracle.identifier}' returned logits of shape {logits.data.shape}"
        )
    return logits


def argmax_labels(logits: np.ndarray) -> np.ndarray:
    """Per-pixel argmax; ``np.argmax`` returns the first maximum, i.e. the lowest class."""
    return np.argmax(logits, axis=-1).astype(np.int64)


def predict(oracle: ModelOracle, image, ignore_index: int = 255) -> LabelMap:
    """Decode the oracle's prediction for an image.

    Args:
        oracle: Model to run
        image: ImageTensor (or raw (H, W, C) array) to classify
        ignore_index: Ignore index carried by the returned map

    Returns:
        LabelMap of per-pixel argmax classes, ties broken toward the lowest index
    """
    logits = compute_logits(oracle, image)
    return LabelMap(argmax_labels(logits.data), oracle.num_classes, ignore_index)


def _effective_weights(
    labels: LabelMap,
    pixel_weights: Optional[np.ndarray]
) -> Tuple[np.ndarray, np.ndarray, int]:
    valid = labels.valid_mask
    count = int(valid.sum())
    if count == 0:
        raise DegenerateInputError("Every pixel carries the ignore index; the loss is undefined")
    if pixel_weights is None:
        weights = np.ones(labels.shape)
    else:
        weights = np.asarray(pixel_weights, dtype=np.float64)
        if weights.shape != labels.shape:
            raise RejectedInputError(
                f"pixel_weights shape {weights.shape} does not match labels {labels.shape}"
            )
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise RejectedInputError("pixel_weights must be finite and non-negative")
    weights = np.where(valid, weights, 0.0)
    safe_labels = np.where(valid, labels.data, 0)
    return safe_labels, weights, count


def loss_and_input_grad(
    oracle: ModelOracle,
    image,
    labels: LabelMap,
    pixel_weights: Optional[np.ndarray] = None
) -> Tuple[float, np.ndarray]:
    """Weighted mean cross-entropy and its gradient w.r.t. the input.

    Args:
        oracle: Model to differentiate
        image: ImageTensor or raw (H, W, C) array
        labels: Ground-truth labels
        pixel_weights: Optional non-negative (H, W) weights; ones when omitted

    Returns:
        Tuple of (loss, gradient of shape (H, W, C))

    Raises:
        DegenerateInputError: If every pixel is ignored
    """
    x = _raw(image)
    check_labels(oracle, x, labels)
    safe_labels, weights, count = _effective_weights(labels, pixel_weights)
    return oracle.weighted_loss_and_grad(x, safe_labels, weights, float(count))


def per_pixel_losses(oracle: ModelOracle, image, labels: LabelMap) -> np.ndarray:
    """Cross-entropy at every pixel; ignored pixels report 0."""
    x = _raw(image)
    check_labels(oracle, x, labels)
    log_probs = log_softmax(compute_logits(oracle, x).data, axis=-1)
    valid = labels.valid_mask
    safe_labels = np.where(valid, labels.data, 0)
    losses = -np.take_along_axis(log_probs, safe_labels[..., None], axis=-1)[..., 0]
    return np.where(valid, losses, 0.0)


def weighted_loss(
    oracle: ModelOracle,
    image,
    labels: LabelMap,
    pixel_weights: Optional[np.ndarray] = None
) -> float:
    """Forward-only counterpart of :func:`loss_and_input_grad`."""
    _, weights, count = _effective_weights(labels, pixel_weights)
    return float(np.sum(weights * per_pixel_losses(oracle, image, labels)) / count)


def logit_selection_grad(oracle: ModelOracle, image, selection: Selection) -> np.ndarray:
    """Gradient of ``Σ weight · logit(u, v, class)`` w.r.t. the input image.

    Args:
        oracle: Model to differentiate
        image: ImageTensor or raw (H, W, C) array
        selection: (u, v, class, weight) entries; an empty selection yields zeros

    Returns:
        Gradient of shape (H, W, C)
    """
    x = _raw(image)
    oracle.check_image(x)
    entries = list(selection)
    if not entries:
        return np.zeros_like(x)
    table = np.asarray(entries, dtype=np.float64)
    rows, cols, classes = (table[:, i].astype(np.int64) for i in range(3))
    if (
        np.any(rows < 0) or np.any(rows >= x.shape[0])
        or np.any(cols < 0) or np.any(cols >= x.shape[1])
    ):
        raise RejectedInputError("Selection contains pixels outside the image")
    if np.any(classes < 0) or np.any(classes >= oracle.num_classes):
        raise RejectedInputError(f"Selection classes must lie in [0, {oracle.num_classes})")
    return oracle.selection_grad(x, rows, cols, classes, table[:, 3])


def finite_difference_grad(
    oracle: ModelOracle,
    image,
    labels: LabelMap,
    h: float,
    pixel_weights: Optional[np.ndarray] = None
) -> np.ndarray:
    """Central-difference estimate of the loss gradient, one element at a time.

    Args:
        oracle: Model to differentiate numerically
        image: ImageTensor or raw (H, W, C) array
        labels: Ground-truth labels
        h: Positive step
        pixel_weights: Optional weights, as in :func:`loss_and_input_grad`

    Returns:
        Gradient estimate of shape (H, W, C)
    """
    if not h > 0:
        raise RejectedInputError(f"Finite-difference step must be positive, got {h}")
    x = _raw(image).copy()
    grad = np.zeros_like(x)
    for index in np.ndindex(*x.shape):
        original = x[index]
        x[index] = original + h
        upper = weighted_loss(oracle, x, labels, pixel_weights)
        x[index] = original - h
        lower = weighted_loss(oracle, x, labels, pixel_weights)
        x[index] = original
        grad[index] = (upper - lower) / (2.0 * h)
    return grad
