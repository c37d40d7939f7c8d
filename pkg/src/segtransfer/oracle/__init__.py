"""Differentiable model abstraction and toy segmenters."""

from segtransfer.oracle.model_oracle import ModelOracle
from segtransfer.oracle.operations import (
    finite_difference_grad,
    logit_selection_grad,
    loss_and_input_grad,
    per_pixel_losses,
    predict,
)
from segtransfer.oracle.toy_linear import ToyLinearSegmenter
from segtransfer.oracle.types import ImageTensor, LabelMap, Logits

__all__ = [
    "ModelOracle",
    "ToyLinearSegmenter",
    "ImageTensor",
    "LabelMap",
    "Logits",
    "predict",
    "loss_and_input_grad",
    "per_pixel_losses",
    "logit_selection_grad",
    "finite_difference_grad",
]
