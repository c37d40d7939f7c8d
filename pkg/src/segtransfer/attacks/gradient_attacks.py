"""Sign-gradient attacks under an L∞ budget.

FGSM, PGD, SegPGD, NI, DI, TI and the ensemble attack share one iterative
loop; each attack switches on the ingredients it needs:

* lookahead momentum (NI): gradient taken at ``x + α·μ·g``, accumulated as
  ``g ← μ·g + ∇ / ‖∇‖₁``
* input diversity (DI): gradient of the loss on a randomly resized and
  padded copy, mapped back through the transform's adjoint
* translation invariance (TI): gradient smoothed with a Gaussian kernel
* dynamic pixel weights (SegPGD): correctly classified pixels weighted by
  1 − λ_t, misclassified ones by λ_t

Every iterate is projected onto the ε-ball around the clean image
intersected with [0, 1]. ``sign(0) = 0`` throughout.
"""

import logging
from typing import Callable, List, Optional, Tuple

import numpy as np

from segtransfer.attacks.attack_config import AttackConfig
from segtransfer.attacks.result import AdvResult, IterationRecord
from segtransfer.exceptions import DegenerateInputError
from segtransfer.oracle.model_oracle import ModelOracle
from segtransfer.oracle.operations import argmax_labels, loss_and_input_grad
from segtransfer.oracle.types import ImageTensor, LabelMap, check_pair
from segtransfer.transforms.diverse_input import draw_resize_pad
from segtransfer.transforms.gaussian_kernel import convolve_gradient

logger = logging.getLogger(__name__)

# (point, step) -> (loss, gradient, active pixel count or None)
GradientFn = Callable[[np.ndarray, int], Tuple[float, np.ndarray, Optional[int]]]


def _project_array(x: np.ndarray, clean: np.ndarray, epsilon: float) -> np.ndarray:
    return np.clip(np.clip(x, clean - epsilon, clean + epsilon), 0.0, 1.0)


def project(x, x_clean, epsilon: float) -> ImageTensor:
    """Clamp ``x`` into [x_clean − ε, x_clean + ε] ∩ [0, 1], elementwise.

    Args:
        x: ImageTensor or raw array to project
        x_clean: Clean image defining the ball centre
        epsilon: Ball radius

    Returns:
        The projected image
    """
    x_data = x.data if isinstance(x, ImageTensor) else np.asarray(x, dtype=np.float64)
    clean = x_clean.data if isinstance(x_clean, ImageTensor) else np.asarray(x_clean, dtype=np.float64)
    return ImageTensor(_project_array(x_data, clean, epsilon))


def _result(
    name: str,
    clean: np.ndarray,
    adv: np.ndarray,
    cfg: AttackConfig,
    iterations: int,
    trace: List[IterationRecord]
) -> AdvResult:
    return AdvResult(
        adv_image=ImageTensor(adv),
        perturbation=adv - clean,
        attack_name=name,
        config_snapshot=cfg,
        iterations_used=iterations,
        trace=trace,
    )


def _plain_gradient(oracle: ModelOracle, labels: LabelMap) -> GradientFn:
    def gradient(point: np.ndarray, step: int) -> Tuple[float, np.ndarray, Optional[int]]:
        loss, grad = loss_and_input_grad(oracle, point, labels)
        return loss, grad, None
    return gradient


def _segpgd_gradient(oracle: ModelOracle, labels: LabelMap, cfg: AttackConfig) -> GradientFn:
    valid = labels.valid_mask

    def gradient(point: np.ndarray, step: int) -> Tuple[float, np.ndarray, Optional[int]]:
        correct = argmax_labels(oracle.logits(point)) == labels.data
        lam = cfg.segpgd_lambda.at(step, cfg.iterations)
        weights = np.where(correct, 1.0 - lam, lam)
        loss, grad = loss_and_input_grad(oracle, point, labels, weights)
        return loss, grad, int(np.sum(correct & valid))
    return gradient


def _diverse_gradient(
    oracle: ModelOracle,
    labels: LabelMap,
    cfg: AttackConfig,
    rng: np.random.Generator
) -> GradientFn:
    def gradient(point: np.ndarray, step: int) -> Tuple[float, np.ndarray, Optional[int]]:
        transform = draw_resize_pad(labels.shape, cfg.di, rng)
        if transform is None:
            loss, grad = loss_and_input_grad(oracle, point, labels)
            return loss, grad, None
        moved = labels.with_data(transform.apply_labels(labels.data, labels.ignore_index))
        try:
            loss, grad = loss_and_input_grad(oracle, transform.apply_image(point), moved)
        except DegenerateInputError:
            # Only ignored pixels survived the resize; use the untransformed pair
            logger.debug(f"Diverse input at step {step} kept no labeled pixel")
            loss, grad = loss_and_input_grad(oracle, point, labels)
            return loss, grad, None
        return loss, transform.adjoint(grad), None
    return gradient


def _iterate(
    name: str,
    oracle: ModelOracle,
    image: ImageTensor,
    labels: LabelMap,
    cfg: AttackConfig,
    *,
    diverse: bool = False,
    smooth: bool = False,
    momentum: bool = False,
    segpgd: bool = False
) -> AdvResult:
    check_pair(image, labels)
    clean = image.data
    rng = np.random.default_rng(cfg.seed)

    x = clean.copy()
    if cfg.random_init:
        x = _project_array(x + rng.uniform(-cfg.epsilon, cfg.epsilon, size=x.shape), clean, cfg.epsilon)

    if segpgd:
        gradient = _segpgd_gradient(oracle, labels, cfg)
    elif diverse:
        gradient = _diverse_gradient(oracle, labels, cfg, rng)
    else:
        gradient = _plain_gradient(oracle, labels)
    kernel = cfg.kernel.build() if smooth else None

    accumulated = np.zeros_like(x)
    trace = []
    for step in range(cfg.iterations):
        point = x + cfg.alpha * cfg.momentum * accumulated if momentum else x
        loss, grad, active = gradient(point, step)
        if kernel is not None:
            grad = convolve_gradient(grad, kernel)
        if momentum:
            norm = np.sum(np.abs(grad))
            normalized = grad / norm if norm > 0 else np.zeros_like(grad)
            accumulated = cfg.momentum * accumulated + normalized
            direction = accumulated
        else:
            direction = grad
        x = _project_array(x + cfg.alpha * np.sign(direction), clean, cfg.epsilon)
        trace.append(IterationRecord(step=step, loss=loss, active_pixels=active))
        logger.debug(f"{name} step {step}: loss={loss:.6f}")

    return _result(name, clean, x, cfg, cfg.iterations, trace)


def fgsm(oracle: ModelOracle, image: ImageTensor, labels: LabelMap, cfg: AttackConfig) -> AdvResult:
    """Single step of size ε along the sign of the loss gradient."""
    check_pair(image, labels)
    clean = image.data
    loss, grad = loss_and_input_grad(oracle, clean, labels)
    adv = _project_array(clean + cfg.epsilon * np.sign(grad), clean, cfg.epsilon)
    return _result("fgsm", clean, adv, cfg, 1, [IterationRecord(step=0, loss=loss)])


def pgd(oracle: ModelOracle, image: ImageTensor, labels: LabelMap, cfg: AttackConfig) -> AdvResult:
    """Projected gradient ascent with optional uniform random start."""
    return _iterate("pgd", oracle, image, labels, cfg)


def segpgd(oracle: ModelOracle, image: ImageTensor, labels: LabelMap, cfg: AttackConfig) -> AdvResult:
    """PGD on a loss that re-weights correctly and wrongly classified pixels each step.

    The trace records the number of still-correct labeled pixels per step.
    """
    return _iterate("segpgd", oracle, image, labels, cfg, segpgd=True)


def ni(oracle: ModelOracle, image: ImageTensor, labels: LabelMap, cfg: AttackConfig) -> AdvResult:
    """Nesterov lookahead with L1-normalized momentum accumulation."""
    return _iterate("ni", oracle, image, labels, cfg, momentum=True)


def di(oracle: ModelOracle, image: ImageTensor, labels: LabelMap, cfg: AttackConfig) -> AdvResult:
    """PGD whose gradients are taken through random resize-and-pad inputs."""
    return _iterate("di", oracle, image, labels, cfg, diverse=True)


def ti(oracle: ModelOracle, image: ImageTensor, labels: LabelMap, cfg: AttackConfig) -> AdvResult:
    """PGD with Gaussian-smoothed gradients."""
    return _iterate("ti", oracle, image, labels, cfg, smooth=True)


def ensemble(oracle: ModelOracle, image: ImageTensor, labels: LabelMap, cfg: AttackConfig) -> AdvResult:
    """NI outer loop over DI gradients smoothed as in TI.

    Per step: lookahead ``x_nes = x + α·μ·g``; raw gradient on the diverse
    input of ``x_nes``; Gaussian smoothing; L1 normalization into the
    momentum ``g``; signed step and projection.
    """
    return _iterate("ensemble", oracle, image, labels, cfg, diverse=True, smooth=True, momentum=True)
