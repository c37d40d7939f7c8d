"""Dense adversary generation.

Each pixel gets a random adversarial class different from its label. While
some labeled pixels are still classified correctly (the active set), the
image moves along the gradient that raises the adversarial logit and lowers
the true one on those pixels, with every step rescaled to an L∞ length of
``dag_gamma``. The accumulated perturbation is then projected onto the
ε-ball and the valid range, unless ``dag_unbounded`` is set.
"""

import logging

import numpy as np

from segtransfer.attacks.attack_config import AttackConfig
from segtransfer.attacks.result import AdvResult, IterationRecord
from segtransfer.exceptions import RejectedInputError
from segtransfer.oracle.model_oracle import ModelOracle
from segtransfer.oracle.operations import argmax_labels, check_labels
from segtransfer.oracle.types import ImageTensor, LabelMap

logger = logging.getLogger(__name__)


def draw_adversarial_targets(labels: LabelMap, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random class per pixel, never equal to that pixel's label."""
    shift = rng.integers(1, labels.num_classes, size=labels.shape)
    safe = np.where(labels.valid_mask, labels.data, 0)
    return (safe + shift) % labels.num_classes


def dag(oracle: ModelOracle, image: ImageTensor, labels: LabelMap, cfg: AttackConfig) -> AdvResult:
    """Run dense adversary generation.

    Args:
        oracle: Source model
        image: Clean image
        labels: Ground-truth labels
        cfg: Attack configuration (uses dag_gamma, dag_max_iter, epsilon, seed)

    Returns:
        AdvResult; ``converged`` is set when the active set emptied, ``stalled``
        when the gradient vanished on a non-empty active set
    """
    check_labels(oracle, image.data, labels)
    if labels.num_classes < 2:
        raise RejectedInputError("DAG needs at least two classes")

    rng = np.random.default_rng(cfg.seed)
    clean = image.data
    targets = draw_adversarial_targets(labels, rng)
    valid = labels.valid_mask

    x = clean.copy()
    trace = []
    iterations = 0
    stalled = converged = False
    for step in range(cfg.dag_max_iter + 1):
        logits = oracle.logits(x)
        active = valid & (argmax_labels(logits) == labels.data)
        rows, cols = np.nonzero(active)
        true_classes = labels.data[rows, cols]
        adversarial_classes = targets[rows, cols]
        margin = float(np.sum(logits[rows, cols, true_classes] - logits[rows, cols, adversarial_classes]))
        trace.append(IterationRecord(step=step, loss=margin, active_pixels=int(rows.size)))

        if rows.size == 0:
            converged = True
            break
        if step == cfg.dag_max_iter:
            break

        r = oracle.selection_grad(
            x,
            np.concatenate([rows, rows]),
            np.concatenate([cols, cols]),
            np.concatenate([adversarial_classes, true_classes]),
            np.concatenate([np.ones(rows.size), -np.ones(rows.size)]),
        )
        norm = np.max(np.abs(r))
        if norm == 0:
            stalled = True
            logger.warning(f"DAG stalled at step {step} with {rows.size} active pixels")
            break
        x = x + (cfg.dag_gamma / norm) * r
        iterations += 1

    if cfg.dag_unbounded:
        adv = np.clip(x, 0.0, 1.0)
    else:
        adv = np.clip(np.clip(x, clean - cfg.epsilon, clean + cfg.epsilon), 0.0, 1.0)
    logger.debug(f"DAG finished after {iterations} iterations (converged={converged})")

    return AdvResult(
        adv_image=ImageTensor(adv),
        perturbation=adv - clean,
        attack_name="dag",
        config_snapshot=cfg,
        iterations_used=iterations,
        trace=trace,
        stalled=stalled,
        converged=converged,
        unprojected_image=x,
    )
