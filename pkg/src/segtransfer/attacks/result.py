"""Adversarial example produced by an attack, with its iteration trace."""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from segtransfer.attacks.attack_config import AttackConfig
from segtransfer.oracle.types import ImageTensor


@dataclass
class IterationRecord:
    """Loss at one gradient evaluation and, where relevant, the active-pixel count."""

    step: int
    loss: float
    active_pixels: Optional[int] = None


@dataclass
class AdvResult:
    """Output of an attack.

    ``perturbation`` is ``adv_image - clean`` and lies in the epsilon ball.
    ``unprojected_image`` is only set by DAG: the raw accumulated iterate
    before the final ball and range projection.
    """

    adv_image: ImageTensor
    perturbation: np.ndarray
    attack_name: str
    config_snapshot: AttackConfig
    iterations_used: int
    trace: List[IterationRecord] = field(default_factory=list)
    stalled: bool = False
    converged: bool = False
    unprojected_image: Optional[np.ndarray] = None

    @property
    def linf(self) -> float:
        return float(np.max(np.abs(self.perturbation)))

    def loss_trace(self) -> List[float]:
        return [record.loss for record in self.trace]
