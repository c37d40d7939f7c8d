"""Hyperparameters shared by all attacks."""

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from segtransfer.transforms.diverse_input import DiverseInputParams
from segtransfer.transforms.gaussian_kernel import KernelSpec

DEFAULT_EPSILON = 0.03


class LambdaSchedule(BaseModel):
    """Weight of misclassified pixels in the SegPGD loss at step t of T.

    ``linear`` gives t / (2T); ``constant`` gives ``value`` at every step.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["linear", "constant"] = "linear"
    value: float = Field(default=0.5, ge=0.0, le=1.0)

    def at(self, step: int, total: int) -> float:
        if self.kind == "constant":
            return self.value
        return step / (2.0 * total)


class AttackConfig(BaseModel):
    """All attack hyperparameters, in [0, 1] image space.

    ``alpha`` defaults to epsilon / 4. ``epsilon`` may be 0, which turns every
    attack into the identity (the no-op attack used as a harness control).
    """

    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)

    epsilon: float = Field(default=DEFAULT_EPSILON, ge=0.0, lt=1.0)
    alpha: float = Field(default=DEFAULT_EPSILON / 4, ge=0.0)
    iterations: int = Field(default=10, ge=1)
    momentum: float = Field(default=1.0, ge=0.0)
    di: DiverseInputParams = Field(default_factory=DiverseInputParams)
    kernel: KernelSpec = Field(default_factory=KernelSpec)
    random_init: bool = True
    seed: int = 0
    segpgd_lambda: LambdaSchedule = Field(default_factory=LambdaSchedule)
    dag_gamma: float = Field(default=2.0 / 255.0, gt=0.0)
    dag_max_iter: int = Field(default=10, ge=1)
    dag_unbounded: bool = False

    @model_validator(mode="before")
    @classmethod
    def _default_alpha(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("alpha") is None:
            data = dict(data)
            data.pop("alpha", None)
            epsilon = data.get("epsilon", DEFAULT_EPSILON)
            if isinstance(epsilon, (int, float)) and not isinstance(epsilon, bool):
                data["alpha"] = epsilon / 4
        return data

    @model_validator(mode="after")
    def _check_step(self) -> "AttackConfig":
        if self.alpha > self.epsilon:
            raise ValueError(f"alpha ({self.alpha}) must not exceed epsilon ({self.epsilon})")
        if self.epsilon > 0 and self.alpha == 0:
            raise ValueError("alpha must be positive when epsilon is positive")
        return self

    def with_seed(self, seed: int) -> "AttackConfig":
        """Copy of this config with another seed."""
        return self.model_copy(update={"seed": seed})
