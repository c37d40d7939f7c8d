"""Attack procedures over the oracle interface."""

from segtransfer.attacks.attack_config import AttackConfig, LambdaSchedule
from segtransfer.attacks.dag import dag
from segtransfer.attacks.gradient_attacks import di, ensemble, fgsm, ni, pgd, project, segpgd, ti
from segtransfer.attacks.registry import ATTACKS, get_attack, registered_attacks, run_attack
from segtransfer.attacks.result import AdvResult, IterationRecord

__all__ = [
    "AttackConfig",
    "LambdaSchedule",
    "AdvResult",
    "IterationRecord",
    "ATTACKS",
    "get_attack",
    "registered_attacks",
    "run_attack",
    "project",
    "fgsm",
    "pgd",
    "segpgd",
    "dag",
    "ni",
    "di",
    "ti",
    "ensemble",
]
