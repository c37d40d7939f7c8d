"""Attack registry keyed by canonical names."""

from typing import Callable, Dict, List

from segtransfer.attacks.attack_config import AttackConfig
from segtransfer.attacks.dag import dag
from segtransfer.attacks.gradient_attacks import di, ensemble, fgsm, ni, pgd, segpgd, ti
from segtransfer.attacks.result import AdvResult
from segtransfer.exceptions import UnknownAttackError
from segtransfer.oracle.model_oracle import ModelOracle
from segtransfer.oracle.types import ImageTensor, LabelMap

AttackFn = Callable[[ModelOracle, ImageTensor, LabelMap, AttackConfig], AdvResult]

ATTACKS: Dict[str, AttackFn] = {
    "fgsm": fgsm,
    "pgd": pgd,
    "segpgd": segpgd,
    "dag": dag,
    "ni": ni,
    "di": di,
    "ti": ti,
    "ensemble": ensemble,
}


def registered_attacks() -> List[str]:
    return list(ATTACKS)


def get_attack(name: str) -> AttackFn:
    """Look up an attack by name.

    Raises:
        UnknownAttackError: If the name is not registered
    """
    try:
        return ATTACKS[name]
    except KeyError:
        raise UnknownAttackError(name, ATTACKS) from None


def run_attack(
    name: str,
    oracle: ModelOracle,
    image: ImageTensor,
    labels: LabelMap,
    cfg: AttackConfig
) -> AdvResult:
    return get_attack(name)(oracle, image, labels, cfg)
