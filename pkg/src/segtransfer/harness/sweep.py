"""Image quality and attack effectiveness as a function of attack iterations."""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from segtransfer.config.experiment import AttackEntry, ExperimentConfig
from segtransfer.harness.dataset import quantize
from segtransfer.harness.experiment import TransferService
from segtransfer.harness.results import SweepRow
from segtransfer.metrics.confusion import miou
from segtransfer.oracle.model_oracle import ModelOracle

logger = logging.getLogger(__name__)


def _with_iterations(attack: AttackEntry, iterations: int) -> AttackEntry:
    # DAG's loop length is dag_max_iter; the sign-gradient attacks use iterations
    config = attack.config.model_copy(update={"iterations": iterations, "dag_max_iter": iterations})
    return attack.model_copy(update={"config": config})


def run_iteration_sweep(
    config: ExperimentConfig,
    iterations: Sequence[int],
    oracles: Optional[Dict[str, ModelOracle]] = None
) -> List[SweepRow]:
    """Re-run every (source, attack) for several iteration counts.

    FGSM is single-step and is evaluated once per count like the others, so
    its rows stay flat.

    Args:
        config: Experiment configuration
        iterations: Iteration counts to evaluate
        oracles: Optional pre-built oracles

    Returns:
        One row per (source, attack, iterations, target)
    """
    service = TransferService(config, oracles=oracles)
    rows: List[SweepRow] = []
    for source_id in config.sources:
        for attack in config.attacks:
            for count in iterations:
                entry = _with_iterations(attack, int(count))
                adversarial, failed = service.generate(source_id, entry)
                quality = service.image_quality(source_id, entry, adversarial, failed)
                evaluated = (
                    {key: quantize(value) for key, value in adversarial.items()}
                    if config.quantize_adversarial else adversarial
                )
                for target_id in config.targets:
                    score = miou(service.evaluate(target_id, evaluated))[0]
                    rows.append(SweepRow(
                        source_id=source_id,
                        attack_name=attack.key,
                        iterations=int(count),
                        target_id=target_id,
                        ssim=quality.ssim,
                        one_minus_miou=1.0 - score,
                        psnr=quality.psnr,
                    ))
                shown = "n/a" if quality.ssim is None else f"{quality.ssim:.4f}"
                logger.info(
                    f"Sweep {attack.key} on {source_id} at T={count}: "
                    f"ssim={shown}, mean 1-mIoU={np.mean([r.one_minus_miou for r in rows[-len(config.targets):]]):.4f}"
                )
    return rows
