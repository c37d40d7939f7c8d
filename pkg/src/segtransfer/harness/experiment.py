"""Source → target transfer experiments."""

import hashlib
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from segtransfer import __version__
from segtransfer.attacks.registry import get_attack
from segtransfer.config.experiment import AttackEntry, ExperimentConfig
from segtransfer.exceptions import SegTransferError
from segtransfer.harness.dataset import Sample, encode_image, load_dataset, quantize
from segtransfer.harness.results import (
    METRIC_CONVENTIONS,
    ImageQuality,
    TransferCell,
    TransferMatrix,
)
from segtransfer.metrics.confusion import ConfusionMatrix, accumulate_confusion, miou
from segtransfer.metrics.image_quality import mean_ssim, psnr
from segtransfer.metrics.report import success_rate
from segtransfer.oracle.model_oracle import ModelOracle
from segtransfer.oracle.operations import predict
from segtransfer.oracle.registry import load_oracle

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def derive_seed(seed: int, image_id: str) -> int:
    """Per-image attack seed, independent of worker scheduling."""
    digest = hashlib.blake2b(f"{seed}:{image_id}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


class TransferService:
    """Runs the transfer protocol of an ExperimentConfig.

    For every target the clean mIoU is measured once. For every (source,
    attack) adversarial examples are generated per image on the source,
    their image quality is measured against the clean images, and every
    target is evaluated on them.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        oracles: Optional[Dict[str, ModelOracle]] = None,
        samples: Optional[List[Sample]] = None
    ):
        """Initialize the service.

        Args:
            config: Validated experiment configuration
            oracles: Pre-built oracles keyed by model id; built from the
                registry entries when omitted
            samples: Pre-loaded dataset; loaded from ``config.dataset`` when omitted
        """
        self.config = config
        self._oracles = dict(oracles or {})
        self._samples = samples
        self._locks: Dict[str, threading.Lock] = {}
        logger.info(f"Initialized TransferService with {config.workers} workers")

    @property
    def samples(self) -> List[Sample]:
        if self._samples is None:
            self._samples = load_dataset(self.config.dataset)
        return self._samples

    def oracle(self, model_id: str) -> ModelOracle:
        if model_id not in self._oracles:
            self._oracles[model_id] = load_oracle(self.config.model_entry(model_id))
        return self._oracles[model_id]

    def _map(self, oracle: ModelOracle, fn: Callable[[T], R], items: Sequence[T]) -> List[R]:
        """Apply ``fn`` to every item, in parallel unless the oracle is exclusive."""
        if oracle.exclusive:
            lock = self._locks.setdefault(oracle.identifier, threading.Lock())

            def guarded(item: T) -> R:
                with lock:
                    return fn(item)
            call = guarded
        else:
            call = fn
        if self.config.workers == 1 or len(items) <= 1:
            return [call(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.config.workers) as executor:
            return list(executor.map(call, items))

    def evaluate(self, model_id: str, images: Dict[str, np.ndarray]) -> ConfusionMatrix:
        """Accumulate a model's confusion matrix over the given images (keyed by id)."""
        oracle = self.oracle(model_id)
        samples = [sample for sample in self.samples if sample[2] in images]
        predictions = self._map(
            oracle,
            lambda sample: predict(oracle, images[sample[2]], sample[1].ignore_index),
            samples,
        )
        cm = ConfusionMatrix(self.config.dataset.num_classes)
        for (_, labels, _), prediction in zip(samples, predictions):
            cm = accumulate_confusion(cm, prediction, labels)
        return cm

    def clean_images(self) -> Dict[str, np.ndarray]:
        return {sample_id: image.data for image, _, sample_id in self.samples}

    def generate(self, source_id: str, attack: AttackEntry) -> Tuple[Dict[str, np.ndarray], List[str]]:
        """Craft adversarial examples for every image on one source.

        Returns:
            Tuple of (adversarial images keyed by id, ids of failed images)
        """
        oracle = self.oracle(source_id)
        attack_fn = get_attack(attack.name)

        def craft(sample: Sample) -> Optional[np.ndarray]:
            image, labels, sample_id = sample
            cfg = attack.config.with_seed(derive_seed(self.config.seed, sample_id))
            try:
                return attack_fn(oracle, image, labels, cfg).adv_image.data
            except Exception as e:
                logger.error(f"Attack {attack.key} on '{sample_id}' with source {source_id} failed: {str(e)}")
                return None

        outcomes = self._map(oracle, craft, self.samples)
        adversarial = {}
        failed = []
        for (_, _, sample_id), adv in zip(self.samples, outcomes):
            if adv is None:
                failed.append(sample_id)
            else:
                adversarial[sample_id] = adv
        if not adversarial:
            raise SegTransferError(f"Attack {attack.key} failed on every image for source {source_id}")
        return adversarial, failed

    def image_quality(self, source_id: str, attack: AttackEntry, adversarial: Dict[str, np.ndarray], failed: List[str]) -> ImageQuality:
        clean = self.clean_images()
        ids = sorted(adversarial)
        return ImageQuality(
            source_id=source_id,
            attack_name=attack.key,
            psnr=float(np.mean([psnr(adversarial[i], clean[i]) for i in ids])),
            ssim=mean_ssim((adversarial[i], clean[i]) for i in ids),
            images=len(ids),
            failed_ids=sorted(failed),
        )

    def _save(self, source_id: str, attack: AttackEntry, adversarial: Dict[str, np.ndarray]) -> None:
        directory = Path(self.config.output_dir) / "adversarial" / source_id / attack.key
        for sample_id in sorted(adversarial):
            encode_image(adversarial[sample_id], directory / f"{sample_id}.png")
        logger.info(f"Saved {len(adversarial)} adversarial images to {directory}")

    def clean_reference(self) -> Tuple[Dict[str, ConfusionMatrix], Dict[str, float]]:
        """Clean confusion matrix and mIoU of every target over the whole dataset."""
        confusion, scores = {}, {}
        clean = self.clean_images()
        for target_id in self.config.targets:
            confusion[target_id] = self.evaluate(target_id, clean)
            scores[target_id] = miou(confusion[target_id])[0]
            logger.info(f"Clean mIoU of {target_id}: {scores[target_id]:.4f}")
        return confusion, scores

    def row_reference(
        self,
        clean_miou: Dict[str, float],
        adversarial: Dict[str, np.ndarray],
        failed: List[str]
    ) -> Dict[str, float]:
        """Clean mIoU of every target over the images a (source, attack) row kept.

        Equals the whole-dataset reference unless some images failed, in which
        case the clean side is restricted to the same surviving ids.
        """
        if not failed:
            return dict(clean_miou)
        clean = self.clean_images()
        kept = {sample_id: clean[sample_id] for sample_id in adversarial}
        reference = {}
        for target_id in self.config.targets:
            reference[target_id] = miou(self.evaluate(target_id, kept))[0]
            logger.info(
                f"Clean mIoU of {target_id} over {len(kept)} surviving images: {reference[target_id]:.4f}"
            )
        return reference

    def run(self) -> TransferMatrix:
        """Run the full source × attack × target matrix.

        Returns:
            The populated TransferMatrix
        """
        clean_confusion, clean_miou = self.clean_reference()
        matrix = TransferMatrix(
            clean_miou=clean_miou,
            clean_confusion={target: cm.to_list() for target, cm in clean_confusion.items()},
            config=self.config.snapshot(),
            conventions=dict(
                METRIC_CONVENTIONS,
                quantize_adversarial=self.config.quantize_adversarial,
                tool_version=__version__,
            ),
        )

        for source_id in self.config.sources:
            for attack in self.config.attacks:
                logger.info(f"Running {attack.key} on source {source_id}")
                adversarial, failed = self.generate(source_id, attack)
                matrix.image_quality.append(self.image_quality(source_id, attack, adversarial, failed))
                if self.config.save_adversarial:
                    self._save(source_id, attack, adversarial)

                evaluated = (
                    {key: quantize(value) for key, value in adversarial.items()}
                    if self.config.quantize_adversarial else adversarial
                )
                reference = self.row_reference(clean_miou, adversarial, failed)
                for target_id in self.config.targets:
                    cm = self.evaluate(target_id, evaluated)
                    adv_miou = miou(cm)[0]
                    matrix.cells.append(TransferCell(
                        source_id=source_id,
                        attack_name=attack.key,
                        target_id=target_id,
                        miou=adv_miou,
                        sr=success_rate(reference[target_id], adv_miou),
                        images=len(evaluated),
                        confusion=cm.to_list(),
                        clean_miou=reference[target_id],
                    ))
        logger.info(f"Transfer experiment finished with {len(matrix.cells)} cells")
        return matrix


def run_transfer_experiment(config: ExperimentConfig, oracles: Optional[Dict[str, ModelOracle]] = None) -> TransferMatrix:
    """Run the source → target transfer protocol."""
    return TransferService(config, oracles=oracles).run()


def evaluate_models(config: ExperimentConfig, oracles: Optional[Dict[str, ModelOracle]] = None) -> Dict[str, Tuple[float, List[float]]]:
    """Clean mIoU and per-class IoU of every registered model.

    Returns:
        Mapping of model id to (mIoU, per-class IoU with NaN for absent classes)
    """
    service = TransferService(config, oracles=oracles)
    clean = service.clean_images()
    scores = {}
    for entry in config.models:
        score, per_class = miou(service.evaluate(entry.id, clean))
        scores[entry.id] = (score, per_class.tolist())
    return scores
