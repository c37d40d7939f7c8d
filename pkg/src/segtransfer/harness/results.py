"""Result containers for transfer experiments."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from dataclasses_json import dataclass_json

SCHEMA_VERSION = 1

METRIC_CONVENTIONS = {
    "miou": "global confusion matrix accumulated over all images; classes with empty union excluded",
    "loss": "cross-entropy mean-reduced over non-ignored pixels",
    "psnr": "dynamic range 1.0, capped at 100 dB, mean over images",
    "ssim": "single-scale, Gaussian window 11, sigma 1.5, K1 0.01, K2 0.03, mean over images; null when an image is smaller than the window",
    "sr": "1 - miou_adv / miou_clean(target), not clamped; miou_clean is taken over the images the row evaluated",
    "image_quality": "computed on pre-quantization float images",
}


@dataclass_json
@dataclass
class TransferCell:
    """Performance of one target on the adversarial set of one (source, attack)."""

    source_id: str
    attack_name: str
    target_id: str
    miou: float
    sr: float
    images: int = 0
    confusion: List[List[int]] = field(default_factory=list)
    clean_miou: Optional[float] = None


@dataclass_json
@dataclass
class ImageQuality:
    """Mean PSNR/SSIM of a (source, attack) adversarial set against the clean set."""

    source_id: str
    attack_name: str
    psnr: float
    ssim: Optional[float]
    images: int = 0
    failed_ids: List[str] = field(default_factory=list)


@dataclass_json
@dataclass
class TransferMatrix:
    """Source × attack × target grid.

    Image quality is keyed by (source, attack) only, since the perturbation
    does not depend on the target.
    """

    cells: List[TransferCell] = field(default_factory=list)
    image_quality: List[ImageQuality] = field(default_factory=list)
    clean_miou: Dict[str, float] = field(default_factory=dict)
    clean_confusion: Dict[str, List[List[int]]] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=dict)
    conventions: Dict[str, Any] = field(default_factory=dict)

    def quality(self, source_id: str, attack_name: str) -> ImageQuality:
        for row in self.image_quality:
            if row.source_id == source_id and row.attack_name == attack_name:
                return row
        raise KeyError((source_id, attack_name))

    def cell(self, source_id: str, attack_name: str, target_id: str) -> TransferCell:
        for cell in self.cells:
            if (cell.source_id, cell.attack_name, cell.target_id) == (source_id, attack_name, target_id):
                return cell
        raise KeyError((source_id, attack_name, target_id))

    def sources(self) -> List[str]:
        return list(dict.fromkeys(row.source_id for row in self.image_quality))

    def attacks(self) -> List[str]:
        return list(dict.fromkeys(row.attack_name for row in self.image_quality))

    def targets(self) -> List[str]:
        return list(self.clean_miou)

    def rows(self) -> List[Tuple[str, str, float, Optional[float], str, float, float]]:
        """(source, attack, psnr, ssim, target, miou, sr) in table reading order."""
        table = []
        for cell in self.cells:
            quality = self.quality(cell.source_id, cell.attack_name)
            table.append((
                cell.source_id, cell.attack_name, quality.psnr, quality.ssim,
                cell.target_id, cell.miou, cell.sr,
            ))
        return table


@dataclass_json
@dataclass
class SweepRow:
    """Image quality and effectiveness of one (source, attack, iterations, target)."""

    source_id: str
    attack_name: str
    iterations: int
    target_id: str
    ssim: Optional[float]
    one_minus_miou: float
    psnr: Optional[float] = None
