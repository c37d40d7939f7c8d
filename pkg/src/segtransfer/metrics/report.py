"""Attack-success measure and the per-evaluation metric report."""

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional

from segtransfer.exceptions import DegenerateInputError


def success_rate(miou_clean: float, miou_adv: float) -> float:
    """Fraction of segmentation quality destroyed: 1 − mIoU_adv / mIoU_clean.

    Not clamped; negative when the attack improves the target.

    Raises:
        DegenerateInputError: If ``miou_clean`` is not positive
    """
    if not miou_clean > 0:
        raise DegenerateInputError(f"Success rate is undefined for clean mIoU {miou_clean}")
    return 1.0 - miou_adv / miou_clean


@dataclass
class MetricReport:
    """Accuracy, image quality and attack success for one evaluation.

    ``ssim`` and ``success_rate`` are None where they are undefined (image
    smaller than the SSIM window, clean mIoU of zero).
    """

    miou: float
    per_class_iou: List[float]
    psnr_db: float
    ssim: Optional[float]
    success_rate: Optional[float]

    def to_dict(self) -> Dict[str, Any]:
        """JSON-compatible dict; absent classes (NaN IoU) become None."""
        data = asdict(self)
        data["per_class_iou"] = [None if math.isnan(value) else value for value in self.per_class_iou]
        return data
