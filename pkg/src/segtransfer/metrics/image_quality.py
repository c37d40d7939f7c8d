"""Image-quality measures on [0, 1] images."""

import logging
from typing import Optional

import numpy as np
from scipy import ndimage

from segtransfer.exceptions import RejectedInputError
from segtransfer.oracle.types import ImageTensor

logger = logging.getLogger(__name__)

PSNR_CAP_DB = 100.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(a, b):
    a_data = a.data if isinstance(a, ImageTensor) else np.asarray(a, dtype=np.float64)
    b_data = b.data if isinstance(b, ImageTensor) else np.asarray(b, dtype=np.float64)
    if a_data.shape != b_data.shape:
        raise RejectedInputError(f"Image shapes differ: {a_data.shape} vs {b_data.shape}")
    return a_data, b_data


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB for dynamic range 1, capped at 100 dB."""
    a_data, b_data = _pair(a, b)
    mse = float(np.mean((a_data - b_data) ** 2))
    if mse < 1e-10:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * np.log10(1.0 / mse))


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    offsets = np.arange(size) - (size - 1) / 2
    profile = np.exp(-(offsets ** 2) / (2.0 * sigma ** 2))
    window = np.outer(profile, profile)
    return window / window.sum()


def ssim(a, b) -> float:
    """Single-scale SSIM averaged over valid window positions and channels.

    Uses an 11×11 Gaussian window with sigma 1.5, K1 = 0.01, K2 = 0.03 and
    dynamic range 1.

    Raises:
        RejectedInputError: If the image is smaller than the window
    """
    a_data, b_data = _pair(a, b)
    if a_data.ndim == 2:
        a_data, b_data = a_data[..., None], b_data[..., None]
    height, width = a_data.shape[:2]
    if height < SSIM_WINDOW or width < SSIM_WINDOW:
        raise RejectedInputError(
            f"SSIM needs images of at least {SSIM_WINDOW}×{SSIM_WINDOW}, got {height}×{width}"
        )

    window = gaussian_window()
    radius = SSIM_WINDOW // 2
    crop = (slice(radius, height - radius), slice(radius, width - radius))
    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2

    scores = []
    for channel in range(a_data.shape[2]):
        x, y = a_data[..., channel], b_data[..., channel]

        def local_mean(values: np.ndarray) -> np.ndarray:
            return ndimage.correlate(values, window, mode="constant", cval=0.0)[crop]

        mu_x, mu_y = local_mean(x), local_mean(y)
        var_x = local_mean(x * x) - mu_x ** 2
        var_y = local_mean(y * y) - mu_y ** 2
        cov = local_mean(x * y) - mu_x * mu_y
        numerator = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
        denominator = (mu_x ** 2 + mu_y ** 2 + c1) * (var_x + var_y + c2)
        scores.append(np.mean(numerator / denominator))
    return float(np.mean(scores))


def ssim_or_none(a, b) -> Optional[float]:
    """SSIM, or None when the images are smaller than the window."""
    try:
        return ssim(a, b)
    except RejectedInputError as e:
        logger.warning(f"SSIM not reported: {str(e)}")
        return None


def mean_ssim(pairs) -> Optional[float]:
    """Mean SSIM over (adversarial, clean) pairs; None if any pair is too small."""
    scores = [ssim_or_none(adv, clean) for adv, clean in pairs]
    if not scores or any(score is None for score in scores):
        return None
    return float(np.mean(scores))
