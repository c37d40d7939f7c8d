"""Loading image/label pairs from disk."""

import logging
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from PIL import Image

from segtransfer.config.experiment import DatasetConfig
from segtransfer.exceptions import DatasetError, RejectedInputError
from segtransfer.oracle.types import ImageTensor, LabelMap
from segtransfer.utils.validation import validate_image_label_pair

logger = logging.getLogger(__name__)

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")

Sample = Tuple[ImageTensor, LabelMap, str]


def decode_image(path: Path) -> ImageTensor:
    """Decode a raster to floats in [0, 1]; 8-bit value 255 maps to exactly 1.0."""
    with Image.open(path) as raster:
        if raster.mode in ("I;16", "I;16B", "I;16L", "I"):
            data = np.asarray(raster, dtype=np.float64) / 65535.0
        else:
            if raster.mode not in ("L", "RGB"):
                raster = raster.convert("RGB")
            data = np.asarray(raster, dtype=np.float64) / 255.0
    if data.ndim == 2:
        data = data[..., None]
    return ImageTensor(data)


def decode_labels(path: Path, num_classes: int, ignore_index: int) -> LabelMap:
    """Decode a single-channel integer raster (grayscale or palette indices)."""
    with Image.open(path) as raster:
        if raster.mode not in ("L", "P", "I", "I;16"):
            raise RejectedInputError(f"Label raster {path.name} is not single-channel (mode {raster.mode})")
        data = np.asarray(raster)
    return LabelMap(data.astype(np.int64), num_classes, ignore_index)


def encode_image(image: np.ndarray, path: Path) -> None:
    """Write an image as a lossless 8-bit PNG after rounding to the nearest level."""
    levels = np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    if levels.shape[2] == 1:
        levels = levels[..., 0]
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(levels).save(path)


def encode_labels(labels: np.ndarray, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(labels, dtype=np.uint8)).save(path)


def quantize(image: np.ndarray) -> np.ndarray:
    """Round to the 8-bit grid; the perturbation may shrink by up to 0.5/255."""
    return np.round(np.clip(image, 0.0, 1.0) * 255.0) / 255.0


def _index(directory: Path) -> dict:
    return {
        path.stem: path
        for path in sorted(directory.iterdir())
        if path.is_file() and path.suffix.lower() in IMAGE_EXTENSIONS
    }


def load_dataset(config: DatasetConfig, limit: Optional[int] = None) -> List[Sample]:
    """Load image/label pairs matched by basename, sorted by id.

    Items without a partner or that fail to decode are logged and skipped.

    Args:
        config: Dataset configuration
        limit: Overrides ``config.limit`` when given

    Returns:
        List of (image, labels, id) tuples

    Raises:
        DatasetError: If no usable pair remains
    """
    if not config.images_dir.is_dir() or not config.labels_dir.is_dir():
        raise DatasetError(
            f"Dataset directories missing: {config.images_dir}, {config.labels_dir}"
        )
    images = _index(config.images_dir)
    labels = _index(config.labels_dir)

    samples: List[Sample] = []
    for sample_id in sorted(images):
        if sample_id not in labels:
            logger.warning(f"Skipping '{sample_id}': no label raster in {config.labels_dir}")
            continue
        try:
            image = decode_image(images[sample_id])
            label_map = decode_labels(labels[sample_id], config.num_classes, config.ignore_index)
            validation = validate_image_label_pair(image, label_map)
            if not validation["is_valid"]:
                raise RejectedInputError("; ".join(validation["issues"]))
        except (OSError, RejectedInputError) as e:
            logger.warning(f"Skipping '{sample_id}': {str(e)}")
            continue
        samples.append((image, label_map, sample_id))

    for sample_id in sorted(set(labels) - set(images)):
        logger.warning(f"Skipping label '{sample_id}': no image in {config.images_dir}")

    limit = limit if limit is not None else config.limit
    if limit is not None:
        samples = samples[:limit]
    if not samples:
        raise DatasetError(
            f"No usable image/label pairs in {config.images_dir} and {config.labels_dir}"
        )
    logger.info(f"Loaded {len(samples)} image/label pairs from {config.images_dir}")
    return samples
