"""Shared fixtures: toy oracles, random images and a tiny on-disk dataset."""

import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from segtransfer.harness.dataset import encode_image, encode_labels
from segtransfer.oracle.toy_linear import ToyLinearSegmenter
from segtransfer.oracle.types import ImageTensor, LabelMap

# 3 channels, 3 classes; each class prefers one colour channel
TOY_WEIGHTS = [
    [4.0, -2.0, -2.0],
    [-2.0, 4.0, -2.0],
    [-2.0, -2.0, 4.0],
]
TOY_BIASES = [0.0, 0.1, -0.1]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def toy_oracle():
    """Three-class linear segmenter over RGB pixels."""
    return ToyLinearSegmenter(np.array(TOY_WEIGHTS), np.array(TOY_BIASES), identifier="toy-a")


@pytest.fixture
def other_oracle():
    """A second linear segmenter with different weights, used as transfer target."""
    weights = np.array(TOY_WEIGHTS) * 0.5 + np.array([[0.3, 0.0, -0.3], [0.0, 0.2, 0.0], [-0.1, 0.0, 0.4]])
    return ToyLinearSegmenter(weights, np.zeros(3), identifier="toy-b")


@pytest.fixture
def make_image():
    def factory(height: int = 8, width: int = 8, channels: int = 3, seed: int = 0) -> ImageTensor:
        return ImageTensor(np.random.default_rng(seed).uniform(0.05, 0.95, size=(height, width, channels)))
    return factory


@pytest.fixture
def make_labels():
    def factory(height: int = 8, width: int = 8, num_classes: int = 3, seed: int = 0) -> LabelMap:
        data = np.random.default_rng(seed + 10_000).integers(0, num_classes, size=(height, width))
        return LabelMap(data, num_classes)
    return factory


def shapes_sample(seed: int, size: int = 16):
    """Image whose dominant channel matches the label of each pixel, plus some noise."""
    generator = np.random.default_rng(seed)
    labels = np.zeros((size, size), dtype=np.int64)
    top, left = generator.integers(0, size // 2, size=2)
    labels[top:top + size // 2, left:left + size // 2] = 1
    labels[size - 4:, :] = 2
    image = generator.uniform(0.0, 0.3, size=(size, size, 3))
    for cls in range(3):
        image[..., cls] += np.where(labels == cls, 0.6, 0.0)
    return np.clip(image, 0.0, 1.0), labels


@pytest.fixture
def dataset_dir(tmp_path):
    """Four 16×16 RGB images with matching label rasters."""
    images_dir = tmp_path / "images"
    labels_dir = tmp_path / "labels"
    for i in range(4):
        image, labels = shapes_sample(i)
        encode_image(image, images_dir / f"img_{i:02d}.png")
        encode_labels(labels, labels_dir / f"img_{i:02d}.png")
    return tmp_path


@pytest.fixture
def experiment_dict(dataset_dir):
    """Two linear models, two attacks, full source × target grid."""
    other = (np.array(TOY_WEIGHTS) * 0.5 + np.array([[0.3, 0.0, -0.3], [0.0, 0.2, 0.0], [-0.1, 0.0, 0.4]])).tolist()
    return {
        "dataset": {"images_dir": "images", "labels_dir": "labels", "num_classes": 3},
        "models": [
            {"id": "toy-a", "adapter": "toy-linear", "params": {"weights": TOY_WEIGHTS, "biases": TOY_BIASES}},
            {"id": "toy-b", "adapter": "toy-linear", "params": {"weights": other}},
        ],
        "attacks": [
            {"name": "fgsm", "config": {"epsilon": 0.05}},
            {"name": "pgd", "config": {"epsilon": 0.05, "iterations": 5}},
        ],
        "sources": ["toy-a", "toy-b"],
        "targets": ["toy-a", "toy-b"],
        "seed": 7,
        "output_dir": "out",
    }


@pytest.fixture
def config_file(dataset_dir, experiment_dict):
    path = dataset_dir / "experiment.json"
    path.write_text(json.dumps(experiment_dict), encoding="utf-8")
    return path
