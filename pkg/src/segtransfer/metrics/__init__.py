"""Segmentation accuracy, image quality and attack success measures."""

from segtransfer.metrics.confusion import ConfusionMatrix, accumulate_confusion, miou
from segtransfer.metrics.image_quality import psnr, ssim
from segtransfer.metrics.report import MetricReport, success_rate

__all__ = [
    "ConfusionMatrix",
    "accumulate_confusion",
    "miou",
    "psnr",
    "ssim",
    "MetricReport",
    "success_rate",
]
