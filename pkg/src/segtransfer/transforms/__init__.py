"""Input-diversity and gradient-smoothing transforms."""

from segtransfer.transforms.diverse_input import (
    DiverseInputParams,
    ResizePad,
    diverse_input,
    draw_resize_pad,
)
from segtransfer.transforms.gaussian_kernel import (
    GaussianKernel,
    KernelSpec,
    convolve_gradient,
    make_gaussian_kernel,
)

__all__ = [
    "DiverseInputParams",
    "ResizePad",
    "diverse_input",
    "draw_resize_pad",
    "GaussianKernel",
    "KernelSpec",
    "convolve_gradient",
    "make_gaussian_kernel",
]
