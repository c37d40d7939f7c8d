"""Small fully-convolutional segmenters for tests and desk-scale experiments."""

from typing import Dict, Type

import torch
from torch import nn

from segtransfer.exceptions import RejectedInputError


class PlainConvNet(nn.Module):
    """Stacked 3×3 convolutions with SiLU activations and no skip connections."""

    def __init__(self, in_channels: int, num_classes: int, hidden: int = 16, depth: int = 3):
        super().__init__()
        layers = []
        channels = in_channels
        for _ in range(depth):
            layers += [nn.Conv2d(channels, hidden, kernel_size=3, padding=1), nn.SiLU()]
            channels = hidden
        layers.append(nn.Conv2d(channels, num_classes, kernel_size=1))
        self.body = nn.Sequential(*layers)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.body(x)


class DilatedResidualNet(nn.Module):
    """Dilated 3×3 convolutions with a residual connection around them."""

    def __init__(self, in_channels: int, num_classes: int, hidden: int = 16, depth: int = 3):
        super().__init__()
        self.stem = nn.Conv2d(in_channels, hidden, kernel_size=3, padding=1)
        self.blocks = nn.ModuleList(
            nn.Conv2d(hidden, hidden, kernel_size=3, padding=2 ** (i + 1), dilation=2 ** (i + 1))
            for i in range(depth - 1)
        )
        self.head = nn.Conv2d(hidden, num_classes, kernel_size=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        features = torch.tanh(self.stem(x))
        for block in self.blocks:
            features = features + torch.tanh(block(features))
        return self.head(features)


ARCHITECTURES: Dict[str, Type[nn.Module]] = {
    "plain": PlainConvNet,
    "dilated": DilatedResidualNet,
}


def build_toy_conv(
    architecture: str,
    in_channels: int,
    num_classes: int,
    hidden: int = 16,
    depth: int = 3,
    seed: int = 0
) -> nn.Module:
    """Build a toy network with seeded initialization.

    Args:
        architecture: One of ``ARCHITECTURES``
        in_channels: Number of input channels
        num_classes: Number of output classes
        hidden: Width of hidden layers
        depth: Number of 3×3 convolutions
        seed: Seed for parameter initialization

    Returns:
        The initialized module
    """
    if architecture not in ARCHITECTURES:
        raise RejectedInputError(
            f"Unknown toy-conv architecture '{architecture}'. "
            f"Available: {', '.join(sorted(ARCHITECTURES))}"
        )
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        return ARCHITECTURES[architecture](in_channels, num_classes, hidden=hidden, depth=depth)
