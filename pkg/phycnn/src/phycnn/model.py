"""Physics-informed 3D CNN for log-permeability regression.

Architecture (input 100^3 binary image + one connectivity scalar):

    conv(32, 5, same) - BN - LeakyReLU(0.1) - MaxPool(5, 5)   100 -> 20
    conv(64, 5, same) - BN - LeakyReLU(0.1) - MaxPool(5, 5)    20 -> 4
    conv(128, 3, same) - BN - LeakyReLU(0.1) - MaxPool(2, 2)    4 -> 2
    flatten (2^3 * 128 = 1024) - dense(64) - LeakyReLU(0.1)
    concat(physics scalar duplicated 64x)  -> width 128
    dense(32) - LeakyReLU(0.1) - dense(1)

The scalar pathway bypasses all convolutions, so the network can fall
back on pure connectivity information when the image pathway carries no
signal.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn


@dataclass
class PhyCnnConfig:
    leaky_slope: float = 0.1
    epochs: int = 15
    momentum: float = 0.9
    initial_lr: float = 0.0020
    lr_decay: float = 0.4
    lr_step_epochs: int = 4
    batch_size: int = 4
    input_size: int = 100
    physics_width: int = 64

    def __post_init__(self):
        if not 0.0 < self.leaky_slope < 1.0:
            raise ValueError("leaky_slope must lie in (0, 1)")
        if self.initial_lr <= 0:
            raise ValueError("initial_lr must be positive")


def _conv_block(cin, cout, kernel, pool, slope):
    return nn.Sequential(
        nn.Conv3d(cin, cout, kernel, padding="same"),
        nn.BatchNorm3d(cout),
        nn.LeakyReLU(slope),
        nn.MaxPool3d(pool, pool),
    )


class PhyCnn(nn.Module):
    def __init__(self, config: PhyCnnConfig | None = None):
        super().__init__()
        self.config = config or PhyCnnConfig()
        s = self.config.leaky_slope
        self.conv1 = _conv_block(1, 32, 5, 5, s)
        self.conv2 = _conv_block(32, 64, 5, 5, s)
        self.conv3 = _conv_block(64, 128, 3, 2, s)
        side = self.config.input_size // 50  # three pools: /5, /5, /2
        flat = 128 * side**3
        self.dense1 = nn.Linear(flat, self.config.physics_width)
        self.act = nn.LeakyReLU(s)
        self.dense2 = nn.Linear(2 * self.config.physics_width, 32)
        self.regression = nn.Linear(32, 1)

    def forward(self, image, physics):
        """image: (B, 1, n, n, n); physics: (B,) scalar feature."""
        x = self.conv3(self.conv2(self.conv1(image)))
        x = self.act(self.dense1(x.flatten(1)))
        phys = physics.reshape(-1, 1).expand(-1, self.config.physics_width)
        x = torch.cat([x, phys.to(x.dtype)], dim=1)
        x = self.act(self.dense2(x))
        return self.regression(x).squeeze(1)


def conv_block_learnables(block: nn.Sequential) -> int:
    """Learnable-parameter count of one conv block (conv + batch norm)."""
    return sum(p.numel() for p in block.parameters() if p.requires_grad)


def learnable_summary(model: PhyCnn) -> dict:
    return {
        "conv1": conv_block_learnables(model.conv1),
        "conv2": conv_block_learnables(model.conv2),
        "conv3": conv_block_learnables(model.conv3),
        "dense1": sum(p.numel() for p in model.dense1.parameters()),
        "dense2": sum(p.numel() for p in model.dense2.parameters()),
        "regression": sum(p.numel() for p in model.regression.parameters()),
    }
