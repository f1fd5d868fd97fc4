"""Hybrid residual encoder-decoder for next-state prediction.

Structure: an 8x8 convolution at entry and exit; between them an encoder
of alternating identity and downsampling bottleneck blocks (each block is
1x1 -> 4x4 or 2x2 -> 1x1 convolutions with batch norm after every stage),
a dropout layer in the latent space, and a mirrored decoder whose middle
stages are transposed convolutions.  Short-range residual shortcuts are
identity where dimensions are preserved and strided 1x1/2x2 projections
where they change; one long-range skip concatenates the network input to
the decoder output before the exit convolution.  Fully convolutional:
there is no dense layer anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

__all__ = ["ModelConfig", "build_model", "HybridResUNet", "count_parameters"]


@dataclass
class ModelConfig:
    """Architecture and optimization settings.

    downsample_kernels lists the middle-stage kernel of each downsampling
    block (one identity block precedes each); the decoder mirrors it in
    reverse.  learning_rate 1e-4 is the reference value; desk-scale runs
    typically raise it and cut epochs.
    """

    k_inputs: int = 3
    base_filters: int = 32
    downsample_kernels: tuple[int, ...] = (4, 2)
    short_range_residual: bool = True
    long_range_concat: bool = True
    latent_dropout_rate: float = 0.2
    learning_rate: float = 0.0001
    lr_decay_at: tuple[int, ...] = ()  # epochs after which lr is multiplied down
    lr_decay_factor: float = 0.3
    epochs: int = 50
    batch_size: int = 32
    seed: int = 0

    def downsample_factor(self) -> int:
        return 2 ** len(self.downsample_kernels)


def _pad_same(kernel: int) -> nn.Module:
    """Zero padding that keeps stride-1 convolutions size-preserving."""
    total = kernel - 1
    before = total // 2
    return nn.ZeroPad2d((before, total - before, before, total - before))


def _conv1x1(in_ch: int, out_ch: int) -> list[nn.Module]:
    return [nn.Conv2d(in_ch, out_ch, 1), nn.BatchNorm2d(out_ch)]


class Bottleneck(nn.Module):
    """1x1 -> kxk -> 1x1 block with an optional residual shortcut.

    mode "same" keeps dimensions (identity shortcut), "down" halves them
    with a strided middle stage (1x1 strided projection shortcut), "up"
    doubles them with a transposed middle stage (2x2 transposed projection
    shortcut).
    """

    def __init__(self, in_ch: int, out_ch: int, mid_kernel: int, mode: str,
                 residual: bool):
        super().__init__()
        if mode not in ("same", "down", "up"):
            raise ValueError(f"unknown block mode {mode!r}")
        self.mode = mode
        self.residual = residual
        mid = max(out_ch // 2, 8)

        stages: list[nn.Module] = [*_conv1x1(in_ch, mid), nn.ReLU(inplace=True)]
        if mode == "same":
            stages += [_pad_same(mid_kernel), nn.Conv2d(mid, mid, mid_kernel)]
        elif mode == "down":
            pad = (mid_kernel - 2) // 2  # exact halving for kernels 2 and 4
            stages += [nn.Conv2d(mid, mid, mid_kernel, stride=2, padding=pad)]
        else:
            pad = (mid_kernel - 2) // 2  # exact doubling for kernels 2 and 4
            stages += [nn.ConvTranspose2d(mid, mid, mid_kernel, stride=2, padding=pad)]
        stages += [nn.BatchNorm2d(mid), nn.ReLU(inplace=True), *_conv1x1(mid, out_ch)]
        self.body = nn.Sequential(*stages)

        if not residual:
            self.shortcut = None
        elif mode == "same" and in_ch == out_ch:
            self.shortcut = nn.Identity()
        elif mode == "down":
            self.shortcut = nn.Sequential(nn.Conv2d(in_ch, out_ch, 1, stride=2),
                                          nn.BatchNorm2d(out_ch))
        elif mode == "up":
            self.shortcut = nn.Sequential(nn.ConvTranspose2d(in_ch, out_ch, 2, stride=2),
                                          nn.BatchNorm2d(out_ch))
        else:
            self.shortcut = nn.Sequential(*_conv1x1(in_ch, out_ch))
        self.activate = nn.ReLU(inplace=True)

    def forward(self, x):
        out = self.body(x)
        if self.shortcut is not None:
            out = out + self.shortcut(x)
        return self.activate(out)


class HybridResUNet(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        base = config.base_filters
        residual = config.short_range_residual

        self.entry = nn.Sequential(
            _pad_same(8), nn.Conv2d(config.k_inputs, base, 8),
            nn.BatchNorm2d(base), nn.ReLU(inplace=True),
        )

        encoder: list[nn.Module] = []
        ch = base
        for kernel in config.downsample_kernels:
            encoder.append(Bottleneck(ch, ch, 2, "same", residual))
            encoder.append(Bottleneck(ch, ch * 2, kernel, "down", residual))
            ch *= 2
        self.encoder = nn.Sequential(*encoder)

        self.latent_dropout = nn.Dropout(config.latent_dropout_rate)

        # the long-range skip concatenates the raw input frames to the
        # decoder's output stage: its final block consumes them directly
        decoder: list[nn.Module] = []
        for kernel in reversed(config.downsample_kernels):
            decoder.append(Bottleneck(ch, ch // 2, kernel, "up", residual))
            ch //= 2
            last = ch == base
            in_ch = ch + (config.k_inputs if last and config.long_range_concat else 0)
            decoder.append(Bottleneck(in_ch, ch, 2, "same", residual))
        self.decoder = nn.Sequential(*decoder)

        # output stage: 8x8 aggregation, one ReLU stage, 1x1 head -- per-cell
        # count membership is a one-hidden-layer function of the window, so
        # this stage can express any local transition given rule context
        self.exit = nn.Sequential(
            _pad_same(8), nn.Conv2d(ch, base, 8),
            nn.BatchNorm2d(base), nn.ReLU(inplace=True),
            nn.Conv2d(base, 1, 1), nn.Sigmoid(),
        )

    def forward(self, x):
        h = self.entry(x)
        h = self.encoder(h)
        h = self.latent_dropout(h)
        for i, block in enumerate(self.decoder):
            if i == len(self.decoder) - 1 and self.config.long_range_concat:
                h = torch.cat([h, x], dim=1)
            h = block(h)
        return self.exit(h)


def build_model(config: ModelConfig, height: int, width: int) -> HybridResUNet:
    """Construct the network and check the grid fits the downsampling plan."""
    factor = config.downsample_factor()
    if height % factor or width % factor:
        raise ValueError(
            f"grid {height}x{width} incompatible with {len(config.downsample_kernels)} "
            f"downsampling stages: both dimensions must be divisible by {factor}"
        )
    torch.manual_seed(config.seed)
    return HybridResUNet(config)


def count_parameters(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters() if p.requires_grad)
