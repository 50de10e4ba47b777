"""A miniature style-modulated convolutional generator.

Small enough to run untrained on a CPU: a mapping MLP turns a normal
latent z into a style vector w, and a stack of upsample/conv blocks
turns a learned constant into an RGB image, with w modulating each
block's channels and fixed per-resolution noise buffers adding
texture.  Untrained weights still give a smooth, differentiable
mapping from w to pixels, which is all the projection tests need.

Everything random (weights and noise buffers) is drawn from one seeded
torch.Generator, so a (seed, architecture) pair pins every output bit.
"""

import math
from pathlib import Path

import torch
import torch.nn.functional as F
from torch import nn


class StyleBlock(nn.Module):
    """Conv + fixed noise + leaky ReLU + per-channel style scale/shift."""

    def __init__(self, channels: int, latent_dim: int, size: int):
        super().__init__()
        self.conv = nn.Conv2d(channels, channels, 3, padding=1)
        self.noise_strength = nn.Parameter(torch.zeros(channels))
        self.affine = nn.Linear(latent_dim, 2 * channels)
        self.register_buffer("noise", torch.zeros(1, 1, size, size))

    def forward(self, x: torch.Tensor, w: torch.Tensor) -> torch.Tensor:
        x = self.conv(x)
        x = x + self.noise * self.noise_strength[None, :, None, None]
        x = F.leaky_relu(x, 0.2)
        scale, shift = self.affine(w).chunk(2, dim=1)
        return x * (1.0 + scale[:, :, None, None]) + shift[:, :, None, None]


class StyleGenerator(nn.Module):
    """Maps a latent w to an RGB image in [0, 1].

    resolution must be 4 * 2^k; the synthesis trunk starts from a
    learned 4x4 constant and doubles up to it.
    """

    def __init__(self, latent_dim: int = 32, channels: int = 32,
                 resolution: int = 32, seed: int = 0):
        super().__init__()
        size, doublings = 4, 0
        while size < resolution:
            size, doublings = size * 2, doublings + 1
        if size != resolution or resolution < 4:
            raise ValueError(f"resolution must be 4*2^k, got {resolution}")
        self.latent_dim = latent_dim
        self.channels = channels
        self.resolution = resolution
        self.seed = seed

        self.mapping = nn.Sequential(
            nn.Linear(latent_dim, latent_dim), nn.LeakyReLU(0.2),
            nn.Linear(latent_dim, latent_dim),
        )
        self.const = nn.Parameter(torch.zeros(1, channels, 4, 4))
        blocks = [StyleBlock(channels, latent_dim, 4)]
        for i in range(doublings):
            blocks.append(StyleBlock(channels, latent_dim, 8 * 2 ** i))
        self.blocks = nn.ModuleList(blocks)
        self.to_rgb = nn.Conv2d(channels, 3, 1)
        self._init_weights()

    def _init_weights(self) -> None:
        # fan-in scaling keeps activations O(1); hotter inits saturate
        # the output sigmoid and stall latent optimization
        g = torch.Generator().manual_seed(self.seed)
        for param in self.parameters():
            if param.ndim >= 2:
                fan_in = param.shape[1:].numel()
                param.data.normal_(0.0, 1.0 / math.sqrt(fan_in), generator=g)
            else:
                param.data.normal_(0.0, 0.1, generator=g)
        for block in self.blocks:
            block.noise.normal_(0.0, 1.0, generator=g)

    def map_latent(self, z: torch.Tensor) -> torch.Tensor:
        if z.ndim != 2 or z.shape[1] != self.latent_dim:
            raise ValueError(f"z must be (n, {self.latent_dim}), got {tuple(z.shape)}")
        return self.mapping(z)

    def synthesize(self, w: torch.Tensor) -> torch.Tensor:
        """w of shape (n, latent_dim) -> images (n, 3, R, R) in [0, 1]."""
        if w.ndim != 2 or w.shape[1] != self.latent_dim:
            raise ValueError(f"w must be (n, {self.latent_dim}), got {tuple(w.shape)}")
        x = self.const.expand(w.shape[0], -1, -1, -1)
        x = self.blocks[0](x, w)
        for block in self.blocks[1:]:
            x = F.interpolate(x, scale_factor=2, mode="nearest")
            x = block(x, w)
        return torch.sigmoid(self.to_rgb(x))


def save_checkpoint(gen: StyleGenerator, path) -> None:
    torch.save(
        {
            "latent_dim": gen.latent_dim,
            "channels": gen.channels,
            "resolution": gen.resolution,
            "seed": gen.seed,
            "state": gen.state_dict(),
        },
        path,
    )


def load_checkpoint(path) -> StyleGenerator:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    payload = torch.load(path, map_location="cpu", weights_only=True)
    for key in ("latent_dim", "channels", "resolution", "seed", "state"):
        if key not in payload:
            raise ValueError(f"checkpoint {path} is missing {key!r}")
    gen = StyleGenerator(payload["latent_dim"], payload["channels"],
                         payload["resolution"], payload["seed"])
    gen.load_state_dict(payload["state"])
    gen.eval()
    return gen
