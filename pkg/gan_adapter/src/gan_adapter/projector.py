"""Project an image into the generator's w space by optimization.

Starts from the mean style vector and runs Adam on w against a
multi-scale image distance: pixel MSE plus the same MSE on 2x, 4x and
8x average-pooled copies, so coarse structure is matched before pixel
detail.  No stochastic terms: given the same generator, target, and
hyperparameters the optimization trajectory -- and therefore the
returned latent -- is bit-for-bit reproducible.
"""

import torch

from .generator import StyleGenerator

LEARNING_RATE = 0.1
POOL_FACTORS = (1, 2, 4, 8)
W_MEAN_SAMPLES = 256


def w_mean(gen: StyleGenerator, samples: int = W_MEAN_SAMPLES) -> torch.Tensor:
    """Mean style vector over seeded normal latents; shape (1, latent_dim)."""
    g = torch.Generator().manual_seed(gen.seed + 1)
    z = torch.randn(samples, gen.latent_dim, generator=g)
    with torch.no_grad():
        return gen.map_latent(z).mean(dim=0, keepdim=True)


def multi_scale_loss(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Summed MSE over average-pooled pyramids of the two image batches."""
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {tuple(a.shape)} vs {tuple(b.shape)}")
    total = torch.zeros((), dtype=a.dtype)
    for k in POOL_FACTORS:
        if a.shape[-1] < k or a.shape[-2] < k:
            break
        pa = torch.nn.functional.avg_pool2d(a, k) if k > 1 else a
        pb = torch.nn.functional.avg_pool2d(b, k) if k > 1 else b
        total = total + torch.mean((pa - pb) ** 2)
    return total


def project_latent(gen: StyleGenerator, target: torch.Tensor,
                   steps: int, lr: float = LEARNING_RATE):
    """Optimize w so the synthesis matches target (1, 3, R, R in [0, 1]).

    Returns (w, meta): w with shape (1, latent_dim), meta recording the
    hyperparameters and the loss at initialization and after the last
    step.  steps=0 returns the initialization itself.
    """
    if target.ndim != 4 or target.shape[0] != 1 or target.shape[1] != 3:
        raise ValueError(f"target must be (1, 3, H, W), got {tuple(target.shape)}")
    if target.shape[2] != gen.resolution or target.shape[3] != gen.resolution:
        raise ValueError(
            f"target is {target.shape[3]}x{target.shape[2]}, "
            f"generator expects {gen.resolution}x{gen.resolution}"
        )
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")

    w = w_mean(gen).clone().requires_grad_(True)
    optimizer = torch.optim.Adam([w], lr=lr)
    with torch.no_grad():
        loss_initial = float(multi_scale_loss(gen.synthesize(w), target))
    for _ in range(steps):
        optimizer.zero_grad()
        loss = multi_scale_loss(gen.synthesize(w), target)
        loss.backward()
        optimizer.step()
    with torch.no_grad():  # loss at the w actually returned
        loss_final = float(multi_scale_loss(gen.synthesize(w), target))
    meta = {
        "optimizer": "adam",
        "lr": lr,
        "steps": steps,
        "pool_factors": list(POOL_FACTORS),
        "w_mean_samples": W_MEAN_SAMPLES,
        "loss_initial": loss_initial,
        "loss_final": loss_final,
    }
    return w.detach(), meta
