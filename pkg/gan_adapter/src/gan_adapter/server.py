"""Line-JSON request loop and command-line entry point.

One JSON object per stdin line, exactly one JSON object per stdout
line, until end-of-input.  All failures -- unparseable lines, unknown
ops, bad arguments, IO errors -- are reported in-band as
{"error": "..."}; nothing a client sends can kill the process.

Requests:
  {"op": "project", "image": "<path>", "steps": N}
      -> {"latent": [...], "space": "W", "meta": {...}}
  {"op": "synthesize", "latent": [...], "space": "W", "out": "<path>"}
      -> {"ok": true, "width": R, "height": R}
"""

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .generator import StyleGenerator, load_checkpoint, save_checkpoint
from .projector import project_latent

LATENT_SPACE = "W"


@dataclass(frozen=True)
class AdapterConfig:
    """Checkpoint or tiny-from-seed generator, plus projection defaults."""

    checkpoint: Path | None = None
    tiny: bool = False
    seed: int = 0
    steps: int = 1000
    resolution: int = 32
    latent_dim: int = 32
    channels: int = 32
    device: str = "cpu"

    def __post_init__(self):
        if self.tiny == (self.checkpoint is not None):
            raise ValueError("exactly one of --tiny or --checkpoint is required")
        if self.checkpoint is not None and not Path(self.checkpoint).is_file():
            raise ValueError(f"checkpoint not found: {self.checkpoint}")
        if self.steps < 0:
            raise ValueError(f"default projection steps must be >= 0, got {self.steps}")
        if self.device != "cpu" and not torch.cuda.is_available():
            raise ValueError(f"device {self.device!r} is not available")


def build_generator(cfg: AdapterConfig) -> StyleGenerator:
    if cfg.checkpoint is not None:
        gen = load_checkpoint(cfg.checkpoint)
    else:
        gen = StyleGenerator(cfg.latent_dim, cfg.channels, cfg.resolution, cfg.seed)
    gen.eval()
    return gen.to(cfg.device)


def _load_target(gen: StyleGenerator, path: str) -> torch.Tensor:
    file = Path(path)
    if not file.is_file():
        raise ValueError(f"image not found: {path}")
    with Image.open(file) as img:
        rgb = img.convert("RGB")
        if rgb.size != (gen.resolution, gen.resolution):
            raise ValueError(
                f"image is {rgb.size[0]}x{rgb.size[1]}, "
                f"generator expects {gen.resolution}x{gen.resolution}"
            )
        data = np.asarray(rgb, dtype=np.float32) / 255.0
    return torch.from_numpy(data).permute(2, 0, 1).unsqueeze(0)


def _handle_project(gen: StyleGenerator, cfg: AdapterConfig, req: dict) -> dict:
    steps = req.get("steps", cfg.steps)
    if not isinstance(steps, int) or isinstance(steps, bool) or steps < 0:
        raise ValueError(f"steps must be a non-negative integer, got {steps!r}")
    target = _load_target(gen, str(req.get("image", "")))
    w, meta = project_latent(gen, target, steps)
    return {
        "latent": [float(v) for v in w.squeeze(0)],
        "space": LATENT_SPACE,
        "meta": meta,
    }


def _handle_synthesize(gen: StyleGenerator, req: dict) -> dict:
    latent = req.get("latent")
    if not isinstance(latent, list) or len(latent) != gen.latent_dim:
        raise ValueError(
            f"latent must be a list of {gen.latent_dim} numbers, "
            f"got {type(latent).__name__}"
        )
    space = req.get("space", LATENT_SPACE)
    if space != LATENT_SPACE:
        raise ValueError(f"unknown latent space {space!r}, this generator serves W")
    out = req.get("out")
    if not out:
        raise ValueError("synthesize needs an output path in 'out'")
    w = torch.tensor([latent], dtype=torch.float32)
    if not torch.all(torch.isfinite(w)):
        raise ValueError("latent values must be finite numbers")
    with torch.no_grad():
        img = gen.synthesize(w)[0].permute(1, 2, 0).numpy()
    data = np.clip(img * 255.0 + 0.5, 0.0, 255.0).astype(np.uint8)
    Image.fromarray(data).save(out, format="PNG")
    return {"ok": True, "width": gen.resolution, "height": gen.resolution}


def serve(gen: StyleGenerator, cfg: AdapterConfig,
          stdin=None, stdout=None) -> None:
    """Answer every input line with exactly one response line until EOF."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        try:
            req = json.loads(line)
            if not isinstance(req, dict):
                raise ValueError("request must be a JSON object")
            op = req.get("op")
            if op == "project":
                resp = _handle_project(gen, cfg, req)
            elif op == "synthesize":
                resp = _handle_synthesize(gen, req)
            else:
                raise ValueError(f"unknown op {op!r}")
        except Exception as exc:  # in-band errors only; the loop survives
            resp = {"error": str(exc)}
        print(json.dumps(resp), file=stdout, flush=True)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gan-adapter",
        description="Serve latent projection and synthesis over line-JSON stdio.",
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--checkpoint", type=Path, help="generator checkpoint to load")
    source.add_argument("--tiny", action="store_true",
                        help="build a small untrained generator from --seed")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--steps", type=int, default=1000,
                        help="default projection step budget")
    parser.add_argument("--resolution", type=int, default=32,
                        help="tiny generator output size (4*2^k)")
    parser.add_argument("--latent-dim", type=int, default=32)
    parser.add_argument("--channels", type=int, default=32)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--export-checkpoint", type=Path, default=None,
                        help="write the generator to this path and exit")
    args = parser.parse_args(argv)

    torch.set_num_threads(1)  # keeps reductions, and thus latents, bit-stable
    try:
        cfg = AdapterConfig(
            checkpoint=args.checkpoint, tiny=args.tiny, seed=args.seed,
            steps=args.steps, resolution=args.resolution,
            latent_dim=args.latent_dim, channels=args.channels,
            device=args.device,
        )
        gen = build_generator(cfg)
        if args.export_checkpoint is not None:
            save_checkpoint(gen, args.export_checkpoint)
            return 0
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    serve(gen, cfg)
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
