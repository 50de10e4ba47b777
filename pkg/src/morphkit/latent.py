"""Latent-space morphing client: project, interpolate, synthesize.

All generator knowledge stays behind the adapter protocol; this module
only moves validated vectors around.  Projection results are cached on
disk keyed by image content hash, because projection dominates the cost
of a latent morph run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AdapterError
from .raster import Raster, load_image
from .util import alpha_weights, sha256_file


@dataclass(frozen=True)
class LatentVector:
    """A finite float vector plus the tag of the space it lives in."""

    values: np.ndarray
    space_tag: str = "W"

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError(f"latent must be a non-empty 1-D vector, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("latent values must be finite")
        if not self.space_tag:
            raise ValueError("latent space tag must be non-empty")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def dimension(self) -> int:
        return int(self.values.size)


def lerp_latent(wa: LatentVector, wb: LatentVector, alpha: float) -> LatentVector:
    """Componentwise alpha-weighted mean of two latents."""
    if wa.dimension != wb.dimension:
        raise ValueError(f"latent dimensions differ: {wa.dimension} vs {wb.dimension}")
    if wa.space_tag != wb.space_tag:
        raise ValueError(f"latent spaces differ: {wa.space_tag!r} vs {wb.space_tag!r}")
    w1, w2 = alpha_weights(alpha)
    return LatentVector(w1 * wa.values + w2 * wb.values, wa.space_tag)


def _validate_latent_payload(payload, context: str) -> LatentVector:
    if not isinstance(payload, dict) or not isinstance(payload.get("latent"), list):
        raise AdapterError(f"{context}: response carries no latent list")
    space = payload.get("space")
    if not isinstance(space, str) or not space:
        raise AdapterError(f"{context}: response carries no space tag")
    try:
        return LatentVector(np.asarray(payload["latent"], dtype=np.float64), space)
    except (ValueError, TypeError) as exc:
        raise AdapterError(f"{context}: invalid latent payload: {exc}") from exc


def project(adapter, image, steps: int = 1000, cache_dir=None) -> LatentVector:
    """Project an aligned image into the generator's latent space.

    With cache_dir set, the adapter response is stored verbatim as
    "<sha256-of-image-bytes>.latent.json" and replayed on later calls.
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    cache_path = None
    if cache_dir is not None:
        digest = sha256_file(image)
        cache_path = Path(cache_dir) / f"{digest}.latent.json"
        if cache_path.exists():
            with open(cache_path, "r", encoding="utf-8") as fh:
                payload = json.load(fh)
            return _validate_latent_payload(payload, f"latent cache {cache_path.name}")
    payload = adapter.request({"op": "project", "image": str(image), "steps": steps})
    latent = _validate_latent_payload(payload, f"projection of {image}")
    if cache_path is not None:
        cache_path.parent.mkdir(parents=True, exist_ok=True)
        with open(cache_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
    return latent


def synthesize(adapter, w: LatentVector, out) -> Raster:
    """Render a latent through the generator into a PNG at out."""
    response = adapter.request(
        {
            "op": "synthesize",
            "latent": [float(v) for v in w.values],
            "space": w.space_tag,
            "out": str(out),
        }
    )
    if response.get("ok") is not True:
        raise AdapterError(f"synthesis of {out} not acknowledged: {response!r}")
    width, height = response.get("width"), response.get("height")
    if not isinstance(width, int) or not isinstance(height, int):
        raise AdapterError(f"synthesis of {out} declared no output size")
    raster = load_image(out)
    if (raster.width, raster.height) != (width, height):
        raise AdapterError(
            f"synthesis of {out}: adapter declared {width}x{height}, "
            f"file is {raster.width}x{raster.height}"
        )
    return raster


def synthesize_many(adapter, vectors, out_paths) -> list[Raster]:
    """Synthesize a batch in order; output list matches input order."""
    vectors = list(vectors)
    out_paths = list(out_paths)
    if len(vectors) != len(out_paths):
        raise ValueError("one output path per latent vector required")
    return [synthesize(adapter, w, p) for w, p in zip(vectors, out_paths)]
