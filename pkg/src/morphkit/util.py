"""Small shared numeric helpers."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def alpha_weights(alpha: float) -> tuple[float, float]:
    """Split a blend factor into the weight pair (w_first, w_second).

    The first weight is derived as the exact float complement of the second
    (1 - (1 - alpha) rather than alpha itself).  This makes every alpha-weighted
    combination bit-symmetric: swapping the operands while replacing alpha by
    1 - alpha selects the exact same weight pair in the opposite order, so the
    results are identical to the last bit, not merely within rounding.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha!r}")
    w_second = 1.0 - alpha
    w_first = 1.0 - w_second
    return w_first, w_second


def round_half_away(values, decimals: int = 0):
    """Round half away from zero (numpy rounds half to even)."""
    import numpy as np

    scale = 10.0**decimals
    v = np.asarray(values, dtype=float) * scale
    return (np.sign(v) * np.floor(np.abs(v) + 0.5)) / scale


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def canonical_json(obj) -> str:
    """Deterministic JSON used for config hashing."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
