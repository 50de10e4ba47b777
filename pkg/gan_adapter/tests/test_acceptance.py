"""Acceptance gate for the adapter: one verdict line per criterion.

Both criteria drive the real subprocess through the line-JSON
protocol only -- no reaching into server internals -- and the loss
oracle is an independent numpy reimplementation working from the PNG
files the adapter writes.
"""

import json
import string
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
from PIL import Image

from protocol_driver import ServerProc


@contextmanager
def criterion(name):
    try:
        yield
    except Exception:
        print(f"[acceptance] {name}: FAIL", flush=True)
        raise
    print(f"[acceptance] {name}: PASS", flush=True)


def load_png(path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0


def pyramid_loss(a: np.ndarray, b: np.ndarray) -> float:
    """Independent oracle for the adapter's multi-scale image distance."""
    assert a.shape == b.shape
    h, w, _ = a.shape
    total = 0.0
    for k in (1, 2, 4, 8):
        if h < k or w < k:
            break
        pa = a[: h // k * k, : w // k * k].reshape(h // k, k, w // k, k, 3).mean(axis=(1, 3))
        pb = b[: h // k * k, : w // k * k].reshape(h // k, k, w // k, k, 3).mean(axis=(1, 3))
        total += float(np.mean((pa - pb) ** 2))
    return total


def fuzz_lines(rng: np.random.Generator, tmp: Path, target: Path, n: int):
    """A hostile mix: valid requests, malformed JSON, wrong-typed fields."""
    printable = string.printable.replace("\n", "").replace("\r", "")
    lines = []
    for i in range(n):
        roll = rng.uniform()
        if roll < 0.08:
            lines.append(json.dumps({
                "op": "synthesize",
                "latent": [float(v) for v in rng.normal(0, 1, 32)],
                "space": "W",
                "out": str(tmp / f"fuzz_{i}.png"),
            }))
        elif roll < 0.13:
            lines.append(json.dumps({
                "op": "project", "image": str(target),
                "steps": int(rng.integers(0, 3)),
            }))
        elif roll < 0.20:  # omitted steps: server default must apply
            lines.append(json.dumps({"op": "project", "image": str(target)}))
        elif roll < 0.35:  # unparseable garbage
            length = int(rng.integers(0, 60))
            lines.append("".join(rng.choice(list(printable), length)))
        elif roll < 0.45:  # valid JSON, wrong shape
            lines.append(rng.choice([
                "42", '"string"', "[1,2,3]", "null", "true", "{}",
            ]))
        else:  # objects with broken fields
            lines.append(json.dumps(rng.choice([
                {"op": "transmogrify"},
                {"op": 5},
                {"op": "project"},
                {"op": "project", "image": 17},
                {"op": "project", "image": str(tmp / "missing.png")},
                {"op": "project", "image": str(target), "steps": -1},
                {"op": "project", "image": str(target), "steps": 0.5},
                {"op": "project", "image": str(target), "steps": True},
                {"op": "synthesize"},
                {"op": "synthesize", "latent": "nope", "out": "x.png"},
                {"op": "synthesize", "latent": [0.0] * 7, "out": "x.png"},
                {"op": "synthesize", "latent": [0.0] * 5000, "out": "x.png"},
                {"op": "synthesize", "latent": [0.0] * 32},
                {"op": "synthesize", "latent": [0.0] * 32, "space": "Z",
                 "out": "x.png"},
                {"latent": [0.0] * 32, "out": "x.png"},
            ])))
    return lines


def test_protocol_fuzz(tmp_path):
    with criterion("adapter protocol fuzz (1000 lines, one response each, <30s)"):
        rng = np.random.default_rng(1234)
        # --steps 1 keeps omitted-steps projections inside the budget
        with ServerProc("--tiny", "--seed", "0", "--steps", "1") as server:
            target = tmp_path / "target.png"
            resp = server.request({
                "op": "synthesize",
                "latent": [float(v) for v in rng.normal(0, 1, 32)],
                "out": str(target),
            })
            assert resp.get("ok") is True
            start = time.perf_counter()
            for line in fuzz_lines(rng, tmp_path, target, 1000):
                answer = json.loads(server.send_line(line))
                assert isinstance(answer, dict)
                assert ("error" in answer) != ("ok" in answer or "latent" in answer)
            elapsed = time.perf_counter() - start
            assert server.alive()
            assert elapsed < 30.0, f"took {elapsed:.2f}s"


def test_projection_and_lerp_endpoints(tmp_path):
    with criterion("projection >=10x loss reduction and bit-exact lerp endpoints"):
        rng = np.random.default_rng(42)
        with ServerProc("--tiny", "--seed", "0") as server:
            def synth(latent, name):
                path = tmp_path / name
                resp = server.request({"op": "synthesize", "latent": latent,
                                       "space": "W", "out": str(path)})
                assert resp.get("ok") is True
                return path

            def project(path, steps):
                resp = server.request({"op": "project", "image": str(path),
                                       "steps": steps})
                assert resp.get("space") == "W"
                return resp["latent"]

            target = synth([float(v) for v in rng.normal(0, 1, 32)], "target.png")
            w_init = project(target, steps=0)
            w_opt = project(target, steps=1000)
            init_png = synth(w_init, "init.png")
            resynth_png = synth(w_opt, "resynth.png")
            t = load_png(target)
            loss_init = pyramid_loss(t, load_png(init_png))
            loss_opt = pyramid_loss(t, load_png(resynth_png))
            assert loss_opt * 10.0 <= loss_init, (loss_init, loss_opt)

            # endpoint lerps are exact in float, so the synthesized PNGs
            # must be byte-identical to synthesizing the endpoints directly
            other = synth([float(v) for v in rng.normal(0, 1, 32)], "other.png")
            w_b = project(other, steps=50)
            for alpha, endpoint in ((1.0, w_init), (0.0, w_b)):
                mixed = [alpha * x + (1.0 - alpha) * y
                         for x, y in zip(w_init, w_b)]
                direct = synth(endpoint, f"direct_{alpha}.png")
                via_lerp = synth(mixed, f"lerp_{alpha}.png")
                assert direct.read_bytes() == via_lerp.read_bytes()
            midpoint = synth([0.5 * x + 0.5 * y for x, y in zip(w_init, w_b)],
                             "mid.png")
            assert midpoint.read_bytes() != (tmp_path / "direct_1.0.png").read_bytes()
