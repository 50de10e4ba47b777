#!/usr/bin/env python3
"""End-to-end vulnerability run on a self-made synthetic dataset.

Builds four synthetic subjects (enrollment shot + later recapture),
morphs two disjoint subject pairs, embeds everything with a toy
pixel-statistics extractor, writes the scenario manifests both ways
(morphs enrolled as references, morphs presented as probes), and runs
the `evaluate` subcommand on the result.  Everything lands in
demos/out/eval/.

The toy extractor is deliberately weak -- downsampled, mean-centered
pixels -- but it is enough to show the mechanics: a morph sits between
its contributors in feature space, so at a practical threshold it is
accepted for both of them.
"""

import csv
import json
import sys
from pathlib import Path

import numpy as np

from _synth import recapture, synth_face, synth_landmarks
from morphkit.cli import main as cli_main
from morphkit.morph import MorphConfig, morph_pair
from morphkit.raster import Raster, load_image, save_image

OUT = Path(__file__).resolve().parent / "out" / "eval"
SUBJECTS = ["s1", "s2", "s3", "s4"]
MORPH_PAIRS = [("s1", "s2"), ("s3", "s4")]


def toy_embedding(img: Raster, cell: int = 12) -> np.ndarray:
    """Block-mean downsample, flattened and mean-centered."""
    h = img.height // cell
    w = img.width // cell
    blocks = img.data[: h * cell, : w * cell].reshape(h, cell, w, cell, 3)
    vec = blocks.mean(axis=(1, 3)).ravel()
    return vec - vec.mean()


def main() -> None:
    images = OUT / "images"
    images.mkdir(parents=True, exist_ok=True)

    paths = {}
    for i, subject in enumerate(SUBJECTS):
        face = synth_face(20 + i)
        lm = synth_landmarks(20 + i)
        paths[f"{subject}_ref"] = (face, lm)
        paths[f"{subject}_probe"] = (recapture(face, seed=i), lm)
    for a, b in MORPH_PAIRS:
        face_a, lm_a = paths[f"{a}_ref"]
        face_b, lm_b = paths[f"{b}_ref"]
        morphed = morph_pair(face_a, lm_a, face_b, lm_b, MorphConfig(alpha=0.5))
        paths[f"morph_{a}_{b}"] = (morphed, None)
    for name, (img, _) in paths.items():
        save_image(img, images / f"{name}.png")

    with open(OUT / "embeddings.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        dim = toy_embedding(paths["s1_ref"][0]).size
        writer.writerow(["sample_id", "owner_id"] + [f"v{i}" for i in range(dim)])
        for name, (img, _) in paths.items():
            owner = name.split("_")[0] if not name.startswith("morph") else name
            vec = toy_embedding(load_image(images / f"{name}.png"))
            writer.writerow([f"{name}.png", owner] + [repr(float(v)) for v in vec])

    header = ["role", "kind", "id", "subject", "contributor_a", "contributor_b", "path"]
    with open(OUT / "scenario_references.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for s in SUBJECTS:
            writer.writerow(["reference", "bonafide", f"m_{s}", s, "", "", f"{s}_ref.png"])
            writer.writerow(["probe", "bonafide", f"{s}_probe", s, "", "", f"{s}_probe.png"])
        for a, b in MORPH_PAIRS:
            writer.writerow(["reference", "morph", f"m_{a}{b}", "", a, b, f"morph_{a}_{b}.png"])
    with open(OUT / "scenario_probes.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for s in SUBJECTS:
            writer.writerow(["reference", "bonafide", f"m_{s}", s, "", "", f"{s}_ref.png"])
            writer.writerow(["probe", "bonafide", f"{s}_probe", s, "", "", f"{s}_probe.png"])
        for a, b in MORPH_PAIRS:
            writer.writerow(["probe", "morph", f"p_{a}{b}", "", a, b, f"morph_{a}_{b}.png"])

    config = {
        "dataset": "synthetic4", "frs": "toy-pixel", "tool": "landmark",
        "target_fmr": 0.1, "direction": "both",
        "embeddings": "embeddings.csv",
        "scenario_references": "scenario_references.csv",
        "scenario_probes": "scenario_probes.csv",
        "output_root": "results",
    }
    (OUT / "config.json").write_text(json.dumps(config, indent=2))

    code = cli_main(["evaluate", "--config", str(OUT / "config.json")])
    print("\nexit code:", code)
    print("score dumps and report.csv in", OUT / "results")
    sys.exit(code)


if __name__ == "__main__":
    main()
