"""Command-line surface: landmark extraction, morph generation, evaluation.

One JSON config file describes a run; flags override individual keys.
Every command writes a run-metadata JSON (config hash, versions,
timestamp) next to its outputs so a run can be re-executed and checked
byte-for-byte.  Exit codes: 0 success, 1 validation failure, 2 per-item
failures in an otherwise completed run.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from pathlib import Path

import numpy as np
import PIL

from . import __version__
from .adapters import LineJsonAdapter
from .errors import MorphkitError
from .landmarks import (
    AlignmentTemplate,
    align_to_template,
    detect_landmarks_external,
    format_points_text,
    load_points_file,
)
from .latent import lerp_latent, project, synthesize
from .metrics import evaluate, load_report_csv, merge_reports, render_report, render_report_csv
from .morph import MorphConfig, MorphResult, generate_set, morph_output_name, write_manifest
from .protocols import (
    MORPHS_AS_PROBES,
    MORPHS_AS_REFERENCES,
    enumerate_trials,
    load_pair_protocol,
    load_scenario_manifest,
)
from .raster import load_image, save_image
from .scoring import parse_embeddings, score_trials, write_score_dump
from .util import config_hash

_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}
_PATH_KEYS = (
    "protocol", "image_root", "landmark_root", "output_root", "embeddings",
    "scenario_references", "scenario_probes", "alignment_template",
)
_DIRECTIONS = {
    "references": (MORPHS_AS_REFERENCES,),
    "probes": (MORPHS_AS_PROBES,),
    "both": (MORPHS_AS_REFERENCES, MORPHS_AS_PROBES),
}
_SCENARIO_KEY = {
    MORPHS_AS_REFERENCES: "scenario_references",
    MORPHS_AS_PROBES: "scenario_probes",
}
_DUMP_NAME = {
    MORPHS_AS_REFERENCES: "scores_references.csv",
    MORPHS_AS_PROBES: "scores_probes.csv",
}


class RunConfig:
    """Resolved run configuration: config-file values plus flag overrides."""

    DEFAULTS = {
        "tool": "landmark",
        "alpha": 0.5,
        "target_fmr": 0.001,
        "direction": "both",
        "workers": 1,
        "seed": 0,
        "aggregation": "max",
        "dataset": "dataset",
        "frs": "frs",
        "landmark_count": 68,
        "projection_steps": 1000,
        "border_augmentation": False,
        "adapters": {},
    }

    def __init__(self, values: dict):
        merged = dict(self.DEFAULTS)
        merged.update(values)
        self.values = merged
        self._validate()

    def _validate(self):
        v = self.values
        if v["tool"] not in ("landmark", "latent"):
            raise ValueError(f"tool must be landmark|latent, got {v['tool']!r}")
        if not 0.0 <= float(v["alpha"]) <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {v['alpha']!r}")
        if not 0.0 < float(v["target_fmr"]) < 1.0:
            raise ValueError(f"target_fmr must be in (0, 1), got {v['target_fmr']!r}")
        if v["direction"] not in _DIRECTIONS:
            raise ValueError(f"direction must be references|probes|both, got {v['direction']!r}")
        if int(v["workers"]) < 1:
            raise ValueError(f"workers must be >= 1, got {v['workers']!r}")
        if v["aggregation"] not in ("max", "mean"):
            raise ValueError(f"aggregation must be max|mean, got {v['aggregation']!r}")
        if not isinstance(v["adapters"], dict):
            raise ValueError("adapters must be an object of command lists")

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None

    def require(self, *keys) -> None:
        missing = [k for k in keys if k not in self.values]
        if missing:
            raise ValueError(f"config is missing required keys: {', '.join(missing)}")

    def require_file(self, key) -> Path:
        self.require(key)
        path = Path(self.values[key])
        if not path.is_file():
            raise ValueError(f"config {key} does not exist: {path}")
        return path

    def require_dir(self, key) -> Path:
        self.require(key)
        path = Path(self.values[key])
        if not path.is_dir():
            raise ValueError(f"config {key} is not a directory: {path}")
        return path

    def adapter_command(self, name: str) -> list[str]:
        command = self.values["adapters"].get(name)
        if not isinstance(command, list) or not command:
            raise ValueError(f"config adapters.{name} must be a non-empty command list")
        return [str(tok).replace("{seed}", str(self.values["seed"])) for tok in command]

    @classmethod
    def from_file(cls, path, overrides: dict) -> "RunConfig":
        config_path = Path(path)
        try:
            raw = json.loads(config_path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ValueError(f"cannot read config file {config_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValueError(f"config file {config_path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ValueError(f"config file {config_path} must hold a JSON object")

        base = config_path.resolve().parent
        for key in _PATH_KEYS:
            if key in raw and raw[key]:
                raw[key] = str((base / str(raw[key])).resolve())
        if "images" in raw:
            if not isinstance(raw["images"], list):
                raise ValueError("config images must be a list of paths")
            raw["images"] = [str((base / str(p)).resolve()) for p in raw["images"]]
        raw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(raw)


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def write_run_metadata(cfg: RunConfig, command: str, out_dir: Path, failures=()) -> Path:
    """Record what ran: resolved config, its hash, versions, failures.

    The hash covers only the resolved config, never the timestamp, so
    a replay with the same config reproduces the same hash.
    """
    meta = {
        "command": command,
        "config": cfg.values,
        "config_hash": config_hash(cfg.values),
        "versions": {
            "package": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "pillow": PIL.__version__,
        },
        "timestamp": _utc_now(),
        "failures": list(failures),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "run_metadata.json"
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _config_images(cfg: RunConfig) -> list[Path]:
    if "images" in cfg.values:
        return [Path(p) for p in cfg.values["images"]]
    root = cfg.require_dir("image_root")
    images = sorted(p for p in root.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES)
    if not images:
        raise ValueError(f"no images found under {root}")
    return images


def cmd_landmarks(cfg: RunConfig) -> int:
    """Detect landmarks for every configured image via the adapter."""
    cfg.require("landmark_root", "output_root")
    images = _config_images(cfg)
    out_dir = Path(cfg.landmark_root)
    out_dir.mkdir(parents=True, exist_ok=True)

    failures = []
    written = 0
    with LineJsonAdapter(cfg.adapter_command("landmarks")) as adapter:
        for image in images:
            target = out_dir / (image.stem + ".txt")
            try:
                lm = detect_landmarks_external(image, adapter,
                                               expected_count=int(cfg.landmark_count))
                target.write_text(format_points_text(lm), encoding="utf-8")
                written += 1
            except Exception as exc:  # per-image failures must not kill the run
                failures.append({"path": str(image), "error": str(exc)})

    write_run_metadata(cfg, "landmarks", Path(cfg.output_root), failures)
    print(f"landmarks: {written} written, {len(failures)} failed")
    for failure in failures:
        print(f"failed: {failure['path']}: {failure['error']}", file=sys.stderr)
    return 2 if failures else 0


def _landmark_morphs(cfg: RunConfig, pairs, out_dir: Path) -> list[MorphResult]:
    image_root = cfg.require_dir("image_root")
    landmark_root = cfg.require_dir("landmark_root")

    def image_source(sample_id: str):
        return load_image(image_root / sample_id)

    def landmark_source(sample_id: str):
        return load_points_file(landmark_root / (Path(sample_id).stem + ".txt"))

    mcfg = MorphConfig(
        alpha=float(cfg.alpha),
        border_augmentation=bool(cfg.border_augmentation),
        tool_name="landmark",
        output_dir=out_dir,
    )
    return generate_set(pairs, mcfg, landmark_source, image_source,
                        workers=int(cfg.workers))


def _latent_morphs(cfg: RunConfig, pairs, out_dir: Path) -> list[MorphResult]:
    image_root = cfg.require_dir("image_root")
    out_dir.mkdir(parents=True, exist_ok=True)
    cache_dir = Path(cfg.output_root) / "latent_cache"
    steps = int(cfg.projection_steps)
    alpha = float(cfg.alpha)

    template = None
    if cfg.values.get("alignment_template"):
        template = AlignmentTemplate.from_dict(
            json.loads(Path(cfg.alignment_template).read_text(encoding="utf-8")))
        aligned_dir = Path(cfg.output_root) / "aligned"
        aligned_dir.mkdir(parents=True, exist_ok=True)
        landmark_root = cfg.require_dir("landmark_root")

    def source_image(sample_id: str) -> Path:
        """Path handed to the projector: aligned copy if a template is set."""
        raw = image_root / sample_id
        if template is None:
            return raw
        aligned_path = aligned_dir / (Path(sample_id).stem + ".png")
        if not aligned_path.exists():
            lm = load_points_file(landmark_root / (Path(sample_id).stem + ".txt"))
            aligned, _ = align_to_template(load_image(raw), lm, template)
            save_image(aligned, aligned_path)
        return aligned_path

    results = []
    with LineJsonAdapter(cfg.adapter_command("generator")) as adapter:
        for index, row in enumerate(pairs.rows):
            name = morph_output_name("latent", row.sample_a, row.sample_b)
            target = out_dir / name
            try:
                wa = project(adapter, source_image(row.sample_a), steps, cache_dir)
                wb = project(adapter, source_image(row.sample_b), steps, cache_dir)
                synthesize(adapter, lerp_latent(wa, wb, alpha), target)
            except Exception as exc:  # per-pair failures must not kill the batch
                results.append(MorphResult(index, row.subject_a, row.subject_b,
                                           f"error: {exc}", ""))
                continue
            results.append(MorphResult(index, row.subject_a, row.subject_b,
                                       "ok", str(target)))
    return results


def cmd_morph(cfg: RunConfig) -> int:
    """Morph every protocol pair with the configured tool."""
    cfg.require("output_root")
    protocol = load_pair_protocol(cfg.require_file("protocol"))
    out_root = Path(cfg.output_root)
    morph_dir = out_root / "morphs"

    if cfg.tool == "landmark":
        results = _landmark_morphs(cfg, protocol, morph_dir)
    else:
        results = _latent_morphs(cfg, protocol, morph_dir)

    write_manifest(results, out_root / "morph_manifest.csv")
    failures = [{"index": r.index, "error": r.status} for r in results if r.status != "ok"]
    write_run_metadata(cfg, "morph", out_root, failures)
    print(f"morph: {len(results) - len(failures)} written, {len(failures)} failed")
    for failure in failures:
        print(f"failed: pair {failure['index']}: {failure['error']}", file=sys.stderr)
    return 2 if failures else 0


def cmd_evaluate(cfg: RunConfig) -> int:
    """Score the configured scenarios and write the vulnerability report."""
    cfg.require("output_root")
    embeddings = parse_embeddings(cfg.require_file("embeddings"))
    out_root = Path(cfg.output_root)
    out_root.mkdir(parents=True, exist_ok=True)

    scoresets = {}
    for direction in _DIRECTIONS[cfg.direction]:
        manifest_path = cfg.require_file(_SCENARIO_KEY[direction])
        manifest = load_scenario_manifest(manifest_path, direction)
        trials = enumerate_trials(manifest)
        scores = score_trials(trials, embeddings, aggregation=cfg.aggregation)
        write_score_dump(scores, out_root / _DUMP_NAME[direction])
        scoresets[direction] = scores

    report = evaluate(scoresets, float(cfg.target_fmr),
                      dataset=cfg.dataset, frs=cfg.frs, tool=cfg.tool)
    text = render_report(report)
    (out_root / "report.txt").write_bytes(text.encode("utf-8"))
    (out_root / "report.csv").write_bytes(render_report_csv(report).encode("utf-8"))
    write_run_metadata(cfg, "evaluate", out_root)
    print(text, end="")
    return 0


def cmd_report(paths, target_fmr: float, out) -> int:
    """Merge rendered CSV reports back into one text table."""
    reports = [load_report_csv(path, target_fmr) for path in paths]
    text = render_report(merge_reports(reports))
    if out is None:
        print(text, end="")
    else:
        Path(out).write_bytes(text.encode("utf-8"))
    return 0


class _Parser(argparse.ArgumentParser):
    # Usage problems are validation failures: exit 1, not argparse's 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--tool", choices=["landmark", "latent"])
    parser.add_argument("--alpha", type=float,
                        help="contribution of the pair's first sample, in [0, 1]")
    parser.add_argument("--target-fmr", type=float, dest="target_fmr")
    parser.add_argument("--direction", choices=["references", "probes", "both"])
    parser.add_argument("--workers", type=int)
    parser.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="morphkit",
                     description="Generate face morphs and evaluate recognizer "
                                 "vulnerability against them.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, doc in (
        ("landmarks", "detect landmarks for a directory of images"),
        ("morph", "generate morphs for a pair protocol"),
        ("evaluate", "score scenarios and report MMPMR/FMR/FNMR"),
    ):
        _add_run_flags(sub.add_parser(name, help=doc))

    report = sub.add_parser("report", help="merge CSV reports into one text table")
    report.add_argument("reports", nargs="+", help="rendered report CSV files")
    report.add_argument("--target-fmr", type=float, dest="target_fmr", default=0.001)
    report.add_argument("--out", help="write the table here instead of stdout")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    return {
        "tool": args.tool,
        "alpha": args.alpha,
        "target_fmr": args.target_fmr,
        "direction": args.direction,
        "workers": args.workers,
        "seed": args.seed,
    }


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            return cmd_report(args.reports, args.target_fmr, args.out)
        cfg = RunConfig.from_file(args.config, _overrides(args))
        if args.command == "landmarks":
            return cmd_landmarks(cfg)
        if args.command == "morph":
            return cmd_morph(cfg)
        return cmd_evaluate(cfg)
    except (MorphkitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
