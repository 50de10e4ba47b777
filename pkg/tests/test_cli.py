"""Command-line behavior: configs, exit codes, outputs, determinism."""

import csv
import json
import sys
from pathlib import Path

import pytest

from conftest import face_landmarks, gradient_face
from morphkit.cli import RunConfig, main
from morphkit.landmarks import format_points_text, load_points_file
from morphkit.metrics import DirectionMetrics, ReportCell, VulnerabilityReport, render_report_csv
from morphkit.raster import load_image, save_image

FIXTURES = Path(__file__).resolve().parent / "fixtures"
E2E = FIXTURES / "e2e"
STUB = [sys.executable, str(FIXTURES / "adapters" / "stub_adapter.py")]


def write_config(tmp_path, name="config.json", **values):
    path = tmp_path / name
    path.write_text(json.dumps(values, indent=2))
    return path


def e2e_config(tmp_path, **overrides):
    values = {
        "dataset": "synthetic",
        "frs": "dyadic-cosine",
        "tool": "landmark",
        "target_fmr": 0.001,
        "direction": "both",
        "aggregation": "max",
        "embeddings": str(E2E / "embeddings.csv"),
        "scenario_references": str(E2E / "scenario_references.csv"),
        "scenario_probes": str(E2E / "scenario_probes.csv"),
        "output_root": str(tmp_path / "out"),
    }
    values.update(overrides)
    return write_config(tmp_path, **values)


def make_morph_tree(tmp_path):
    """Images, landmark files, and a 2-pair protocol under tmp_path."""
    image_root = tmp_path / "images"
    landmark_root = tmp_path / "landmarks"
    image_root.mkdir()
    landmark_root.mkdir()
    for i, sample in enumerate(("a.png", "b.png", "c.png")):
        save_image(gradient_face(100 + i), image_root / sample)
        lm = face_landmarks(100 + i)
        (landmark_root / (Path(sample).stem + ".txt")).write_text(format_points_text(lm))
    protocol = tmp_path / "protocol.csv"
    protocol.write_text(
        "subject_a,sample_a,subject_b,sample_b\n"
        "s1,a.png,s2,b.png\n"
        "s1,a.png,s3,c.png\n"
    )
    return image_root, landmark_root, protocol


def morph_config(tmp_path, **overrides):
    image_root, landmark_root, protocol = make_morph_tree(tmp_path)
    values = {
        "tool": "landmark",
        "alpha": 0.5,
        "protocol": str(protocol),
        "image_root": str(image_root),
        "landmark_root": str(landmark_root),
        "output_root": str(tmp_path / "out"),
    }
    values.update(overrides)
    return write_config(tmp_path, **values)


class TestEvaluate:
    def test_reproduces_oracle_bytes(self, tmp_path):
        assert main(["evaluate", "--config", str(e2e_config(tmp_path))]) == 0
        out = tmp_path / "out"
        for name in ("report.txt", "report.csv",
                     "scores_references.csv", "scores_probes.csv"):
            assert (out / name).read_bytes() == (E2E / "expected" / name).read_bytes()

    def test_both_directions_have_two_thresholds(self, tmp_path):
        main(["evaluate", "--config", str(e2e_config(tmp_path))])
        row = (tmp_path / "out" / "report.csv").read_text().splitlines()[1].split(",")
        t_ref, t_probe = row[5], row[6]
        assert t_ref and t_probe and t_ref != t_probe

    def test_single_direction(self, tmp_path):
        code = main(["evaluate", "--config", str(e2e_config(tmp_path)),
                     "--direction", "references"])
        assert code == 0
        out = tmp_path / "out"
        assert "25.0 | N/A" in (out / "report.txt").read_text()
        assert (out / "scores_references.csv").exists()
        assert not (out / "scores_probes.csv").exists()

    def test_target_fmr_zero_is_validation_error(self, tmp_path, capsys):
        code = main(["evaluate", "--config", str(e2e_config(tmp_path)),
                     "--target-fmr", "0"])
        assert code == 1
        assert "target_fmr" in capsys.readouterr().err

    def test_dangling_sample_exits_1(self, tmp_path, capsys):
        rows = (E2E / "embeddings.csv").read_text().splitlines()
        kept = [r for r in rows if not r.startswith("probe_s1_a.png")]
        broken = tmp_path / "embeddings.csv"
        broken.write_text("\n".join(kept) + "\n")
        config = e2e_config(tmp_path, embeddings=str(broken))
        assert main(["evaluate", "--config", str(config)]) == 1
        assert "probe_s1_a.png" in capsys.readouterr().err

    def test_missing_manifest_key_exits_1(self, tmp_path, capsys):
        config = e2e_config(tmp_path)
        values = json.loads(config.read_text())
        del values["scenario_probes"]
        config.write_text(json.dumps(values))
        assert main(["evaluate", "--config", str(config)]) == 1
        assert "scenario_probes" in capsys.readouterr().err

    def test_prints_table_to_stdout(self, tmp_path, capsys):
        main(["evaluate", "--config", str(e2e_config(tmp_path))])
        assert "25.0 | 50.0" in capsys.readouterr().out

    def test_metadata_written(self, tmp_path):
        main(["evaluate", "--config", str(e2e_config(tmp_path))])
        meta = json.loads((tmp_path / "out" / "run_metadata.json").read_text())
        assert meta["command"] == "evaluate"
        assert len(meta["config_hash"]) == 64
        assert meta["config"]["target_fmr"] == 0.001
        assert meta["failures"] == []


class TestMorph:
    def test_two_pairs_two_pngs(self, tmp_path):
        assert main(["morph", "--config", str(morph_config(tmp_path))]) == 0
        out = tmp_path / "out"
        pngs = sorted(p.name for p in (out / "morphs").glob("*.png"))
        assert pngs == ["landmark_a_b.png", "landmark_a_c.png"]
        rows = list(csv.reader((out / "morph_manifest.csv").open()))
        assert rows[0] == ["index", "subject_a", "subject_b", "status", "output_path"]
        assert [r[3] for r in rows[1:]] == ["ok", "ok"]
        # outputs decode as valid images of the input frame size
        assert load_image(out / "morphs" / "landmark_a_b.png").data.shape == (64, 64, 3)

    def test_replay_is_byte_identical(self, tmp_path):
        config = morph_config(tmp_path)
        main(["morph", "--config", str(config)])
        out = tmp_path / "out"
        first = {p.name: p.read_bytes() for p in (out / "morphs").glob("*.png")}
        first_meta = json.loads((out / "run_metadata.json").read_text())
        main(["morph", "--config", str(config)])
        second = {p.name: p.read_bytes() for p in (out / "morphs").glob("*.png")}
        second_meta = json.loads((out / "run_metadata.json").read_text())
        assert first == second
        assert first_meta["config_hash"] == second_meta["config_hash"]

    def test_missing_protocol_names_path(self, tmp_path, capsys):
        config = morph_config(tmp_path, protocol=str(tmp_path / "nope.csv"))
        assert main(["morph", "--config", str(config)]) == 1
        assert "nope.csv" in capsys.readouterr().err

    def test_partial_failure_exits_2(self, tmp_path, capsys):
        config = morph_config(tmp_path)
        (tmp_path / "landmarks" / "c.txt").unlink()
        assert main(["morph", "--config", str(config)]) == 2
        rows = list(csv.reader((tmp_path / "out" / "morph_manifest.csv").open()))
        statuses = [r[3] for r in rows[1:]]
        assert statuses[0] == "ok"
        assert statuses[1].startswith("error:")
        assert (tmp_path / "out" / "morphs" / "landmark_a_b.png").exists()
        assert "pair 1" in capsys.readouterr().err

    def test_flag_overrides_recorded(self, tmp_path):
        config = morph_config(tmp_path)
        assert main(["morph", "--config", str(config), "--alpha", "0.25",
                     "--workers", "2"]) == 0
        meta = json.loads((tmp_path / "out" / "run_metadata.json").read_text())
        assert meta["config"]["alpha"] == 0.25
        assert meta["config"]["workers"] == 2

    def test_latent_tool_with_stub(self, tmp_path):
        config = morph_config(
            tmp_path, tool="latent",
            adapters={"generator": STUB + ["--size", "24"]},
            projection_steps=50,
        )
        assert main(["morph", "--config", str(config)]) == 0
        out = tmp_path / "out"
        morphs = sorted((out / "morphs").glob("*.png"))
        assert [p.name for p in morphs] == ["latent_a_b.png", "latent_a_c.png"]
        assert load_image(morphs[0]).data.shape == (24, 24, 3)
        # projection cache holds one latent per distinct input image
        assert len(list((out / "latent_cache").glob("*.latent.json"))) == 3

    def test_bad_alpha_exits_1(self, tmp_path, capsys):
        config = morph_config(tmp_path)
        assert main(["morph", "--config", str(config), "--alpha", "1.5"]) == 1
        assert "alpha" in capsys.readouterr().err


class TestLandmarks:
    def landmarks_config(self, tmp_path, names=("a.png", "b.png")):
        image_root = tmp_path / "imgs"
        image_root.mkdir()
        for i, name in enumerate(names):
            save_image(gradient_face(i), image_root / name)
        return write_config(
            tmp_path,
            image_root=str(image_root),
            landmark_root=str(tmp_path / "lms"),
            output_root=str(tmp_path / "out"),
            adapters={"landmarks": STUB},
        )

    def test_writes_canonical_files(self, tmp_path):
        assert main(["landmarks", "--config", str(self.landmarks_config(tmp_path))]) == 0
        files = sorted((tmp_path / "lms").glob("*.txt"))
        assert [f.name for f in files] == ["a.txt", "b.txt"]
        lm = load_points_file(files[0])
        assert lm.count == 68
        assert files[0].read_text().splitlines()[0] == "68"

    def test_rerun_is_byte_identical(self, tmp_path):
        config = self.landmarks_config(tmp_path)
        main(["landmarks", "--config", str(config)])
        before = {f.name: f.read_bytes() for f in (tmp_path / "lms").glob("*.txt")}
        main(["landmarks", "--config", str(config)])
        after = {f.name: f.read_bytes() for f in (tmp_path / "lms").glob("*.txt")}
        assert before == after

    def test_failed_image_recorded_others_proceed(self, tmp_path, capsys):
        config = self.landmarks_config(tmp_path, names=("a.png", "fail_me.png", "z.png"))
        assert main(["landmarks", "--config", str(config)]) == 2
        written = sorted(f.name for f in (tmp_path / "lms").glob("*.txt"))
        assert written == ["a.txt", "z.txt"]
        assert "fail_me.png" in capsys.readouterr().err
        meta = json.loads((tmp_path / "out" / "run_metadata.json").read_text())
        assert len(meta["failures"]) == 1
        assert "fail_me.png" in meta["failures"][0]["path"]


class TestReport:
    def direction(self, rate):
        return DirectionMetrics(threshold=0.4, fmr=0.0, fnmr=0.0, mmpmr=rate,
                                n_genuine=5, n_zero_effort=50, n_morphs=4)

    def test_rerender_matches_evaluate_text(self, tmp_path):
        out = tmp_path / "merged.txt"
        code = main(["report", str(E2E / "expected" / "report.csv"),
                     "--out", str(out)])
        assert code == 0
        assert out.read_bytes() == (E2E / "expected" / "report.txt").read_bytes()

    def test_merge_fills_missing_cells_with_na(self, tmp_path, capsys):
        a = VulnerabilityReport(0.001, (ReportCell(
            "frll", "frs", "landmark",
            references=self.direction(0.8), probes=self.direction(0.7)),))
        b = VulnerabilityReport(0.001, (ReportCell(
            "feret", "frs", "latent",
            references=self.direction(0.5), probes=self.direction(0.4)),))
        pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
        pa.write_bytes(render_report_csv(a).encode())
        pb.write_bytes(render_report_csv(b).encode())
        assert main(["report", str(pa), str(pb)]) == 0
        text = capsys.readouterr().out
        frll = [ln for ln in text.splitlines() if ln.startswith("frll")][0]
        assert "80.0 | 70.0" in frll and frll.rstrip().endswith("N/A")

    def test_missing_file_exits_1(self, tmp_path, capsys):
        assert main(["report", str(tmp_path / "absent.csv")]) == 1
        assert "absent.csv" in capsys.readouterr().err


class TestParserAndConfig:
    def test_missing_config_flag_exits_1(self):
        with pytest.raises(SystemExit) as exc:
            main(["evaluate"])
        assert exc.value.code == 1

    def test_bad_direction_choice_exits_1(self, tmp_path):
        config = e2e_config(tmp_path)
        with pytest.raises(SystemExit) as exc:
            main(["evaluate", "--config", str(config), "--direction", "sideways"])
        assert exc.value.code == 1

    def test_unknown_subcommand_exits_1(self):
        with pytest.raises(SystemExit) as exc:
            main(["calibrate"])
        assert exc.value.code == 1

    def test_invalid_json_config_exits_1(self, tmp_path, capsys):
        bad = tmp_path / "c.json"
        bad.write_text("{")
        assert main(["evaluate", "--config", str(bad)]) == 1
        assert "not valid JSON" in capsys.readouterr().err

    def test_non_object_config_exits_1(self, tmp_path, capsys):
        bad = tmp_path / "c.json"
        bad.write_text("[1, 2]")
        assert main(["evaluate", "--config", str(bad)]) == 1
        assert "JSON object" in capsys.readouterr().err

    def test_relative_paths_resolve_against_config_dir(self, tmp_path):
        sub = tmp_path / "nested"
        sub.mkdir()
        (tmp_path / "emb.csv").write_text("sample_id,owner_id,v0\nx,s,1\n")
        config = write_config(sub, embeddings="../emb.csv")
        cfg = RunConfig.from_file(config, {})
        assert cfg.values["embeddings"] == str((tmp_path / "emb.csv").resolve())

    def test_seed_placeholder_substitution(self):
        cfg = RunConfig({"adapters": {"landmarks": ["stub", "--seed", "{seed}"]},
                         "seed": 7})
        assert cfg.adapter_command("landmarks") == ["stub", "--seed", "7"]

    def test_defaults_applied(self):
        cfg = RunConfig({})
        assert cfg.tool == "landmark"
        assert cfg.target_fmr == 0.001
        assert cfg.direction == "both"

    def test_validation_errors(self):
        with pytest.raises(ValueError, match="tool"):
            RunConfig({"tool": "diffusion"})
        with pytest.raises(ValueError, match="workers"):
            RunConfig({"workers": 0})
        with pytest.raises(ValueError, match="aggregation"):
            RunConfig({"aggregation": "median"})
