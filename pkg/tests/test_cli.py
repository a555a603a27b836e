import json
import os

import numpy as np
import pytest

from deepgi.cli import main
from deepgi.render import read_dib, read_manifest


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def resolved_config(err: str) -> dict:
    for line in err.splitlines():
        if line.startswith("resolved config: "):
            return json.loads(line[len("resolved config: "):])
    raise AssertionError(f"no resolved config echoed in {err!r}")


@pytest.fixture(scope="session")
def trained_run(tiny_dataset, tmp_path_factory):
    """A two-epoch CLI training run over the shared dataset."""
    root, _ = tiny_dataset
    out = tmp_path_factory.mktemp("cli") / "run"
    code = main(["train", "--data", root, "--out", str(out), "--epochs", "2",
                 "--batch", "2", "--k", "2", "--depth", "5", "--seed", "1", "--quiet"])
    assert code == 0
    return str(out)


class TestExitCodes:
    def test_missing_subcommand_is_usage_error(self, capsys):
        code, _, err = run(capsys)
        assert code == 1
        assert "usage" in err

    def test_unknown_flag_is_usage_error(self, capsys):
        code, _, err = run(capsys, "selftest", "--bogus")
        assert code == 1
        assert "--bogus" in err and "usage" in err

    def test_bad_flag_value_is_usage_error(self, capsys):
        code, _, err = run(capsys, "train", "--data", "d", "--out", "o", "--epochs", "soon")
        assert code == 1
        assert "--epochs" in err

    def test_help_exits_clean(self, capsys):
        code, out, _ = run(capsys, "--help")
        assert code == 0
        assert "gen-data" in out and "selftest" in out

    def test_runtime_failure_exits_two(self, capsys, tmp_path):
        code, _, err = run(capsys, "train", "--data", str(tmp_path / "nope"),
                           "--out", str(tmp_path / "run"))
        assert code == 2
        assert "error:" in err


class TestConfigFile:
    def test_flags_override_file_over_defaults(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"epochs": 7, "k": 3, "batch": "2"}))
        # data dir is missing, but the config is resolved and echoed first
        code, _, err = run(capsys, "train", "--config", str(cfg),
                           "--data", str(tmp_path / "nope"), "--out", str(tmp_path / "o"),
                           "--epochs", "1")
        assert code == 2
        resolved = resolved_config(err)
        assert resolved["epochs"] == 1  # explicit flag wins
        assert resolved["k"] == 3  # file beats built-in default
        assert resolved["batch"] == 2  # string values run through the flag parser

    def test_unknown_config_key_rejected(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"epoch": 7}))
        code, _, err = run(capsys, "selftest", "--config", str(cfg))
        assert code == 1
        assert "epoch" in err

    def test_non_object_config_rejected(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("[1, 2]")
        code, _, err = run(capsys, "selftest", "--config", str(cfg))
        assert code == 1

    def test_every_run_echoes_seed_and_defaults(self, capsys, tmp_path):
        code, _, err = run(capsys, "gen-data", "--out", str(tmp_path / "d"),
                           "--light-steps", "1", "--object-steps", "1",
                           "--objects", "none", "--spp", "1", "--resolution", "8")
        assert code == 0
        resolved = resolved_config(err)
        assert resolved["seed"] == 0  # defaulted values are echoed too
        assert resolved["val_fraction"] == 0.1


class TestGenData:
    def test_generates_split_dataset(self, capsys, tmp_path):
        out = tmp_path / "d"
        code, _, err = run(capsys, "gen-data", "--out", str(out),
                           "--light-steps", "3", "--object-steps", "2",
                           "--objects", "sphere", "--spp", "2", "--resolution", "8",
                           "--seed", "5", "--val-fraction", "0.2")
        assert code == 0
        manifest = read_manifest(out / "manifest.txt")
        assert len(manifest.frames) == 6
        assert len(manifest.by_split("val")) == 1
        assert "train 5, val 1" in err

    def test_holdout_flag_labels_test_frames(self, capsys, tmp_path):
        out = tmp_path / "d"
        code, _, _ = run(capsys, "gen-data", "--out", str(out),
                         "--light-steps", "5", "--object-steps", "1",
                         "--objects", "none", "--spp", "1", "--resolution", "8",
                         "--holdout", "80", "100", "--val-fraction", "0")
        assert code == 0
        manifest = read_manifest(out / "manifest.txt")
        test_angles = [f.light_angle for f in manifest.by_split("test")]
        assert test_angles == [90.0]


class TestTrainInferEval:
    def test_training_writes_stats_checkpoint_and_curves(self, trained_run):
        assert os.path.exists(os.path.join(trained_run, "stats.csv"))
        assert os.path.exists(os.path.join(trained_run, "checkpoint_latest.ckpt"))
        assert os.path.getsize(os.path.join(trained_run, "curves.png")) > 0

    def test_infer_writes_raster_and_preview(self, capsys, tiny_dataset, trained_run, tmp_path):
        root, manifest = tiny_dataset
        ckpt = os.path.join(trained_run, "checkpoint_latest.ckpt")
        out = tmp_path / "preds"
        code, _, err = run(capsys, "infer", "--ckpt", ckpt, "--data", root,
                           "--frame", "0", "--out", str(out))
        assert code == 0
        pred = read_dib(out / "pred_0000.dib")
        assert pred.shape == (32, 32, 3)
        assert np.isfinite(pred).all()
        assert (out / "preview_0000.png").stat().st_size > 0
        assert "mse=" in err

    def test_infer_rejects_unknown_frame(self, capsys, tiny_dataset, trained_run, tmp_path):
        root, _ = tiny_dataset
        ckpt = os.path.join(trained_run, "checkpoint_latest.ckpt")
        code, _, err = run(capsys, "infer", "--ckpt", ckpt, "--data", root,
                           "--frame", "99", "--out", str(tmp_path / "p"))
        assert code == 2
        assert "frame 99" in err

    def test_eval_prints_per_frame_and_mean_reports(self, capsys, tiny_dataset, trained_run):
        root, _ = tiny_dataset
        ckpt = os.path.join(trained_run, "checkpoint_latest.ckpt")
        code, out, _ = run(capsys, "eval", "--ckpt", ckpt, "--data", root, "--split", "val")
        assert code == 0
        lines = [ln for ln in out.splitlines() if ln]
        assert len(lines) == 2  # one val frame plus the mean row
        assert lines[0].startswith("frame ") and "ssim=" in lines[0]
        assert lines[1].startswith("mean over 1 val frames")

    def test_eval_empty_split_fails(self, capsys, tiny_dataset, trained_run):
        root, _ = tiny_dataset
        ckpt = os.path.join(trained_run, "checkpoint_latest.ckpt")
        code, _, err = run(capsys, "eval", "--ckpt", ckpt, "--data", root, "--split", "test")
        assert code == 2
        assert "no frames labeled test" in err


class TestSweep:
    def test_base_layer_sweep_writes_csv_and_figure(self, capsys, tiny_dataset, tmp_path):
        root, _ = tiny_dataset
        out = tmp_path / "bl"
        code, _, _ = run(capsys, "sweep", "--kind", "base-layer", "--data", root,
                         "--out", str(out), "--ks", "2,4", "--depth", "5",
                         "--repeats", "1", "--trace-spp", "2")
        assert code == 0
        header = (out / "base_layer.csv").read_text().splitlines()[0]
        assert header == "base_layer_k,parameters,infer_seconds,trace_seconds,speedup_vs_trace"
        assert (out / "base_layer.png").stat().st_size > 0

    def test_dataset_size_sweep(self, capsys, tiny_dataset, tmp_path):
        root, _ = tiny_dataset
        out = tmp_path / "ds"
        code, _, _ = run(capsys, "sweep", "--kind", "dataset-size", "--data", root,
                         "--out", str(out), "--sizes", "2,4", "--epochs", "1",
                         "--k", "2", "--depth", "5", "--batch", "2", "--quiet")
        assert code == 0
        rows = (out / "dataset_size.csv").read_text().splitlines()
        assert rows[0] == "size,val_mse,val_ssim,seconds"
        assert len(rows) == 3

    def test_epochs_sweep(self, capsys, tiny_dataset, tmp_path):
        root, _ = tiny_dataset
        out = tmp_path / "ep"
        code, _, _ = run(capsys, "sweep", "--kind", "epochs", "--data", root,
                         "--out", str(out), "--epochs", "1", "--k", "2",
                         "--depth", "5", "--batch", "2", "--quiet")
        assert code == 0
        assert (out / "stats.csv").exists()
        assert (out / "epochs_curve.png").stat().st_size > 0


class TestSelftest:
    def test_selftest_passes(self, capsys):
        code, _, err = run(capsys, "selftest")
        assert code == 0
        assert "selftest passed" in err
        assert "FAIL" not in err
