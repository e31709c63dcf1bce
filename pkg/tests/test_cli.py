import json
import shutil
import subprocess
import sys

import numpy as np
import pytest
from PIL import Image

from spikesal.cli import main
from spikesal.datasets import synth_colormix, synth_popout, write_surrogate_dataset
from spikesal.metrics import chance_baseline
from spikesal.stimulus import load_gray


def _save_rgb(path, img):
    Image.fromarray(np.round(img.stack() * 255).astype(np.uint8), "RGB").save(path)
    return path


def _save_gray(path, values):
    Image.fromarray(np.round(np.clip(values, 0, 1) * 255).astype(np.uint8), "L").save(path)
    return path


def _report(capsys, argv):
    capsys.readouterr()
    assert main(argv) == 0
    data = json.loads(capsys.readouterr().out)
    data.pop("wall_time_ms")
    return data


@pytest.fixture
def colormix_png(tmp_path):
    return _save_rgb(tmp_path / "colormix.png", synth_colormix((64, 64)))


@pytest.fixture
def density_dataset(tmp_path, rng):
    root = tmp_path / "ds"
    for sub in ("stimuli", "fixations", "density"):
        (root / sub).mkdir(parents=True)
    for k in range(2):
        _save_rgb(root / "stimuli" / f"img{k}.png", synth_colormix((16, 16)))
        pts = rng.random((16, 16)) < 0.1
        pts[3 + k, 4] = True
        _save_gray(root / "fixations" / f"img{k}.png", pts.astype(float))
        dens = np.exp(-((np.mgrid[0:16, 0:16] - np.array([5 + 4 * k, 8])[:, None, None]) ** 2).sum(0) / 18.0)
        _save_gray(root / "density" / f"img{k}.png", dens)
    return root


class TestCompute:
    def test_outputs(self, colormix_png, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["compute", str(colormix_png), "-o", str(out), "--raw"]) == 0
        names = sorted(p.name for p in out.iterdir())
        assert names == ["colormix_color.png", "colormix_final.png", "colormix_final.txt", "colormix_orient.png"]
        final = np.asarray(Image.open(out / "colormix_final.png"))
        assert final.shape == (64, 64) and final.dtype == np.uint8 and final.max() == 255
        raw = np.loadtxt(out / "colormix_final.txt")
        np.testing.assert_array_equal(np.round(255 * raw).astype(np.uint8), final)

    def test_seed_determinism(self, colormix_png, tmp_path):
        for d in ("a", "b"):
            assert main(["compute", str(colormix_png), "-o", str(tmp_path / d), "--seed", "7"]) == 0
        for name in ("colormix_color.png", "colormix_orient.png", "colormix_final.png"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_upscale_and_raster(self, tmp_path):
        img = tmp_path / "small.png"
        _save_rgb(img, synth_colormix((32, 48)))
        raster = tmp_path / "spikes.txt"
        assert main(["compute", str(img), "-o", str(tmp_path), "--upscale", "--resolution", "16x24",
                     "--pathway", "color", "--raster", str(raster)]) == 0
        assert np.asarray(Image.open(tmp_path / "small_final.png")).shape == (32, 48)
        assert not (tmp_path / "small_orient.png").exists()
        first = raster.read_text().splitlines()[0].split()
        assert first[0].startswith("v4_") and len(first) == 3

    def test_color_pathway_flat_on_orientation_popout(self, tmp_path):
        img, mask = synth_popout("orientation", (64, 64), seed=0)
        path = _save_rgb(tmp_path / "pop.png", img)
        assert main(["compute", str(path), "-o", str(tmp_path), "--pathway", "color"]) == 0
        color = load_gray(tmp_path / "pop_color.png")
        bars = img.red > 0
        assert not mask[np.unravel_index(np.argmax(color), color.shape)]
        assert color[mask].mean() <= 2 * color[bars & ~mask].mean()

    def test_unreadable_image_exits_2(self, tmp_path):
        bad = tmp_path / "x.png"
        bad.write_bytes(b"garbage")
        assert main(["compute", str(bad), "-o", str(tmp_path)]) == 2

    def test_unsupported_format_exits_2(self, tmp_path):
        bmp = tmp_path / "x.bmp"
        Image.new("RGB", (8, 8)).save(bmp)
        assert main(["compute", str(bmp)]) == 2


class TestUsage:
    @pytest.mark.parametrize("argv", [
        [], ["frobnicate"], ["compute"], ["bench", "--pathway", "color"],
        ["bench", "--set", "nonsense"], ["bench", "--set", "no_such_field=1"],
        ["bench", "--resolution", "axb"], ["bench", "--seed", "x"],
    ])
    def test_exit_1(self, argv, capsys):
        with pytest.raises(SystemExit) as exc:
            code = main(argv)
            raise SystemExit(code)
        assert exc.value.code == 1

    def test_bad_config_value(self, tmp_path):
        cfg = tmp_path / "c.txt"
        cfg.write_text("sigma_cen = 2.0\n")
        assert main(["bench", "--config", str(cfg)]) == 1

    def test_missing_config_file(self, tmp_path):
        assert main(["bench", "--config", str(tmp_path / "none.txt")]) == 1


class TestBench:
    def test_default_passes(self, capsys):
        assert main(["bench"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert sum(line.startswith("PASS") for line in out) == 14
        assert out[-1] == "14/14 assertions passed"

    def test_zero_weights_fail(self, capsys):
        assert main(["bench", "--zero-weights"]) == 3
        assert "0/14" in capsys.readouterr().out

    def test_json(self, capsys):
        assert main(["bench", "--json"]) == 0
        verdicts = json.loads(capsys.readouterr().out)
        assert len(verdicts) == 14
        assert {"name", "passed", "expected", "winner", "totals"} <= set(verdicts[0])
        assert sum(v["name"].startswith("colormix/") for v in verdicts) == 6


class TestEval:
    def test_prediction_equals_density(self, density_dataset, capsys):
        rep = _report(capsys, ["eval", str(density_dataset), "--predictions-dir", str(density_dataset / "density"),
                               "--resolution", "16", "--json"])
        for img in rep["images"]:
            s = img["scores"]
            assert s["sim"] == pytest.approx(1.0, abs=1e-12)
            assert s["cc"] == pytest.approx(1.0, abs=1e-12)
            assert abs(s["kl"]) < 1e-9

    def test_aggregate_is_row_mean(self, density_dataset, capsys):
        rep = _report(capsys, ["eval", str(density_dataset), "--resolution", "16", "--json"])
        assert rep["aggregate"]["n_scored"] == 2 and rep["aggregate"]["n_failed"] == 0
        for m in ("sim", "nss", "cc", "kl", "ig_center", "ig_chance"):
            rows = [img["scores"][m] for img in rep["images"]]
            assert rep["aggregate"][m] == pytest.approx(np.mean(rows), rel=1e-12)

    def test_text_report(self, density_dataset, tmp_path, capsys):
        out = tmp_path / "report.txt"
        assert main(["eval", str(density_dataset), "--resolution", "16", "-o", str(out)]) == 0
        text = out.read_text(encoding="utf-8")
        lines = text.splitlines()
        assert any(line.startswith("MEAN") for line in lines)
        assert sum(line.startswith("img") for line in lines) == 2
        assert "# config.seed = 0" in text and "# ground_truth:" in text

    def test_chance_predictions_have_zero_information_gain(self, tmp_path, capsys, rng):
        root = tmp_path / "ds"
        preds = tmp_path / "preds"
        for sub in (root / "stimuli", root / "fixations", preds):
            sub.mkdir(parents=True)
        for k in range(4):
            _save_rgb(root / "stimuli" / f"s{k}.png", synth_colormix((32, 32)))
            _save_gray(root / "fixations" / f"s{k}.png", (rng.random((32, 32)) < 0.1).astype(float))
            _save_gray(preds / f"s{k}.png", chance_baseline((32, 32), 1000 + k))
        rep = _report(capsys, ["eval", str(root), "--predictions-dir", str(preds), "--resolution", "32", "--json"])
        # log2 ratio of two independent uniforms has sd ~2 bits; ~400 fixations gives sd ~0.1
        assert abs(rep["aggregate"]["ig_chance"]) < 0.4

    def test_config_precedence(self, density_dataset, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# overrides\nseed = 3\nresolution = 16x16\nalpha_red = 0.7\n")
        rep = _report(capsys, ["eval", str(density_dataset), "--config", str(cfg), "--seed", "5", "--json",
                               "--predictions-dir", str(density_dataset / "density")])
        assert rep["seed"] == 5
        assert rep["config"]["seed"] == 5
        assert rep["config"]["resolution"] == "16x16"
        assert rep["config"]["alpha_red"] == 0.7
        assert rep["config"]["alpha_yellow"] == 0.9

    def test_report_determinism_and_jobs(self, tmp_path, capsys):
        root = tmp_path / "pop"
        write_surrogate_dataset(root, n_images=2, dims=(32, 32), seed=4)
        argv = ["eval", str(root), "--resolution", "32", "--json"]
        a = _report(capsys, argv)
        b = _report(capsys, argv)
        c = _report(capsys, argv + ["--jobs", "2"])
        assert a == b == c

    def test_failed_image_excluded(self, density_dataset, capsys):
        (density_dataset / "stimuli" / "img1.png").write_bytes(b"broken")
        rep = _report(capsys, ["eval", str(density_dataset), "--resolution", "16", "--json"])
        assert rep["aggregate"]["n_failed"] == 1 and rep["aggregate"]["n_scored"] == 1
        assert "error" in rep["images"][1]
        assert rep["aggregate"]["sim"] == rep["images"][0]["scores"]["sim"]

    def test_empty_dataset_exits_2(self, tmp_path):
        (tmp_path / "stimuli").mkdir()
        (tmp_path / "fixations").mkdir()
        assert main(["eval", str(tmp_path)]) == 2

    def test_all_failed_exits_3(self, density_dataset):
        for p in (density_dataset / "stimuli").iterdir():
            p.write_bytes(b"broken")
        assert main(["eval", str(density_dataset), "--resolution", "16"]) == 3


@pytest.mark.skipif(shutil.which("spikesal") is None, reason="console script not installed")
def test_console_script(tmp_path):
    res = subprocess.run(["spikesal", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "spikesal" in res.stdout
    res = subprocess.run([sys.executable, "-m", "spikesal", "bench", "--bogus"], capture_output=True, text=True)
    assert res.returncode == 1
