import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from gridadapt.cli import main
from gridadapt.export import read_jsonl


@pytest.fixture
def runner():
    return CliRunner()


def run_ok(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


class TestSynth:
    def test_writes_image_and_manifest(self, runner, tmp_path):
        out = tmp_path / "circle.pgm"
        run_ok(runner, ["synth", "--shape", "circle", "--size", "48", "-o", str(out)])
        assert out.exists()
        manifest = json.loads((tmp_path / "circle.pgm.manifest.json").read_text())
        assert manifest["subcommand"] == "synth"
        assert manifest["config"]["shape"] == "circle"
        assert manifest["outputs"] == [str(out)]

    def test_contour_output(self, runner, tmp_path):
        out = tmp_path / "v.pgm"
        contour = tmp_path / "v_contour.pgm"
        run_ok(
            runner,
            ["synth", "--shape", "vertical", "--size", "48", "-o", str(out),
             "--contour-out", str(contour)],
        )
        from gridadapt.image import load_image

        mask = load_image(contour).data > 0
        assert mask.sum() == 48

    def test_invalid_sigma_fails_cleanly(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["synth", "--shape", "flat", "--sigma", "2.0", "-o", str(tmp_path / "x.pgm")],
        )
        assert result.exit_code == 1
        assert "error:" in result.output

    def test_unknown_shape_is_usage_error(self, runner, tmp_path):
        result = runner.invoke(
            main, ["synth", "--shape", "blob", "-o", str(tmp_path / "x.pgm")]
        )
        assert result.exit_code == 2


class TestPipeline:
    def test_synth_adapt_dual_render_recall_export(self, runner, tmp_path):
        img = tmp_path / "img.pgm"
        contour = tmp_path / "contour.pgm"
        adapted = tmp_path / "adapted.json"
        dual = tmp_path / "dual.json"
        svg = tmp_path / "scene.svg"
        png = tmp_path / "scene.png"
        recall_csv = tmp_path / "recall.csv"
        jsonl = tmp_path / "data.jsonl"

        run_ok(runner, ["synth", "--shape", "circle", "--size", "64", "-o", str(img),
                        "--contour-out", str(contour)])
        result = run_ok(runner, ["adapt", "--input", str(img), "--nodes", "49",
                                 "-o", str(adapted)])
        assert "49 nodes" in result.output and "120 edges" in result.output
        run_ok(runner, ["dual", "--input", str(adapted), "-o", str(dual)])
        doc = json.loads(dual.read_text())
        assert doc["type"] == "dual-graph"
        run_ok(runner, ["render", "--image", str(img), "--graph", str(dual),
                        "-o", str(svg), "--png", str(png)])
        assert svg.read_text().startswith("<svg")
        assert png.exists()
        run_ok(runner, ["eval", "recall", "--dual", str(dual), "--contour", str(contour),
                        "--out", str(recall_csv)])
        rows = recall_csv.read_text().strip().split("\n")
        assert rows[0].startswith("shape,method")
        assert len(rows) == 1 + 32  # header + default threshold grid
        run_ok(runner, ["export-gdl", str(img), "--nodes", "25", "--label", "1",
                        "-o", str(jsonl)])
        records = read_jsonl(jsonl)
        assert len(records) == 1
        assert records[0]["label"] == 1
        assert len(records[0]["nodes"]) == 25

    def test_render_primal_graph(self, runner, tmp_path):
        img = tmp_path / "img.pgm"
        adapted = tmp_path / "adapted.json"
        svg = tmp_path / "primal.svg"
        run_ok(runner, ["synth", "--shape", "diag", "--size", "48", "-o", str(img)])
        run_ok(runner, ["adapt", "--input", str(img), "--nodes", "25", "-o", str(adapted)])
        run_ok(runner, ["render", "--image", str(img), "--graph", str(adapted), "-o", str(svg)])
        assert svg.read_text().count("<line ") == 56  # (5-1)(3*5-1)

    def test_adapt_on_corrupt_input_fails_cleanly(self, runner, tmp_path):
        bad = tmp_path / "bad.pgm"
        bad.write_bytes(b"not a graymap")
        result = runner.invoke(
            main, ["adapt", "--input", str(bad), "-o", str(tmp_path / "out.json")]
        )
        assert result.exit_code == 1
        assert "error:" in result.output

    def test_adapt_missing_input_is_usage_error(self, runner, tmp_path):
        result = runner.invoke(
            main, ["adapt", "--input", str(tmp_path / "absent.pgm"),
                   "-o", str(tmp_path / "out.json")]
        )
        assert result.exit_code == 2


class TestSweep:
    def test_toml_config_produces_csv_and_figures(self, runner, tmp_path):
        cfg = tmp_path / "sweep.toml"
        cfg.write_text(
            "[sweep]\n"
            'shapes = ["vertical"]\n'
            "node_counts = [49]\n"
            "noise_sigmas = [0.0]\n"
            "seeds = [0]\n"
            'methods = ["robust"]\n'
            "size = 64\n"
            "d_min = 2.0\n"
        )
        out = tmp_path / "results.csv"
        run_ok(runner, ["eval", "sweep", "--config", str(cfg), "--out", str(out)])
        assert out.exists()
        assert (tmp_path / "results_kavg.csv").exists()
        assert (tmp_path / "results.png").exists()
        manifest = json.loads((tmp_path / "results.csv.manifest.json").read_text())
        assert manifest["config"]["shapes"] == ["vertical"]
        assert str(tmp_path / "results.png") in manifest["outputs"]

    def test_no_figures_flag(self, runner, tmp_path):
        cfg = tmp_path / "sweep.toml"
        cfg.write_text('[sweep]\nshapes = ["flat"]\nnode_counts = [36]\nsize = 64\n')
        out = tmp_path / "r.csv"
        run_ok(runner, ["eval", "sweep", "--config", str(cfg), "--out", str(out), "--no-figures"])
        assert out.exists()
        assert not (tmp_path / "r.png").exists()


class TestExportGdl:
    def _make_images(self, runner, tmp_path, names):
        paths = []
        for name, shape in names:
            path = tmp_path / name
            run_ok(runner, ["synth", "--shape", shape, "--size", "48", "-o", str(path)])
            paths.append(path)
        return paths

    def test_label_from_name(self, runner, tmp_path):
        paths = self._make_images(
            runner, tmp_path, [("3_first.pgm", "circle"), ("7_second.pgm", "donut")]
        )
        out = tmp_path / "data.jsonl"
        run_ok(runner, ["export-gdl", *map(str, paths), "--nodes", "25",
                        "--label-from-name", "-o", str(out)])
        records = read_jsonl(out)
        assert [r["label"] for r in records] == [3, 7]

    def test_label_from_name_failure(self, runner, tmp_path):
        (paths,) = self._make_images(runner, tmp_path, [("unlabeled.pgm", "flat")])
        result = runner.invoke(
            main, ["export-gdl", str(paths), "--label-from-name", "-o", str(tmp_path / "d.jsonl")]
        )
        assert result.exit_code == 1
        assert "cannot parse label" in result.output

    def test_feature_mode_flag(self, runner, tmp_path):
        (path,) = self._make_images(runner, tmp_path, [("img.pgm", "corner")])
        out = tmp_path / "sal.jsonl"
        run_ok(runner, ["export-gdl", str(path), "--features", "saliency", "-o", str(out)])
        record = read_jsonl(out)[0]
        assert record["feature_names"] == ["saliency"]
        assert len(record["node_features"][0]) == 1
