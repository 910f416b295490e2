import json

import numpy as np
import pytest

from bornsearch.report import (
    svg_grouped_bars,
    svg_line_chart,
    write_histogram_csv,
    write_loss_csv,
    write_table_csv,
)
from bornsearch.runio import (
    RunManifest,
    atomic_write_text,
    sha256_file,
    start_manifest,
    write_json,
)


class TestCsvWriters:
    def test_table_exact_bytes(self, tmp_path):
        path = tmp_path / "t.csv"
        write_table_csv(path, ["a", "b"], [[1, "x"], [2.5, "y"]])
        assert path.read_text() == "a,b\n1,x\n2.5,y\n"

    def test_histogram_columns_and_precision(self, tmp_path):
        path = tmp_path / "h.csv"
        write_histogram_csv(
            path,
            ["00", "01", "10", "11"],
            {"data": np.array([0.25, 0.25, 0.25, 0.25]),
             "model": np.array([0.5, 0.0, 0.0, 0.5])},
        )
        lines = path.read_text().splitlines()
        assert lines[0] == "bitstring,data,model"
        assert lines[1] == "00,0.25,0.5"
        assert len(lines) == 5

    def test_histogram_shape_check(self, tmp_path):
        with pytest.raises(ValueError, match="model"):
            write_histogram_csv(tmp_path / "h.csv", ["0", "1"],
                                {"model": np.array([1.0])})

    def test_loss_rows_start_at_epoch_one(self, tmp_path):
        path = tmp_path / "l.csv"
        write_loss_csv(path, [0.5, 0.25, 0.125])
        assert path.read_text() == "epoch,mmd\n1,0.5\n2,0.25\n3,0.125\n"


class TestSvgWriters:
    def test_grouped_bars_deterministic(self, tmp_path):
        args = (["00", "01"], {"data": [0.5, 0.5], "model": [0.9, 0.1]}, "Title")
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        svg_grouped_bars(a, *args)
        svg_grouped_bars(b, *args)
        assert a.read_bytes() == b.read_bytes()
        text = a.read_text()
        assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
        assert text.count("<rect") >= 4 + 2  # bars plus background and legend swatches
        assert "data" in text and "model" in text and "Title" in text

    def test_grouped_bars_many_categories_thin_ticks(self, tmp_path):
        cats = [format(i, "08b") for i in range(256)]
        series = {"data": [1.0 / 256] * 256}
        path = tmp_path / "wide.svg"
        svg_grouped_bars(path, cats, series, "wide")
        text = path.read_text()
        assert text.count("rotate(-60") < 256
        assert text.count("<rect") >= 256

    def test_grouped_bars_all_zero_series(self, tmp_path):
        svg_grouped_bars(tmp_path / "z.svg", ["0", "1"], {"s": [0.0, 0.0]}, "zeros")
        assert (tmp_path / "z.svg").read_text().startswith("<svg")

    def test_line_chart(self, tmp_path):
        path = tmp_path / "loss.svg"
        svg_line_chart(path, [0.4, 0.3, 0.1], "Training loss", "MMD")
        text = path.read_text()
        assert "<polyline" in text
        assert "MMD" in text and "Training loss" in text

    def test_line_chart_single_point(self, tmp_path):
        svg_line_chart(tmp_path / "one.svg", [0.7], "t", "y")
        assert "<polyline" in (tmp_path / "one.svg").read_text()


class TestRunio:
    def test_atomic_write_creates_parents_and_leaves_no_temps(self, tmp_path):
        target = tmp_path / "deep" / "nested" / "file.txt"
        atomic_write_text(target, "payload")
        assert target.read_text() == "payload"
        leftovers = [p for p in target.parent.iterdir() if p.name != "file.txt"]
        assert leftovers == []

    def test_atomic_write_replaces(self, tmp_path):
        target = tmp_path / "f.txt"
        atomic_write_text(target, "one")
        atomic_write_text(target, "two")
        assert target.read_text() == "two"

    def test_write_json_canonical(self, tmp_path):
        path = tmp_path / "d.json"
        write_json(path, {"b": 1, "a": [1, 2]})
        text = path.read_text()
        assert text == '{\n  "a": [\n    1,\n    2\n  ],\n  "b": 1\n}\n'

    def test_sha256_file(self, tmp_path):
        path = tmp_path / "x.bin"
        path.write_bytes(b"abc")
        assert sha256_file(path) == (
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        )

    def test_manifest_round(self, tmp_path):
        src = tmp_path / "in.txt"
        src.write_text("hello")
        manifest = start_manifest("train", "0.1.0", 7, {"epochs": 3})
        manifest.add_input(src)
        manifest.outputs += ["b.txt", "a.txt"]
        out = tmp_path / "manifest.json"
        manifest.write(out)
        doc = json.loads(out.read_text())
        assert doc["command"] == "train"
        assert doc["seed"] == 7
        assert doc["config"] == {"epochs": 3}
        assert doc["inputs"][str(src)] == sha256_file(src)
        assert doc["outputs"] == ["a.txt", "b.txt"]
        assert doc["started_at"].endswith("+00:00")
        assert doc["finished_at"] >= doc["started_at"]

    def test_manifest_without_seed(self, tmp_path):
        manifest = RunManifest(command="encode", version="0.1.0", seed=None, config={})
        out = tmp_path / "m.json"
        manifest.write(out)
        assert json.loads(out.read_text())["seed"] is None
