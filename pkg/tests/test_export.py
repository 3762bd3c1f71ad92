import csv
import math

import numpy as np
import pytest

from spiralspec.export import (
    Layer,
    contour_polylines,
    export_svg,
    format_number,
    log_color,
    sha256_file,
    write_csv,
    write_json,
)


def test_single_point_single_marker():
    svg = export_svg([Layer("scatter", "eigs", np.array([0.1 + 0.2j]))], window=(-1, 1, -1, 1))
    assert svg.count('class="marker"') == 1
    assert "warning" not in svg


def test_two_layers_rendered():
    layers = [
        Layer("scatter", "eigs", np.array([0.1 + 0.2j, -0.3j]), color="#ff0000"),
        Layer("curve", "sigma", np.array([0, 1 + 1j, np.nan, 2, 3j])),
    ]
    svg = export_svg(layers)
    assert svg.count('class="marker"') == 2
    assert svg.count('class="curve"') == 2
    assert svg.count('class="legend"') == 2
    assert export_svg(layers) == svg


def test_empty_dataset_warns():
    svg = export_svg([Layer("scatter", "none", np.zeros(0, complex))])
    assert 'class="warning"' in svg
    assert 'class="marker"' not in svg


def test_field_cells():
    z = np.arange(1, 7, dtype=float).reshape(2, 3)
    svg = export_svg([Layer("field", "sigma", grid=([0, 1, 2], [0, 1], z))])
    assert svg.count('class="cell"') == 6


def test_log_color_monotone():
    vals = np.logspace(-8, 0, 30)
    reds = [int(log_color(v, 1e-8, 1.0)[1:3], 16) for v in vals]
    assert all(a <= b for a, b in zip(reds, reds[1:]))
    assert reds[0] < reds[-1]
    assert log_color(0.0, 1e-8, 1.0) == "#ffffff"


def test_format_number_roundtrip():
    for v in (0.1, -1.0 / 3.0, 1e-300, 12345.678):
        assert float(format_number(v)) == v
    assert format_number(float("nan")) == "nan"
    assert format_number(-math.inf) == "-inf"
    assert format_number(0.0) == "0" and format_number(-0.0) == "0"
    assert format_number(7) == "7"


def test_write_csv_and_hash(tmp_path):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    rows = [[1, 0.5, "x"], [2, float("nan"), "y"]]
    write_csv(p1, ["i", "v", "s"], rows)
    write_csv(p2, ["i", "v", "s"], rows)
    assert p1.read_bytes() == p2.read_bytes()
    assert b"\r" not in p1.read_bytes()
    assert sha256_file(p1) == sha256_file(p2)
    with open(p1) as fh:
        back = list(csv.reader(fh))
    assert back[0] == ["i", "v", "s"] and back[2][1] == "nan"


def test_write_json_complex(tmp_path):
    p = tmp_path / "x.json"
    write_json(p, {"b": 1 + 2j, "a": np.float64(np.inf), "c": np.arange(2)})
    txt = p.read_text()
    assert txt.index('"a"') < txt.index('"b"')
    assert '"inf"' in txt


def test_contour_circle():
    x = np.linspace(-2, 2, 81)
    X, Y = np.meshgrid(x, x)
    lines = contour_polylines(x, x, X**2 + Y**2, [1.0])[1.0]
    assert len(lines) == 1
    assert np.abs(np.abs(lines[0]) - 1.0).max() <= 1e-2
