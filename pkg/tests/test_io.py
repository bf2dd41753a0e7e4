# tests/test_io.py

import json
import math

import numpy as np
import pytest

from locscale.common.errors import InputFormatError
from locscale.common.io import (
    format_cell,
    read_field_csv,
    read_json,
    read_pgm,
    read_points_csv,
    read_surface_csv,
    write_field_csv,
    write_json,
    write_pgm,
    write_surface_csv,
)
from locscale.geometry.surface import SurfaceKind
from locscale.signal.field import BoundaryPolicy, SampledField


def test_field_csv_round_trip(tmp_path, sine_field):
    field = sine_field(m=3, h=1.0 / 32)
    path = write_field_csv(tmp_path / "f.csv", field)
    back = read_field_csv(path, boundary="clamp")
    np.testing.assert_array_equal(back.values, field.values)
    assert back.h == pytest.approx(field.h, rel=1e-12)
    assert back.boundary is BoundaryPolicy.CLAMP


@pytest.mark.parametrize("text, fragment", [
    ("t,value\n0,1\n1,2\n", ":1:"),
    ("x,value\n0,1\n0.1,oops\n", ":3:"),
    ("x,value\n0,1\n0.1,2,3\n", ":3:"),
    ("x,value\n0,1\n0.1,2\n0.3,3\n", "uniformly"),
    ("x,value\n", "no data"),
    ("", ":1:"),
])
def test_bad_field_csv(tmp_path, text, fragment):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(InputFormatError) as err:
        read_field_csv(path)
    assert fragment in str(err.value)


def test_missing_files_are_input_errors(tmp_path):
    with pytest.raises(InputFormatError):
        read_field_csv(tmp_path / "nope.csv")
    with pytest.raises(InputFormatError):
        read_pgm(tmp_path / "nope.pgm")
    with pytest.raises(InputFormatError):
        read_json(tmp_path / "nope.json")


def test_pgm_with_comments(tmp_path):
    path = tmp_path / "img.pgm"
    path.write_text("P2\n# made by hand\n3 2\n4\n0 1 2\n3 4 0\n")
    field = read_pgm(path, h=0.5)
    assert field.shape == (2, 3)
    np.testing.assert_allclose(field.values, [[0.0, 0.25, 0.5], [0.75, 1.0, 0.0]])
    assert field.h == 0.5


def test_pgm_round_trip_keeps_levels(tmp_path):
    values = np.array([[0.0, 1.0], [0.5, 0.25]])
    path = write_pgm(tmp_path / "out.pgm", SampledField(values=values, h=1.0), maxval=4)
    np.testing.assert_allclose(read_pgm(path).values, values)


@pytest.mark.parametrize("text", ["P5\n1 1\n255\n0\n", "P2\n2 2\n255\n0 1 2\n", "P2\n1 1\n9\n12\n", "P2\n1 x\n9\n1\n"])
def test_bad_pgm(tmp_path, text):
    path = tmp_path / "bad.pgm"
    path.write_text(text)
    with pytest.raises(InputFormatError):
        read_pgm(path)


def test_surface_csv_round_trip(tmp_path, circle, tent_graph):
    surface = circle(radius=1.5, samples=64)
    path = write_surface_csv(tmp_path / "circle.csv", surface)
    assert (tmp_path / "circle.json").exists()
    back = read_surface_csv(path)
    assert back.surface.closed
    assert back.surface.kind is SurfaceKind.GENERAL_PARAMETRIC
    assert back.surface.h_r == pytest.approx(1.0 / 64, rel=1e-12)
    np.testing.assert_array_equal(back.surface.samples, surface.samples)
    assert back.weights is None

    tent = tent_graph()
    weights = np.linspace(1.0, 2.0, tent.size)
    back = read_surface_csv(write_surface_csv(tmp_path / "tent.csv", tent, weights))
    assert back.surface.kind is SurfaceKind.LIPSCHITZ_GRAPH
    assert not back.surface.closed
    np.testing.assert_array_equal(back.weights, weights)


def test_surface_csv_without_sidecar_is_open_and_general(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("r1,x1,x2\n0,0,0\n0.5,1,0\n1,1,1\n")
    back = read_surface_csv(path)
    assert back.surface.kind is SurfaceKind.GENERAL_PARAMETRIC
    assert not back.surface.closed
    assert back.surface.h_r == 0.5


@pytest.mark.parametrize("text, sidecar", [
    ("r1,x1\n0,0\n1,1\n", None),
    ("x1,r1,x2\n0,0,0\n1,1,1\n", None),
    ("r1,x1,x2\n0,0,0\n0.5,1,0\n1,1,1\n", {"d": 2, "n": 3}),
    ("r1,r2,x1,x2,x3\n0,0,0,0,0\n0,1,0,1,0\n1,0,1,0,0\n", None),
    ("r1,x1,x2\n0,0,0\n1,1,0\n0.5,1,1\n", None),
])
def test_bad_surface_csv(tmp_path, text, sidecar):
    path = tmp_path / "s.csv"
    path.write_text(text)
    if sidecar is not None:
        (tmp_path / "s.json").write_text(json.dumps(sidecar))
    with pytest.raises(InputFormatError):
        read_surface_csv(path)


def test_points_csv_prefers_coordinate_columns(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("id,x1,x2\n0,0.5,0.25\n1,0.75,1\n")
    np.testing.assert_array_equal(read_points_csv(path), [[0.5, 0.25], [0.75, 1.0]])


def test_write_json_is_sorted_and_finite(tmp_path):
    path = write_json(tmp_path / "s.json", {"b": math.nan, "a": [1, np.float64(2.5), np.bool_(True)]})
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("\n")
    assert json.loads(text) == {"a": [1, 2.5, True], "b": None}


@pytest.mark.parametrize("value, expected", [
    (None, ""),
    (True, "true"),
    (np.bool_(False), "false"),
    (np.int64(3), "3"),
    (0.1, "0.1"),
    (np.float64(1e-20), "1e-20"),
    ("curve", "curve"),
])
def test_format_cell(value, expected):
    assert format_cell(value) == expected
