import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_array_equal

from ballrot import iofmt, specfun
from ballrot.eigenbasis import enumerate_modes
from ballrot.exceptions import ChecksumError, FormatError
from ballrot.solver import AnalyticField, ModeCombination
from ballrot.spectral import SpectralCoefficients


def test_minimal_modes_doc():
    doc = iofmt.read_field_spec("{radius: 1, modes: [[curl_plus, 1, 1, 0, 1.0]]}")
    assert doc.is_modes and doc.radius == 1.0
    assert doc.modes == ((("curl_plus", 1, 1, 0), 1.0),)
    assert isinstance(doc.to_field(), ModeCombination)


def test_duplicate_mode_named():
    text = "modes:\n  - [graddiv, 0, 1, 0, 1.0]\n  - [graddiv, 0, 1, 0, 2.0]\n"
    with pytest.raises(FormatError, match=r"modes\[1\].*duplicate.*graddiv, 0, 1, 0"):
        iofmt.read_field_spec(text)


def test_preset_doc():
    doc = iofmt.read_field_spec("preset:\n  name: constant\n  direction: [0, 0, 1]\n")
    assert doc.preset == "constant" and doc.params == {"direction": [0.0, 0.0, 1.0]}
    f = doc.to_field()
    assert isinstance(f, AnalyticField)
    assert np.array_equal(f(np.zeros((2, 3))), [[0, 0, 1], [0, 0, 1]])
    doc = iofmt.read_field_spec("radius: 2\npreset: {name: rotation, axis: [1, 0, 0], profile: parabolic}")
    assert doc.to_field()(np.array([[0.0, 2.0, 0.0]])).tolist() == [[0.0, 0.0, 0.0]]


@pytest.mark.parametrize("text,where", [
    ("radius: 1\nmodes: [[curl_plus, 1, 1, 0, 1.0]]\nextra: 3\n", "extra"),
    ("modes: [[curl_plus, 0, 1, 0, 1.0]]", r"modes\[0\]\[1\]"),
    ("modes: [[curl_plus, 1, 1, 2, 1.0]]", r"modes\[0\]\[3\]"),
    ("modes: [[curl_plus, 1, 0, 0, 1.0]]", r"modes\[0\]\[2\]"),
    ("modes: [[spiral, 1, 1, 0, 1.0]]", r"modes\[0\]\[0\]"),
    ("modes: [[curl_plus, 1, 1, 0, .nan]]", r"modes\[0\]\[4\]"),
    ("modes: [[curl_plus, 1, 1, 0]]", r"modes\[0\]"),
    ("radius: -1\nmodes: [[curl_plus, 1, 1, 0, 1]]", "radius"),
    ("preset: {name: constant, strength: 2}", r"preset\.strength"),
    ("preset: {name: whirl}", r"preset\.name"),
    ("preset: {name: gradient, axis: 7}", "preset"),
    ("radius: 1", "exactly one"),
    ("modes: [[curl_plus, 1, 1, 0, 1]]\npreset: constant", "exactly one"),
])
def test_schema_errors(text, where):
    with pytest.raises(FormatError, match=where):
        iofmt.read_field_spec(text)


def test_parse_error_has_position():
    with pytest.raises(FormatError, match=r"line \d+, column \d+"):
        iofmt.read_field_spec("modes:\n  - [curl_plus, 1, 1, 0, 1.0\nradius: 1\n")


def test_zero_table_round_trip(tmp_path):
    t = specfun.build_zero_table("graddiv", 5, 4, radius=1.7)
    p = tmp_path / "z.json"
    iofmt.write_zero_table(t, p)
    back = iofmt.read_zero_table(p)
    assert back == t
    assert [e.zero for e in back.entries] == [e.zero for e in t.entries]
    assert iofmt.dumps_zero_table(t) == iofmt.dumps_zero_table(back)


def test_zero_table_tamper_and_version(tmp_path):
    t = specfun.build_zero_table("curl", 2, 2)
    doc = json.loads(iofmt.dumps_zero_table(t))
    doc["payload"]["entries"][0][2] = (5.0).hex()
    with pytest.raises(ChecksumError):
        iofmt.loads_zero_table(json.dumps(doc))
    doc = json.loads(iofmt.dumps_zero_table(t))
    doc["sha256"] = "0" * 64
    with pytest.raises(ChecksumError):
        iofmt.loads_zero_table(json.dumps(doc))
    doc = json.loads(iofmt.dumps_zero_table(t))
    doc["version"] = 99
    with pytest.raises(FormatError, match="version"):
        iofmt.loads_zero_table(json.dumps(doc))
    with pytest.raises(FormatError):
        iofmt.loads_zero_table("{not json")


def test_cache_hit(tmp_path, monkeypatch):
    monkeypatch.setenv(iofmt.CACHE_ENV, str(tmp_path / "cache"))
    t1, hit1 = iofmt.load_or_build("curl", 3, 2)
    t2, hit2 = iofmt.load_or_build("curl", 3, 2)
    assert (hit1, hit2) == (False, True)
    assert t1 == t2
    monkeypatch.delenv(iofmt.CACHE_ENV)
    assert iofmt.load_or_build("curl", 3, 2)[1] is False


def test_coefficient_document_round_trip():
    b = enumerate_modes("all", 2, 1)
    c = SpectralCoefficients(b, np.linspace(-1, 1, len(b)) / 3)
    text = iofmt.dumps_coefficients(c.as_dict(), b.radius, {"note": "x"})
    R, rows, meta = iofmt.loads_coefficients(text)
    assert R == 1.0 and meta == {"note": "x"}
    back = SpectralCoefficients.from_mapping(b, dict(rows))
    assert_array_equal(back.values, c.values)
    assert text == iofmt.dumps_coefficients(c.as_dict(), b.radius, {"note": "x"})


def test_csv_empty_and_round_trip(tmp_path):
    p = tmp_path / "e.csv"
    iofmt.export_samples(np.zeros((0, 3)), np.zeros((0, 3)), p)
    assert p.read_text() == "x,y,z,ux,uy,uz\n"
    pts, vals = iofmt.read_csv_samples(p)
    assert pts.shape == (0, 3)


@settings(max_examples=40, deadline=None)
@given(a=arrays(np.float64, (5, 6), elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_csv_full_precision(a):
    pts, vals = iofmt.loads_csv(iofmt.dumps_csv(a[:, :3], a[:, 3:]))
    assert_array_equal(pts, a[:, :3])
    assert_array_equal(vals, a[:, 3:])


def test_vtk_layout(tmp_path):
    pts = np.array([[0.1, 0.2, 0.3], [1.0, -1.0, 0.5]])
    vals = np.array([[1.0, 2.0, 3.0], [-4.0, 5.5, 6.25]])
    p = tmp_path / "s.vtk"
    iofmt.export_samples(pts, vals, p, "vtk", name="velocity")
    lines = p.read_text().splitlines()
    assert lines[0] == "# vtk DataFile Version 3.0"
    assert lines[2:5] == ["ASCII", "DATASET POLYDATA", "POINTS 2 double"]
    assert "VERTICES 2 4" in lines and "POINT_DATA 2" in lines
    i = lines.index("VECTORS velocity double")
    assert [list(map(float, ln.split())) for ln in lines[i + 1:]] == vals.tolist()
    empty = iofmt.dumps_vtk(np.zeros((0, 3)), np.zeros((0, 3)))
    assert "POINTS 0 double" in empty and "VERTICES" not in empty


def test_export_errors(tmp_path):
    with pytest.raises(ValueError):
        iofmt.export_samples(np.zeros((1, 3)), np.zeros((1, 3)), tmp_path / "x", "hdf5")
    with pytest.raises(ValueError):
        iofmt.dumps_csv(np.zeros((2, 3)), np.zeros((1, 3)))
    with pytest.raises(FormatError):
        iofmt.loads_csv("a,b\n1,2\n")
