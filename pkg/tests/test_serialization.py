from fractions import Fraction

import pytest

from geometry.backends import COMPLEX, RATIONAL
from geometry.errors import SpecFormatError
from utils.serialization import coerce_point, dumps, load_json, parse_point_text, write_json


class TestPointText:
    def test_rational(self):
        p = parse_point_text("2:-2:0:1/2:0")
        assert p.backend is RATIONAL
        assert list(p.coords) == [1, -1, 0, Fraction(1, 4), 0]

    def test_complex_literal(self):
        p = parse_point_text("1:1j:0")
        assert p.backend is COMPLEX

    def test_malformed(self):
        with pytest.raises(SpecFormatError):
            parse_point_text("1::0")
        with pytest.raises(SpecFormatError):
            parse_point_text("7")

    def test_complex_point_with_rational_backend(self):
        with pytest.raises(SpecFormatError):
            parse_point_text("1:1j", RATIONAL)
        with pytest.raises(SpecFormatError):
            coerce_point(parse_point_text("1:1j"), RATIONAL)


def test_canonical_json_text():
    text = dumps({"b": 1, "a": [1, 2]})
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')


def test_write_and_load(tmp_path):
    path = tmp_path / "doc.json"
    write_json({"x": 1}, path)
    assert load_json(path) == {"x": 1}


def test_load_errors(tmp_path):
    with pytest.raises(SpecFormatError):
        load_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(SpecFormatError):
        load_json(bad)
