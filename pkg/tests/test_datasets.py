import numpy as np
import pytest

from orthofeatures.datasets import (Dataset, Format, format_dataset, load_dataset, parse_dataset,
                                    save_dataset, synth_dataset)
from orthofeatures.errors import ConfigurationError, InputError, ParseError


def test_parse_csv():
    ds = parse_dataset("1,2\n3,4\n\n# note\n5,6\n")
    assert ds.n == 3 and ds.d == 2
    np.testing.assert_array_equal(ds.points, [[1, 2], [3, 4], [5, 6]])


def test_parse_whitespace():
    ds = parse_dataset("1 2  3\n4\t5 6\n", Format.WHITESPACE)
    assert ds.points.shape == (2, 3)


@pytest.mark.parametrize("text,line", [("1,2\n3,x\n", 2), ("1,2\n\n3\n", 3),
                                       ("1,nan\n", 1), ("1,2\n3,inf\n", 2)])
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(ParseError) as info:
        parse_dataset(text, source="data.csv")
    assert info.value.line == line
    assert f"data.csv:{line}:" in str(info.value)


def test_empty_input():
    with pytest.raises(ParseError):
        parse_dataset("# only a comment\n")


def test_round_trip(tmp_path):
    pts = np.random.default_rng(0).standard_normal((7, 3)) * 1e-3
    for fmt in Format:
        path = tmp_path / f"pts.{fmt.value}"
        save_dataset(pts, path, fmt)
        np.testing.assert_array_equal(load_dataset(path, fmt).points, pts)


def test_format_digits():
    assert format_dataset([[0.1, 1.0]]) == "0.10000000000000001,1\n"


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        load_dataset(tmp_path / "nope.csv")


def test_dataset_is_read_only():
    ds = Dataset(np.zeros((2, 2)), "x", 2)
    with pytest.raises(ValueError):
        ds.points[0, 0] = 1.0


def test_sphere_norms():
    ds = synth_dataset("sphere", 100, 16, 3)
    np.testing.assert_allclose(np.linalg.norm(ds.points, axis=1), 1.0, atol=1e-14)


def test_gaussian_moments():
    pts = synth_dataset("gaussian", 100_000, 4, 0).points
    np.testing.assert_allclose(pts.var(axis=0), 1.0, rtol=0.02)
    assert np.all(np.abs(pts.mean(axis=0)) < 0.02)


def test_synth_deterministic():
    a = synth_dataset("gaussian", 5, 3, 9).points
    np.testing.assert_array_equal(a, synth_dataset("gaussian", 5, 3, 9).points)
    assert not np.array_equal(a, synth_dataset("gaussian", 5, 3, 10).points)


def test_synth_errors():
    with pytest.raises(ConfigurationError):
        synth_dataset("cube", 5, 3, 0)
    with pytest.raises(ConfigurationError):
        synth_dataset("sphere", 0, 3, 0)
