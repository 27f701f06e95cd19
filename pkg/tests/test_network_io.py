import json
from fractions import Fraction

import pytest

from core.counterexamples import abs_shifted
from core.errors import MalformedInputError, ShapeError
from core.network import Params, ScalarMode
from utils.network_io import (format_scalar, load_network, params_from_dict, params_to_dict, parse_scalar,
                              round_params, save_network)


def test_format_scalar():
    assert format_scalar(Fraction(-3, 4), exact=True) == "-3/4"
    assert format_scalar(2, exact=True) == "2/1"
    assert format_scalar(Fraction(1, 2), exact=False) == 0.5


@pytest.mark.parametrize("raw, expected", [("3/4", Fraction(3, 4)), (" -2 ", Fraction(-2)), (5, Fraction(5)),
                                           (0.1, Fraction(1, 10))])
def test_parse_scalar_exact(raw, expected):
    assert parse_scalar(raw, exact=True) == expected


@pytest.mark.parametrize("raw", [True, None, "abc", "1/0", float("nan"), float("inf"), [1]])
def test_parse_scalar_rejects(raw):
    with pytest.raises(MalformedInputError):
        parse_scalar(raw, exact=True)


def test_document_layout(abs_theta):
    document = params_to_dict(abs_theta)
    assert document["format"] == "relu-network"
    assert document["version"] == 1
    assert document["scalar_mode"] == "exact"
    assert document["widths"] == [1, 2, 1]
    assert document["layers"][0]["W"] == [["1/1"], ["-1/1"]]


def test_save_and_load(tmp_path):
    theta = abs_shifted(Fraction(1, 3))
    path = tmp_path / "net.json"
    save_network(theta, str(path))
    loaded, document = load_network(str(path))
    assert loaded == theta
    assert document["layers"][1]["b"] == ["1/3"]


def test_float_documents_keep_float_mode(abs_theta):
    loaded = params_from_dict(params_to_dict(abs_theta.to_float()))
    assert loaded.scalar_mode is ScalarMode.FLOAT
    assert loaded.allclose(abs_theta.to_float())


def test_plain_numbers_are_accepted():
    document = {"layers": [{"W": [[1, 0.5]], "b": ["1/3"]}]}
    theta = params_from_dict(document)
    assert theta.W(1)[0, 1] == Fraction(1, 2)
    assert theta.b(1)[0] == Fraction(1, 3)


@pytest.mark.parametrize("document", [
    [],
    {"format": "image", "layers": [{"W": [[1]], "b": [0]}]},
    {"scalar_mode": "complex", "layers": [{"W": [[1]], "b": [0]}]},
    {"layers": []},
    {"layers": [{"W": [[1]]}]},
    {"layers": [{"W": "1", "b": [0]}]},
])
def test_malformed_documents(document):
    with pytest.raises(MalformedInputError):
        params_from_dict(document)


def test_ragged_rows_and_wrong_widths():
    with pytest.raises(ShapeError):
        params_from_dict({"layers": [{"W": [[1, 2], [3]], "b": [0, 0]}]})
    with pytest.raises(ShapeError):
        params_from_dict({"widths": [2, 1], "layers": [{"W": [[1]], "b": [0]}]})


def test_missing_and_broken_files(tmp_path):
    with pytest.raises(MalformedInputError):
        load_network(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(MalformedInputError):
        load_network(str(broken))
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"layers": [{"W": [[True]], "b": [0]}]}))
    with pytest.raises(MalformedInputError):
        load_network(str(wrong))


def test_round_params():
    theta = Params.from_vector(abs_shifted(0).architecture, [0.1234567891, -1, 1, 1, 0, 0, 2.000000004],
                               ScalarMode.FLOAT)
    rounded = round_params(theta)
    assert rounded.is_exact
    assert rounded.W(1)[0, 0] == Fraction(12345679, 10 ** 8)
    assert rounded.b(2)[0] == 2
    assert round_params(theta, 0.5).W(1)[0, 0] == 0


def test_round_params_rejects_nonpositive_quantum(abs_theta):
    with pytest.raises(ValueError):
        round_params(abs_theta, 0)
