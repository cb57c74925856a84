import json

import numpy as np
import pytest

from qdistinguish import io
from qdistinguish.channels import channels_equal, luders_apparatus
from qdistinguish.devices import random_channel, x_measure_z_guess
from qdistinguish.opcore import Observable


def roundtrip(doc):
    return json.loads(json.dumps(doc))


def test_complex_encoding():
    assert io.encode_complex(1 - 2j) == [1.0, -2.0]
    m = io.decode_matrix([[1, [0, 1]], [[0, -1], 2.5]], "m")
    assert np.array_equal(m, np.array([[1, 1j], [-1j, 2.5]]))


def test_observable_round_trip():
    z = Observable.fourier(3, ["a", "b", "c"])
    back = io.observable_from_dict(roundtrip(io.observable_to_dict(z)))
    assert np.allclose(back.eigenvectors, z.eigenvectors)
    assert back.labels == ("a", "b", "c")


def test_channel_and_apparatus_round_trip():
    ch = random_channel(2, 3, np.random.default_rng(0))
    assert channels_equal(io.channel_from_dict(roundtrip(io.channel_to_dict(ch))), ch, tol=1e-14)
    a = luders_apparatus(Observable.fourier(2))
    b = io.apparatus_from_dict(roundtrip(io.apparatus_to_dict(a)))
    assert b.dims == a.dims and channels_equal(a.channel, b.channel, tol=1e-14)
    x = Observable.computational(2)
    rows = [[x.projector(i) / np.sqrt(2)] * 2 for i in range(2)]
    j = io.apparatus_from_dict(roundtrip(io.joint_apparatus_to_dict(rows, ["0", "1"], ["+", "-"])))
    assert j.factor("Z").labels == ("+", "-")
    assert channels_equal(j.channel, x_measure_z_guess(x, Observable.fourier(2)).channel)


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"dim_in": 2, "dim_out": 2}, "kraus"),
        ({"dim_in": 0, "dim_out": 2, "kraus": []}, "dim_in"),
        ({"dim_in": 2, "dim_out": 2, "kraus": [[[1, 0], [0]]]}, r"kraus\[0\]\[1\]"),
        ({"dim_in": 2, "dim_out": 2, "kraus": [[[1, 0], [0, "x"]]]}, r"kraus\[0\]\[1\]\[1\]"),
        ({"dim_in": 2, "dim_out": 3, "kraus": [[[1, 0], [0, 1]]]}, r"kraus\[0\]"),
        ({"dim_in": 2, "dim_out": 2, "kraus": [[[1, 0], [0, 0.5]]]}, "trace preserving"),
    ],
)
def test_channel_errors_name_the_field(doc, field):
    with pytest.raises(io.SchemaError, match=field):
        io.channel_from_dict(doc)


def test_observable_errors_name_the_field():
    with pytest.raises(io.SchemaError, match="eigenvectors"):
        io.observable_from_dict({"dim": 2, "eigenvectors": [[1, 0], [1, 0]]})
    with pytest.raises(io.SchemaError, match="labels"):
        io.observable_from_dict({"dim": 2, "eigenvectors": [[1, 0], [0, 1]], "labels": [1, 1]})
    with pytest.raises(io.SchemaError, match="dim"):
        io.observable_from_dict({"eigenvectors": [[1]]})


def test_apparatus_errors_name_the_field():
    good = io.apparatus_to_dict(luders_apparatus(Observable.computational(2)))
    bad = json.loads(json.dumps(good))
    bad["output_factors"][1]["kind"] = "weird"
    with pytest.raises(io.SchemaError, match=r"output_factors\[1\]"):
        io.apparatus_from_dict(bad)
    with pytest.raises(io.SchemaError, match="kraus_xz"):
        io.apparatus_from_dict({"kraus_xz": [[[[1, 0], [0, 1]]] * 2]})


def test_files_require_schema_version(tmp_path):
    p = tmp_path / "c.json"
    doc = io.channel_to_dict(random_channel(2, 2, np.random.default_rng(1)))
    io.write_json(doc, p)
    assert io.load_channel(p).dim_in == 2
    doc["schema"] = 2
    io.write_json(doc, p)
    with pytest.raises(io.SchemaError, match="schema"):
        io.load_channel(p)
    with pytest.raises(io.SchemaError, match="cannot read"):
        io.load_channel(tmp_path / "missing.json")
