import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from pursuit_lab import io


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.data())
def test_binary_and_csv_round_trip_bit_exact(tmp_path_factory, m, n, data):
    A = data.draw(arrays(np.float64, (m, n), elements=st.floats(allow_nan=False, allow_infinity=False)))
    d = tmp_path_factory.mktemp("rt")
    io.save_array(d / "a.bin", A)
    io.save_array(d / "a.csv", A)
    for name in ("a.bin", "a.csv"):
        B = io.read_binary(d / name) if name.endswith(".bin") else io.read_csv_matrix(d / name)
        assert B.tobytes() == np.asarray(A, dtype=np.float64).tobytes()


def test_binary_layout(tmp_path):
    A = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    io.write_binary(tmp_path / "a", A)
    raw = (tmp_path / "a").read_bytes()
    assert raw[:4] == b"PLAB"
    assert int.from_bytes(raw[4:8], "little") == 3
    assert int.from_bytes(raw[8:12], "little") == 2
    assert np.frombuffer(raw[12:], "<f8").tolist() == [1, 3, 5, 2, 4, 6]


def test_bad_files(tmp_path):
    (tmp_path / "bad").write_bytes(b"XXXX" + bytes(8))
    with pytest.raises(ValueError):
        io.read_binary(tmp_path / "bad")
    io.write_binary(tmp_path / "short", np.ones((2, 2)))
    data = (tmp_path / "short").read_bytes()[:-8]
    (tmp_path / "short").write_bytes(data)
    with pytest.raises(ValueError):
        io.read_binary(tmp_path / "short")
    (tmp_path / "ragged.csv").write_text("1,2\n3\n")
    with pytest.raises(ValueError):
        io.read_csv_matrix(tmp_path / "ragged.csv")


def test_load_vector_detects_format(tmp_path):
    v = np.array([1.5, -2.0, 3.25])
    io.save_array(tmp_path / "v.bin", v)
    (tmp_path / "v.csv").write_text("1.5,-2.0,3.25\n")
    assert np.array_equal(io.load_vector(tmp_path / "v.bin"), v)
    assert np.array_equal(io.load_vector(tmp_path / "v.csv"), v)
    io.save_array(tmp_path / "m.bin", np.ones((2, 2)))
    with pytest.raises(ValueError):
        io.load_vector(tmp_path / "m.bin")


def test_write_table(tmp_path):
    io.write_table(tmp_path / "t.csv", ("a", "b", "c"), [(1, 0.1, True), (2, float("nan"), False)])
    assert (tmp_path / "t.csv").read_text() == "a,b,c\n1,0.1,true\n2,,false\n"
