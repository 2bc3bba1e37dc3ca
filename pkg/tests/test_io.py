import io
import struct

import numpy as np
import pytest

from semifb.errors import LikelihoodFormatError
from semifb.io import dumps_matrix, loads_matrix, read_matrix, write_matrix


@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_round_trip(tmp_path, dtype):
    V = np.array([[-1.0, -np.inf, -3.5], [0.0, -2.25, -7.0]])
    write_matrix(tmp_path / "m.sfbl", V, dtype)
    got = read_matrix(tmp_path / "m.sfbl")
    assert got.dtype == dtype
    np.testing.assert_array_equal(got, V.astype(dtype))


def test_header_layout():
    data = dumps_matrix(np.array([[1.0, 2.0]]), np.float64)
    assert data[:4] == b"SFBL"
    assert struct.unpack("<IIII", data[4:20]) == (1, 1, 1, 2)
    assert struct.unpack("<2d", data[20:]) == (1.0, 2.0)
    assert len(dumps_matrix(np.zeros((3, 5)), np.float32)) == 20 + 15 * 4


def test_state_major_order():
    V = np.arange(6.0).reshape(2, 3)
    assert struct.unpack("<6d", dumps_matrix(V)[20:]) == (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)


def test_file_objects():
    buf = io.BytesIO()
    write_matrix(buf, np.ones((2, 2)))
    buf.seek(0)
    np.testing.assert_array_equal(read_matrix(buf), np.ones((2, 2)))


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: b"XXXX" + d[4:],
        lambda d: d[:4] + struct.pack("<I", 9) + d[8:],
        lambda d: d[:8] + struct.pack("<I", 7) + d[12:],
        lambda d: d[:-1],
        lambda d: d + b"\0",
        lambda d: d[:10],
    ],
)
def test_malformed(mutate):
    with pytest.raises(LikelihoodFormatError):
        loads_matrix(mutate(dumps_matrix(np.zeros((2, 2)))))


def test_nan_rejected():
    with pytest.raises(LikelihoodFormatError):
        dumps_matrix(np.array([[np.nan]]))
    raw = dumps_matrix(np.zeros((1, 1)))[:20] + struct.pack("<d", float("nan"))
    with pytest.raises(LikelihoodFormatError):
        loads_matrix(raw)
