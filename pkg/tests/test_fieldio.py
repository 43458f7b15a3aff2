from __future__ import annotations

import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fbreg.errors import InputError
from fbreg.fieldio import MAGIC, decode_field, encode_field, read_field, write_field
from fbreg.model import Grid, VectorField


def _field(n: int, m: int, seed: int = 0) -> VectorField:
    grid = Grid.from_bounds([-0.5] * n, [0.5] * n, 1 / 8)
    vals = np.random.default_rng(seed).standard_normal(grid.dims + (m,))
    return VectorField(grid, vals, grid.boundary_mask())


@pytest.mark.parametrize("n, m", [(1, 1), (2, 2), (3, 3)])
def test_round_trip_is_bit_exact(tmp_path, n, m):
    u = _field(n, m)
    path = tmp_path / "u.vfb"
    write_field(path, u)
    back = read_field(path)
    assert back.grid == u.grid
    assert back.values.tobytes() == u.values.tobytes()
    np.testing.assert_array_equal(back.mask, u.grid.boundary_mask())
    write_field(tmp_path / "again.vfb", back)
    assert (tmp_path / "again.vfb").read_bytes() == path.read_bytes()


@given(arrays(np.float64, (5, 4, 2), elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_any_values_survive(values):
    grid = Grid(2, (5, 4), (0.25, -1.0), 0.125)
    u = VectorField(grid, values.copy(), grid.boundary_mask())
    assert decode_field(encode_field(u)).values.tobytes() == u.values.tobytes()


def test_header_layout():
    data = encode_field(_field(2, 3))
    assert data[:4] == MAGIC
    assert struct.unpack_from("<III", data, 4) == (1, 2, 3)
    assert struct.unpack_from("<2Q", data, 16) == (9, 9)
    assert len(data) == 16 + 16 + 16 + 8 + 8 * 9 * 9 * 3


def test_corrupt_files_rejected(tmp_path):
    data = encode_field(_field(2, 2))
    with pytest.raises(InputError):
        decode_field(data[:10])
    with pytest.raises(InputError):
        decode_field(b"XXXX" + data[4:])
    with pytest.raises(InputError):
        decode_field(data[:4] + struct.pack("<I", 2) + data[8:])
    with pytest.raises(InputError):
        decode_field(data[:-8])
    with pytest.raises(InputError):
        read_field(tmp_path / "missing.vfb")
