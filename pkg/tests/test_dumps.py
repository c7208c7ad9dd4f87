import numpy as np
import pytest

from neckwall.dumps import (
    atomic_write,
    field_from_bytes,
    field_to_bytes,
    mask_from_text,
    mask_to_text,
    rle_decode,
    rle_encode,
)
from neckwall.geometry import BulkSpec, NeckParams, ResolutionPolicy, build_domain, rasterize


@pytest.fixture(scope="module")
def grid():
    return rasterize(build_domain(NeckParams(0.1, 0.03, 0.01), BulkSpec(1.0)), ResolutionPolicy(min_cells=2, neck_cells_x=3))


def test_rle_round_trip():
    rng = np.random.default_rng(0)
    for start in (False, True):
        m = rng.random((4, 5, 6)) < 0.5
        m.ravel()[0] = start
        runs = rle_encode(m)
        assert sum(runs) == m.size
        assert np.array_equal(rle_decode(runs, m.shape), m)
    with pytest.raises(ValueError):
        rle_decode([1, 2], (2, 2, 2))


def test_mask_text_round_trip(grid):
    mask, widths = mask_from_text(mask_to_text(grid))
    assert np.array_equal(mask, grid.mask)
    for a, b in zip(widths, grid.widths):
        assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        mask_from_text("garbage")


def test_field_binary_round_trip(grid):
    u = np.linspace(0, 1, grid.n_active)
    d = field_from_bytes(field_to_bytes(grid, u))
    assert np.array_equal(d["values"], u)
    assert np.array_equal(d["mask"], grid.mask)
    assert np.array_equal(d["region"], grid.region)
    assert all(np.array_equal(a, b) for a, b in zip(d["centres"], grid.centres))
    with pytest.raises(ValueError):
        field_from_bytes(b"nope" * 4)
    with pytest.raises(ValueError):
        field_to_bytes(grid, u[:-1])


def test_atomic_write(tmp_path):
    p = tmp_path / "out.txt"
    atomic_write(p, "hello")
    assert p.read_text() == "hello"
    atomic_write(p, b"\x00\x01")
    assert p.read_bytes() == b"\x00\x01"
    assert [f.name for f in tmp_path.iterdir()] == ["out.txt"]
