import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from neckwall.errors import CellBudgetError, GeometryError, RegimeViolationError
from neckwall.geometry import (
    BulkSpec,
    NeckParams,
    Region,
    ResolutionPolicy,
    box_grid,
    build_domain,
    rasterize,
)


def test_neck_params_validation():
    with pytest.raises(GeometryError):
        NeckParams(0.0, 0.1, 0.05)
    with pytest.raises(RegimeViolationError):
        NeckParams(0.1, 0.01, 0.02)
    with pytest.warns(UserWarning):
        NeckParams(0.1, 0.02, 0.02)
    assert NeckParams(0.1, 0.02, 0.01).volume == pytest.approx(8 * 0.1 * 0.02 * 0.01)


def test_bulk_check():
    with pytest.raises(GeometryError):
        build_domain(NeckParams(0.1, 0.1, 0.01), BulkSpec(1.0))
    with pytest.raises(GeometryError):
        BulkSpec(1.0, flat_radius=0.8)
    assert BulkSpec(2.0).r0 == 1.0


def test_region_of_points():
    d = build_domain(NeckParams(0.1, 0.03, 0.01))
    pts = np.array([[-0.5, 0, 0], [0, 0, 0], [0.5, 0.4, -0.4], [0, 0.04, 0], [0.1, 0, 0], [-2, 0, 0]])
    reg = d.region_of(*pts.T)
    assert reg.tolist() == [Region.LEFT, Region.NECK, Region.RIGHT, -1, Region.NECK, -1]


def test_neck_only_grid_is_box():
    nk = NeckParams(0.1, 0.03, 0.01)
    g = rasterize(build_domain(nk, neck_only=True))
    assert g.mask.all()
    assert (g.region == Region.NECK).all()
    assert g.shape == (25, 16, 16)
    assert g.is_connected()


def test_full_grid_layout():
    nk = NeckParams(0.1, 0.03, 0.01)
    g = rasterize(build_domain(nk))
    assert g.is_connected()
    vols = g.region_volumes()
    assert vols["left_bulk"] == pytest.approx(1.0, rel=0.02)
    assert vols["right_bulk"] == pytest.approx(vols["left_bulk"], rel=1e-12)
    # the mouth-plane layer makes the rasterised neck (2n+1)/(2n) too long
    assert vols["neck"] == pytest.approx(nk.volume * 25 / 24, rel=1e-9)
    x = g.centres[0]
    assert np.any(x == 0.1) and np.any(x == -0.1)
    assert np.allclose(x, -x[::-1])


def test_cell_budget():
    with pytest.raises(CellBudgetError):
        rasterize(build_domain(NeckParams(0.1, 0.03, 0.01)), ResolutionPolicy(max_cells=1000))


@settings(max_examples=15, deadline=None)
@given(
    eps=st.floats(0.05, 0.4),
    rd=st.floats(0.1, 1.0),
    re=st.floats(0.05, 0.95),
)
def test_faces_symmetric_and_positive(eps, rd, re):
    delta = min(rd * eps, 0.04)
    nk = NeckParams(eps, delta, re * delta)
    g = rasterize(build_domain(nk, BulkSpec(1.0)), ResolutionPolicy(min_cells=2, neck_cells_x=3))
    lo, hi, coef = g.faces
    assert np.all(coef > 0)
    assert np.all(lo < hi)
    assert np.all(g.volumes > 0)
    # mirror symmetry x -> -x maps the active set to itself
    assert np.array_equal(g.mask, g.mask[::-1])


def test_box_grid_mask():
    m = np.ones((3, 3, 3), bool)
    m[1, 1, 1] = False
    g = box_grid((3, 3, 3), (0.5, 1.0, 2.0), m)
    assert g.n_active == 26
    with pytest.raises(GeometryError):
        box_grid((2, 2, 2), mask=np.zeros((2, 2, 2), bool))
