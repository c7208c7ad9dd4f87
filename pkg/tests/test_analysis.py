import math

import numpy as np
import pytest

from neckwall.analysis import (
    SWEEP_COLUMNS,
    SweepRow,
    critical_plateaus,
    fit_scaling,
    limit_profile,
    neck_profile,
    plateau_values,
    sweep,
)
from neckwall.competitors import build_competitor_field
from neckwall.geometry import BulkSpec, NeckParams, ResolutionPolicy, build_domain, rasterize
from neckwall.minimiser import SolveOptions, initial_state
from neckwall.potential import DoubleWell
from neckwall.regimes import PowerLog, ScalingFamily, classify

POL = ResolutionPolicy(min_cells=3, neck_cells_x=6)


@pytest.fixture(scope="module")
def grid():
    return rasterize(build_domain(NeckParams(0.1, 0.03, 0.01), BulkSpec(1.0)), POL)


def test_profile_of_affine(grid):
    u = build_competitor_field(grid, "affine", 0.0, 1.0)
    s, v = neck_profile(grid, u)
    assert s[0] == -1.0 and s[-1] == 1.0
    assert np.max(np.abs(v - (0.5 * s + 0.5))) < 1e-14


def test_profile_of_constant(grid):
    s, v = neck_profile(grid, np.full(grid.n_active, 0.3))
    assert np.allclose(v, 0.3)


def test_plateaus_of_initial_state(grid):
    u = initial_state(grid, 0.0, 1.0)
    assert plateau_values(grid, u) == (0.0, 1.0)
    assert plateau_values(grid, u, mode="shell") == (0.0, 1.0)
    with pytest.raises(ValueError):
        plateau_values(grid, u, (0.2, 0.1))
    with pytest.raises(ValueError):
        plateau_values(grid, u, mode="sphere")


def test_limit_profiles():
    inside = classify(ScalingFamily(PowerLog(1, 2), PowerLog(1, 3)))
    assert limit_profile(inside, 0, 1)(np.array([-1.0, 1.0])).tolist() == [0.0, 1.0]
    outside = classify(ScalingFamily(PowerLog(1, 0.5), PowerLog(1, 0.8)))
    assert np.all(limit_profile(outside, 0, 1)(np.linspace(-1, 1, 5)) == 0.5)
    crit = classify(ScalingFamily(PowerLog(1, 0.5), PowerLog(2, 1, -1)))
    m1, m2 = critical_plateaus(crit.ell, 0, 1)
    assert m1 == pytest.approx(0.5 / (math.pi + 1))
    assert limit_profile(crit, 0, 1)(np.array([-1.0, 1.0])) == pytest.approx([m1, m2])
    ks = classify(ScalingFamily(PowerLog(1, 0.5), PowerLog(0.5, 0.5)))
    assert limit_profile(ks, 0, 1) is None


def _rows(rho, kappa, noise=None):
    rng = np.random.default_rng(0)
    rows = []
    for eps in rho:
        nk = NeckParams(eps, eps**1.5, eps**2)
        r = eps / (nk.delta * nk.eta)
        f = 1.0 if noise is None else math.exp(noise * rng.standard_normal())
        rows.append(SweepRow(eps, nk.delta, nk.eta, total=kappa / r * f))
    return rows


def test_fit_scaling_exact():
    s, k, res = fit_scaling(_rows([0.3, 0.2, 0.1, 0.05], 1.7), "eps/(delta*eta)")
    assert s == pytest.approx(1.0, abs=1e-12)
    assert k == pytest.approx(1.7, rel=1e-12)
    assert res < 1e-12


def test_fit_scaling_noisy():
    _, k, _ = fit_scaling(_rows(np.geomspace(0.4, 0.02, 12), 1.7, 0.05), "eps/(delta*eta)")
    assert k == pytest.approx(1.7, rel=0.1)


def test_fit_scaling_degenerate():
    with pytest.raises(ValueError):
        fit_scaling(_rows([0.2, 0.2, 0.2], 1.0), "eps/(delta*eta)")
    with pytest.raises(ValueError):
        fit_scaling(_rows([0.2, 0.1], 1.0), "eps/(delta*eta)")


def test_small_sweep_rows():
    fam = ScalingFamily(PowerLog(0.3, 1.0), PowerLog(0.3, 2.0))
    rows = sweep(fam, [0.2, 0.1], BulkSpec(2.0), DoubleWell(),
                 SolveOptions(max_iters=300, preconditioner="amg"), ResolutionPolicy(min_cells=3, neck_cells_x=6))
    assert len(rows) == 2
    for r in rows:
        assert r.status == "ok"
        assert math.isfinite(r.scaled_total) and r.scaled_total > 0
        assert 0 <= r.neck_fraction <= 1
        assert r.total >= 0 and r.neck >= 0 and r.outside >= 0
    again = sweep(fam, [0.2, 0.1], BulkSpec(2.0), DoubleWell(),
                  SolveOptions(max_iters=300, preconditioner="amg"), ResolutionPolicy(min_cells=3, neck_cells_x=6))
    assert [r.total for r in again] == [r.total for r in rows]


def test_degenerate_wells():
    fam = ScalingFamily(PowerLog(0.3, 1.0), PowerLog(0.3, 2.0))
    (row,) = sweep(fam, [0.2], BulkSpec(2.0), None, alpha=0.5, beta=0.5, policy=POL)
    assert row.degenerate and row.total == 0.0 and math.isnan(row.neck_fraction)


def test_failed_row_does_not_stop_sweep():
    # at eps = 0.2 the bulk is too small for the neck; eps = 0.1 fits
    fam = ScalingFamily(PowerLog(0.3, 1.0), PowerLog(0.3, 2.0))
    rows = sweep(fam, [0.2, 0.1], BulkSpec(1.0), DoubleWell(), SolveOptions(max_iters=5), POL)
    assert [r.status for r in rows] == ["failed", "ok"]
    assert "GeometryError" in rows[0].error
    assert rows[1].n_cells > 0


def test_row_round_trip():
    r = SweepRow(0.1, 0.01, 0.001, total=1.5, n_cells=7, degenerate=True, reason="grad_tol")
    d = {k: str(v) for k, v in r.to_dict().items()}
    back = SweepRow.from_dict(d)
    assert back.total == 1.5 and back.n_cells == 7 and back.degenerate is True
    assert math.isnan(back.m1)
    assert SweepRow.from_dict(r.to_json_dict()).total == 1.5
    assert SWEEP_COLUMNS[:3] == ("eps", "delta", "eta")
