"""Post-processing of minimised fields and epsilon sweeps over scaling families."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .energy import energy
from .errors import NeckwallError
from .geometry import BulkSpec, DumbbellGrid, NeckParams, Region, ResolutionPolicy, build_domain, rasterize
from .minimiser import SolveOptions, initial_state, minimise
from .potential import DoubleWell
from .regimes import (
    INSIDE,
    OUTSIDE,
    Regime,
    RegimeReport,
    ScalingFamily,
    classify,
    rate_value,
)

log = logging.getLogger(__name__)


def neck_profile(grid: DumbbellGrid, field) -> tuple[np.ndarray, np.ndarray]:
    """Volume-weighted cross-section averages of ``field`` over neck cells,
    one per x-slab, against the rescaled coordinate x/eps."""
    u = np.asarray(field, float)
    nk = grid.region == Region.NECK
    if not nk.any():
        raise NeckwallError("grid has no neck cells")
    i = grid.x_slabs()[nk]
    slabs, inv = np.unique(i, return_inverse=True)
    vol = grid.volumes[nk]
    num = np.bincount(inv, weights=u[nk] * vol)
    den = np.bincount(inv, weights=vol)
    if np.any(den <= 0):
        raise NeckwallError("empty neck slab")
    s = grid.centres[0][slabs] / grid.neck.eps
    return s, num / den


def limit_profile(report: RegimeReport, alpha: float, beta: float):
    """Predicted rescaled neck profile s -> v(s) on [-1, 1], or None when the
    regime makes no prediction."""
    mid = 0.5 * (alpha + beta)
    if report.tag in INSIDE:
        return lambda s: 0.5 * (beta - alpha) * np.asarray(s) + mid
    if report.tag in OUTSIDE:
        return lambda s: np.full(np.shape(s), mid)
    if report.tag is Regime.LETTER_BOX_CRITICAL:
        m1, m2 = critical_plateaus(report.ell, alpha, beta)
        return lambda s: 0.5 * (m2 - m1) * np.asarray(s) + 0.5 * (m1 + m2)
    return None


def critical_plateaus(ell: float, alpha: float, beta: float) -> tuple[float, float]:
    """Plateau pair of the critical letter-box regime."""
    mid = 0.5 * (alpha + beta)
    s = math.pi + ell
    return (math.pi * alpha + ell * mid) / s, (math.pi * beta + ell * mid) / s


def plateau_values(grid: DumbbellGrid, field, shell_radii=None, mode: str = "footprint"):
    """Average bulk values (m1, m2) just outside the two neck mouths.

    mode 'footprint' (default): bulk cells whose (y, z) lies in the mouth
    rectangle |y| <= delta, |z| <= eta and whose depth |x| - eps behind the
    mouth lies in (r1, r2]; default radii (0, eta/2), widened to the first
    bulk layer if that is deeper.
    mode 'shell': bulk cells whose distance to the mouth rectangle lies in
    [r1, r2]; default radii (2, 4) * max(delta, eta).
    """
    u = np.asarray(field, float)
    nk = grid.neck
    c = grid.cell_centres
    depth = np.abs(c[:, 0]) - nk.eps
    dy = np.maximum(np.abs(c[:, 1]) - nk.delta, 0.0)
    dz = np.maximum(np.abs(c[:, 2]) - nk.eta, 0.0)
    bulk = grid.region != Region.NECK
    if mode == "footprint":
        if shell_radii is None:
            # reach at least the first bulk layer when eta is below the spacing
            foot = bulk & (dy == 0) & (dz == 0)
            first = float(depth[foot].min()) if foot.any() else 0.0
            r1, r2 = 0.0, max(0.5 * nk.eta, first)
        else:
            r1, r2 = shell_radii
    elif mode == "shell":
        h = max(nk.delta, nk.eta)
        r1, r2 = (2 * h, 4 * h) if shell_radii is None else shell_radii
    else:
        raise ValueError(f"unknown plateau mode {mode!r}")
    if not 0 <= r1 < r2:
        raise ValueError(f"need 0 <= r1 < r2, got {r1}, {r2}")
    if r2 > grid.bulk.r0:
        raise ValueError("plateau radii must lie inside the flat bulk region")
    tol = 1e-12 * max(r2, nk.eps)
    if mode == "footprint":
        near = (dy == 0) & (dz == 0) & (depth > r1 + tol) & (depth <= r2 + tol)
    else:
        dist = np.sqrt(np.maximum(depth, 0.0) ** 2 + dy**2 + dz**2)
        near = (dist >= r1 - tol) & (dist <= r2 + tol)
    out = []
    for side in (Region.LEFT, Region.RIGHT):
        sel = near & (grid.region == side)
        if not sel.any():
            raise NeckwallError(f"no {side.name.lower()} bulk cells in plateau window [{r1:g}, {r2:g}]")
        out.append(float(np.average(u[sel], weights=grid.volumes[sel])))
    return tuple(out)


@dataclass
class SweepRow:
    eps: float
    delta: float
    eta: float
    total: float = math.nan
    neck: float = math.nan
    outside: float = math.nan
    neck_fraction: float = math.nan
    rate: float = math.nan
    scaled_total: float = math.nan
    scaled_neck: float = math.nan
    scaled_outside: float = math.nan
    m1: float = math.nan
    m2: float = math.nan
    profile_deviation: float = math.nan
    n_cells: int = 0
    iterations: int = 0
    reason: str = ""
    seconds: float = 0.0
    status: str = "ok"
    degenerate: bool = False
    error: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json_dict(self) -> dict:
        """to_dict with NaN replaced by None."""
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> "SweepRow":
        kw = {}
        for name, f in cls.__dataclass_fields__.items():
            if name not in d:
                continue
            v = d[name]
            if v is None or v == "":
                v = math.nan if f.type == "float" else v
            elif f.type == "int":
                v = int(v)
            elif f.type == "bool":
                v = v if isinstance(v, bool) else str(v).lower() == "true"
            elif f.type == "float":
                v = float(v)
            kw[name] = v
        return cls(**kw)


SWEEP_COLUMNS = tuple(SweepRow.__dataclass_fields__)


@dataclass
class SweepConfig:
    bulk: BulkSpec = field(default_factory=BulkSpec)
    policy: ResolutionPolicy = field(default_factory=ResolutionPolicy)
    options: SolveOptions = field(default_factory=SolveOptions)
    plateau_radii: tuple[float, float] | None = None
    plateau_mode: str = "footprint"


def analyse_field(grid, field, breakdown, report, alpha, beta, row: SweepRow, config: SweepConfig):
    """Fill the energy, plateau and profile columns of ``row``."""
    nk = grid.neck
    row.total, row.neck, row.outside = breakdown.total, breakdown.neck, breakdown.outside
    if breakdown.total > 0:
        row.neck_fraction = breakdown.neck / breakdown.total
    else:
        row.degenerate = True
    if report.rate is not None:
        row.rate = rate_value(report.rate, nk)
        row.scaled_total = row.rate * row.total
        row.scaled_neck = row.rate * row.neck
    if report.rate_outside is not None:
        row.scaled_outside = rate_value(report.rate_outside, nk) * row.outside
    if not grid.neck_only:
        row.m1, row.m2 = plateau_values(grid, field, config.plateau_radii, config.plateau_mode)
    limit = limit_profile(report, alpha, beta)
    if limit is not None:
        s, v = neck_profile(grid, field)
        jump = beta - alpha
        dev = np.max(np.abs(v - limit(s)))
        row.profile_deviation = float(dev / jump) if jump > 0 else float(dev)
    return row


def sweep(
    family: ScalingFamily,
    eps_list,
    bulk: BulkSpec | None = None,
    potential: DoubleWell | None = None,
    options: SolveOptions | None = None,
    policy: ResolutionPolicy | None = None,
    alpha: float | None = None,
    beta: float | None = None,
    config: SweepConfig | None = None,
    keep_fields: bool = False,
):
    """Minimise from the piecewise-constant state at each eps.

    Failures in one row are recorded in its ``status``/``error`` and the
    sweep continues.  With ``keep_fields`` the (grid, field) pairs are
    returned alongside the rows.
    """
    cfg = config or SweepConfig()
    if bulk is not None:
        cfg.bulk = bulk
    if options is not None:
        cfg.options = options
    if policy is not None:
        cfg.policy = policy
    if potential is not None:
        alpha, beta = potential.alpha, potential.beta
    alpha = 0.0 if alpha is None else alpha
    beta = 1.0 if beta is None else beta
    report = classify(family)
    rows, fields = [], []
    for eps in eps_list:
        nk = family.neck(eps)
        row = SweepRow(eps, nk.delta, nk.eta)
        t0 = time.perf_counter()
        try:
            grid = rasterize(build_domain(nk, cfg.bulk), cfg.policy)
            row.n_cells = grid.n_active
            u0 = initial_state(grid, alpha, beta)
            if alpha == beta:
                u, b = u0, energy(grid, u0, None)
            else:
                res = minimise(grid, potential, u0, cfg.options)
                u, b = res.field, res.breakdown
                row.iterations = res.diagnostics.iterations
                row.reason = res.diagnostics.reason
            analyse_field(grid, u, b, report, alpha, beta, row, cfg)
            if keep_fields:
                fields.append((grid, u))
        except (NeckwallError, ValueError) as exc:
            row.status = "failed"
            row.error = f"{type(exc).__name__}: {exc}"
            log.warning("sweep row eps=%g failed: %s", eps, row.error)
            if keep_fields:
                fields.append(None)
        row.seconds = time.perf_counter() - t0
        log.info("eps=%g: %d cells, scaled_total=%.4g, %.1fs", eps, row.n_cells, row.scaled_total, row.seconds)
        rows.append(row)
    return (rows, fields) if keep_fields else rows


def fit_scaling(rows, rate: str) -> tuple[float, float, float]:
    """Least-squares fit ln(total) = s ln(1/rho) + ln(kappa).

    Returns (s, kappa, rms residual).  s near 1 and kappa near the predicted
    constant indicate agreement with the rate ``rate``.
    """
    pts = [r for r in rows if r.status == "ok" and r.total > 0]
    if len(pts) < 3:
        raise ValueError("fit_scaling needs at least 3 rows with positive energy")
    rho = np.array([rate_value(rate, NeckParams(r.eps, r.delta, r.eta)) for r in pts])
    if np.ptp(np.log(rho)) == 0:
        raise ValueError("degenerate regression: all rates are equal")
    x = -np.log(rho)
    y = np.log([r.total for r in pts])
    A = np.stack([x, np.ones_like(x)], axis=1)
    (s, c), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ np.array([s, c])
    return float(s), float(math.exp(c)), float(np.sqrt(np.mean(resid**2)))
