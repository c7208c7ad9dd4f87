"""Dumbbell domains (two box bulks joined by a thin box neck) and their
rasterisation onto masked, anisotropically graded tensor grids.

Coordinates: x runs along the neck, the neck occupies
[-eps, eps] x [-delta, delta] x [-eta, eta], and each bulk is a cube of side
L attached flush to the neck mouth at x = -eps (left) or x = +eps (right).

Grid layout along x puts cell *centres* on the mouth planes x = +-eps, so a
profile that is affine in the neck and constant in the bulks is reproduced
exactly by the face-difference energy.  Along y and z the neck boundaries
coincide with cell faces.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import ndimage

from .errors import CellBudgetError, GeometryError, RegimeViolationError


class Region(enum.IntEnum):
    LEFT = 0
    NECK = 1
    RIGHT = 2


REGION_NAMES = {Region.LEFT: "left_bulk", Region.NECK: "neck", Region.RIGHT: "right_bulk"}


@dataclass(frozen=True)
class NeckParams:
    """Half-dimensions of the neck box."""

    eps: float
    delta: float
    eta: float

    def __post_init__(self):
        for name in ("eps", "delta", "eta"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise GeometryError(f"{name} must be positive and finite, got {v!r}")
        if self.eta > self.delta:
            raise RegimeViolationError(
                f"eta={self.eta} exceeds delta={self.delta}; swap the y and z axes"
            )
        if self.eta == self.delta:
            warnings.warn("eta == delta: the neck cross-section is square", stacklevel=3)

    @property
    def volume(self) -> float:
        return 8.0 * self.eps * self.delta * self.eta

    @property
    def square(self) -> bool:
        return self.eta == self.delta


@dataclass(frozen=True)
class BulkSpec:
    """Box bulks of side ``half_extent`` (L).

    ``flat_radius`` is the radius about the neck mouth inside which the bulk
    wall is flat; for a box it can be anything up to L/2 (the default).
    """

    half_extent: float = 1.0
    flat_radius: float | None = None

    def __post_init__(self):
        if not self.half_extent > 0:
            raise GeometryError("half_extent must be positive")
        if self.flat_radius is not None and not 0 < self.flat_radius <= self.half_extent / 2:
            raise GeometryError("flat_radius must lie in (0, L/2]")

    @property
    def r0(self) -> float:
        return self.half_extent / 2 if self.flat_radius is None else self.flat_radius

    def check(self, neck: NeckParams) -> None:
        L = self.half_extent
        if L < 20.0 * max(neck.delta, neck.eta):
            raise GeometryError(
                f"bulk side L={L} must be at least 20*max(delta, eta)="
                f"{20 * max(neck.delta, neck.eta):g}"
            )
        if max(neck.delta, neck.eta) >= self.r0:
            raise GeometryError("neck cross-section does not fit inside the flat radius")


@dataclass(frozen=True)
class Domain:
    """Point-membership description of the closed dumbbell."""

    neck: NeckParams
    bulk: BulkSpec
    neck_only: bool = False

    def region_of(self, x, y, z, tol: float = 0.0) -> np.ndarray:
        """Region code per point (-1 outside).  Neck wins on the mouth planes."""
        x, y, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(z, float))
        e, d, h = self.neck.eps, self.neck.delta, self.neck.eta
        L = self.bulk.half_extent
        out = np.full(x.shape, -1, dtype=np.int8)
        if not self.neck_only:
            in_box = (np.abs(y) <= L / 2 + tol) & (np.abs(z) <= L / 2 + tol)
            out[in_box & (x <= -e + tol) & (x >= -e - L - tol)] = Region.LEFT
            out[in_box & (x >= e - tol) & (x <= e + L + tol)] = Region.RIGHT
        in_neck = (np.abs(x) <= e + tol) & (np.abs(y) <= d + tol) & (np.abs(z) <= h + tol)
        out[in_neck] = Region.NECK
        return out

    def contains(self, x, y, z, tol: float = 0.0) -> np.ndarray:
        return self.region_of(x, y, z, tol) >= 0

    def volumes(self) -> dict[str, float]:
        L = 0.0 if self.neck_only else self.bulk.half_extent
        return {"left_bulk": L**3, "neck": self.neck.volume, "right_bulk": L**3}


def build_domain(neck: NeckParams, bulk: BulkSpec | None = None, neck_only: bool = False) -> Domain:
    bulk = BulkSpec() if bulk is None else bulk
    if not neck_only:
        bulk.check(neck)
    return Domain(neck, bulk, neck_only)


@dataclass(frozen=True)
class ResolutionPolicy:
    """How finely to resolve the neck and how fast to coarsen away from it.

    ``min_cells`` cells span each of the half-width delta and half-thickness
    eta; ``neck_cells_x`` intervals span the half-length eps.  Away from the
    neck, widths grow geometrically by ``growth`` up to ``max_spacing``
    (default L/8).
    """

    min_cells: int = 8
    neck_cells_x: int = 12
    growth: float = 1.25
    max_spacing: float | None = None
    max_cells: int = 2_000_000

    def __post_init__(self):
        if self.min_cells < 1 or self.neck_cells_x < 1:
            raise GeometryError("resolution policy must request at least one cell")
        if self.growth < 1.0:
            raise GeometryError("growth factor must be >= 1")


def _graded_widths(first: float, length: float, growth: float, max_width: float) -> np.ndarray:
    """Cell widths covering ``length`` exactly, starting near ``first``."""
    if length <= 0:
        return np.zeros(0)
    widths = []
    total = 0.0
    w = first
    while total + w < length * (1 - 1e-12):
        widths.append(w)
        total += w
        w = min(w * growth, max_width)
    rest = length - total
    if widths and rest < 0.5 * widths[-1]:
        widths[-1] += rest
    else:
        widths.append(rest)
    return np.asarray(widths)


def _mirror_axis(core_edges: np.ndarray, outer: np.ndarray) -> np.ndarray:
    """Edges of a symmetric axis: ``core_edges`` (ascending, symmetric) extended
    by the widths ``outer`` on both sides."""
    right = core_edges[-1] + np.cumsum(outer)
    return np.concatenate([-right[::-1], core_edges, right])


@dataclass
class DumbbellGrid:
    """Masked tensor grid.  Cell-centred values live on active cells only.

    ``centres``/``widths`` hold per-axis arrays; ``mask`` is the 3D occupancy
    (C order, axes x, y, z); ``region`` labels each active cell.
    """

    neck: NeckParams
    bulk: BulkSpec
    centres: tuple[np.ndarray, np.ndarray, np.ndarray]
    widths: tuple[np.ndarray, np.ndarray, np.ndarray]
    mask: np.ndarray
    region: np.ndarray
    neck_only: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.mask.shape

    @property
    def n_active(self) -> int:
        return int(self.region.size)

    @property
    def spacing(self) -> tuple[float, float, float]:
        """Finest spacing per axis (the neck spacing)."""
        return tuple(float(w.min()) for w in self.widths)

    @cached_property
    def flat_index(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    @cached_property
    def index(self) -> np.ndarray:
        """3D array mapping each cell to its active index (-1 if inactive)."""
        idx = np.full(self.mask.shape, -1, dtype=np.int64)
        idx.ravel()[self.flat_index] = np.arange(self.n_active)
        return idx

    @cached_property
    def ijk(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.unravel_index(self.flat_index, self.mask.shape)

    @cached_property
    def cell_centres(self) -> np.ndarray:
        i, j, k = self.ijk
        return np.stack([self.centres[0][i], self.centres[1][j], self.centres[2][k]], axis=1)

    @cached_property
    def volumes(self) -> np.ndarray:
        i, j, k = self.ijk
        return self.widths[0][i] * self.widths[1][j] * self.widths[2][k]

    @cached_property
    def faces(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Interior faces as (lower cell, upper cell, area / centre distance).

        Faces touching an inactive cell are omitted, which is the homogeneous
        Neumann closure.
        """
        lo_all, hi_all, coef_all = [], [], []
        idx = self.index
        for axis in range(3):
            sl_lo = [slice(None)] * 3
            sl_hi = [slice(None)] * 3
            sl_lo[axis] = slice(None, -1)
            sl_hi[axis] = slice(1, None)
            a = idx[tuple(sl_lo)]
            b = idx[tuple(sl_hi)]
            both = (a >= 0) & (b >= 0)
            dist = np.diff(self.centres[axis])
            others = [ax for ax in range(3) if ax != axis]
            shape = [1, 1, 1]
            shape[axis] = dist.size
            d3 = dist.reshape(shape)
            w1 = self.widths[others[0]].reshape([-1 if ax == others[0] else 1 for ax in range(3)])
            w2 = self.widths[others[1]].reshape([-1 if ax == others[1] else 1 for ax in range(3)])
            coef = np.broadcast_to(w1 * w2 / d3, a.shape)
            lo_all.append(a[both])
            hi_all.append(b[both])
            coef_all.append(coef[both])
        return np.concatenate(lo_all), np.concatenate(hi_all), np.concatenate(coef_all)

    def region_volumes(self) -> dict[str, float]:
        vols = np.bincount(self.region, weights=self.volumes, minlength=3)
        return {REGION_NAMES[r]: float(vols[r]) for r in Region}

    def is_connected(self) -> bool:
        _, n = ndimage.label(self.mask, structure=ndimage.generate_binary_structure(3, 1))
        return n == 1

    def x_slabs(self) -> np.ndarray:
        """x-index of each active cell."""
        return self.ijk[0]


def _axis_edges(policy: ResolutionPolicy, neck: NeckParams, bulk: BulkSpec, neck_only: bool):
    L = bulk.half_extent
    max_w = policy.max_spacing if policy.max_spacing is not None else L / 8
    n = policy.neck_cells_x
    hx = neck.eps / n
    # neck centres sit at eps*(k - n)/n, k = 0..2n, so the mouths are centres
    x_core_centres = neck.eps * ((np.arange(2 * n + 1) - n) / n)
    x_core = np.concatenate([x_core_centres - hx / 2, [x_core_centres[-1] + hx / 2]])
    axes = []
    if neck_only:
        axes.append(x_core)
    else:
        outer = _graded_widths(hx * policy.growth, L - hx / 2, policy.growth, max_w)
        axes.append(_mirror_axis(x_core, outer))
    for half, half_box in ((neck.delta, L / 2), (neck.eta, L / 2)):
        m = policy.min_cells
        h = half / m
        core = half * np.arange(-m, m + 1) / m
        if neck_only:
            axes.append(core)
        else:
            outer = _graded_widths(h * policy.growth, half_box - half, policy.growth, max_w)
            axes.append(_mirror_axis(core, outer))
    return axes


def rasterize(domain: Domain, policy: ResolutionPolicy | None = None) -> DumbbellGrid:
    """Rasterise ``domain``; a cell is active iff its centre is in the closed domain."""
    policy = ResolutionPolicy() if policy is None else policy
    neck, bulk = domain.neck, domain.bulk
    edges = _axis_edges(policy, neck, bulk, domain.neck_only)
    centres = tuple(0.5 * (e[1:] + e[:-1]) for e in edges)
    widths = tuple(np.diff(e) for e in edges)
    # mouth-plane centres must be exact so that they classify as neck
    n = policy.neck_cells_x
    mid = (centres[0].size - 1) // 2
    xc = centres[0].copy()
    xc[mid - n: mid + n + 1] = neck.eps * ((np.arange(2 * n + 1) - n) / n)
    centres = (xc, centres[1], centres[2])

    total = centres[0].size * centres[1].size * centres[2].size
    if total > 50 * policy.max_cells:
        raise CellBudgetError(f"bounding grid has {total} cells")
    tol = 1e-9 * min(w.min() for w in widths)
    reg = domain.region_of(
        centres[0][:, None, None], centres[1][None, :, None], centres[2][None, None, :], tol
    )
    mask = reg >= 0
    n_active = int(mask.sum())
    if n_active == 0:
        raise GeometryError("rasterisation produced no active cells")
    if n_active > policy.max_cells:
        raise CellBudgetError(f"{n_active} active cells exceed the cap of {policy.max_cells}")
    return DumbbellGrid(
        neck=neck,
        bulk=bulk,
        centres=centres,
        widths=widths,
        mask=mask,
        region=reg[mask].astype(np.int8),
        neck_only=domain.neck_only,
    )


def box_grid(shape, spacing=(1.0, 1.0, 1.0), mask=None) -> DumbbellGrid:
    """A plain (optionally masked) box grid, labelled entirely as neck.

    Used for small consistency checks that need no dumbbell geometry.
    Each entry of ``spacing`` is a scalar or an array of per-cell widths.
    """
    shape = tuple(int(s) for s in shape)
    if min(shape) < 1:
        raise GeometryError("box grid needs at least one cell per axis")
    widths = tuple(np.broadcast_to(np.asarray(h, float), (n,)).copy() for n, h in zip(shape, spacing))
    if any(np.any(w <= 0) for w in widths):
        raise GeometryError("box grid widths must be positive")
    centres = tuple(np.cumsum(w) - w / 2 for w in widths)
    mask = np.ones(shape, bool) if mask is None else np.asarray(mask, bool)
    if not mask.any():
        raise GeometryError("box grid mask has no active cells")
    ext = [float(w.sum()) / 2 for w in widths]
    neck = NeckParams(ext[0], max(ext[1], ext[2]), min(ext[1], ext[2]))
    return DumbbellGrid(
        neck=neck,
        bulk=BulkSpec(),
        centres=centres,
        widths=widths,
        mask=mask,
        region=np.full(int(mask.sum()), Region.NECK, dtype=np.int8),
        neck_only=True,
    )
