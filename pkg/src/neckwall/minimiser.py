"""Constrained descent for local minimisers of the discrete energy.

The iteration is preconditioned projected gradient descent

    u+ = P_B( u - t K^{-1} grad E(u) )

with an Armijo backtracking line search seeded by a Barzilai-Borwein step,
where P_B clamps values to [alpha - 1, beta + 1] and, if a ball radius d is
given, radially projects onto the L2 ball of radius d about the initial
piecewise-constant state.  K is a fixed SPD metric: the diagonal of the
Hessian bound ("jacobi") or one algebraic-multigrid V-cycle on the Dirichlet
matrix plus a mass shift ("amg", a Sobolev-gradient metric).  Every accepted
step decreases the energy.  The line search uses the exact Taylor form of
the energy difference, so descent stays measurable down to the roundoff
level of the field rather than that of the total energy.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .energy import (
    EnergyBreakdown,
    check_field,
    dirichlet_diagonal,
    dirichlet_matrix,
    energy,
    energy_and_gradient,
    energy_difference,
    energy_gradient,
)
from .errors import NoDescent, NonFiniteEnergy
from .geometry import DumbbellGrid, Region
from .potential import DoubleWell

log = logging.getLogger(__name__)

# callables invoked with the Diagnostics of every finished solve
observers: list = []


@dataclass
class SolveOptions:
    max_iters: int = 50_000
    grad_tol: float | None = None  # default 1e-7 (beta - alpha)
    energy_tol: float = 0.0
    energy_window: int = 10
    ball_radius: float | None = None
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 60
    spectral: bool = True
    preconditioner: str = "jacobi"
    clamp: bool = True

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")
        if self.grad_tol is not None and not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.energy_tol < 0:
            raise ValueError("energy_tol must be non-negative")
        if self.ball_radius is not None and not self.ball_radius > 0:
            raise ValueError("ball_radius must be positive")
        if not 0 < self.backtrack < 1 or not 0 < self.armijo_c < 1:
            raise ValueError("line search parameters must lie in (0, 1)")
        if self.preconditioner not in ("jacobi", "amg", "none"):
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")


@dataclass
class Diagnostics:
    iterations: int
    grad_norm: float
    reason: str
    energies: list = field(default_factory=list, repr=False)
    ball_radius: float | None = None
    backtracks: int = 0

    def monotone(self) -> bool:
        e = np.asarray(self.energies)
        return bool(np.all(np.diff(e) <= 0.0))

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "reason": self.reason,
            "ball_radius": self.ball_radius,
            "backtracks": self.backtracks,
            "initial_energy": self.energies[0] if self.energies else None,
            "final_energy": self.energies[-1] if self.energies else None,
        }


@dataclass
class SolveResult:
    field: np.ndarray
    breakdown: EnergyBreakdown
    diagnostics: Diagnostics

    def __iter__(self):
        return iter((self.field, self.breakdown, self.diagnostics))


def initial_state(grid: DumbbellGrid, alpha: float, beta: float) -> np.ndarray:
    """alpha on the left bulk, beta on the right bulk, their mean in the neck."""
    lut = np.array([alpha, 0.5 * (alpha + beta), beta])
    return lut[grid.region]


def l2_distance(grid: DumbbellGrid, u, v) -> float:
    d = np.asarray(u, float) - np.asarray(v, float)
    return float(np.sqrt(np.sum(d * d * grid.volumes)))


def max_ball_radius(grid: DumbbellGrid, alpha: float, beta: float) -> float:
    """Upper limit min(|alpha| |left|^1/2, |beta| |right|^1/2) on admissible radii."""
    vols = grid.region_volumes()
    return min(abs(alpha) * vols["left_bulk"] ** 0.5, abs(beta) * vols["right_bulk"] ** 0.5)


def el_residual(grid: DumbbellGrid, field, potential: DoubleWell | None) -> float:
    """Max-norm of the energy gradient per unit cell volume."""
    g = energy_gradient(grid, field, potential)
    return float(np.max(np.abs(g) / grid.volumes))


def _jacobi(grid, potential, free):
    d = dirichlet_diagonal(grid)
    if potential is not None:
        d = d + potential.curvature_bound * grid.volumes
    else:
        d = d + 1e-12 * d.max()
    inv = 1.0 / d
    return lambda g: np.where(free, inv * g, 0.0)


def _amg(grid, potential, free):
    import pyamg
    from scipy import sparse

    K = dirichlet_matrix(grid)
    shift = potential.curvature_bound if potential is not None else 0.0
    vol = grid.volumes
    if shift == 0.0 and free.all():
        # pure Neumann Laplacian is singular; a tiny mass term fixes that
        shift = 1e-10 * float(K.diagonal().max() / vol.min())
    K = K + sparse.diags(shift * vol)
    idx = np.flatnonzero(free)
    Kf = K[idx][:, idx].tocsr()
    # pyamg seeds its spectral-radius estimates from the global numpy RNG;
    # pin it for bit-reproducible runs and restore the caller's state
    state = np.random.get_state()
    try:
        np.random.seed(0)
        ml = pyamg.smoothed_aggregation_solver(Kf, symmetry="symmetric", max_coarse=500)
    finally:
        np.random.set_state(state)
    M = ml.aspreconditioner(cycle="V")

    def apply(g):
        out = np.zeros_like(g)
        out[idx] = M.matvec(g[idx])
        return out

    return apply


def minimise(
    grid: DumbbellGrid,
    potential: DoubleWell | None,
    init,
    options: SolveOptions | None = None,
    fixed=None,
    centre=None,
    bounds: tuple[float, float] | None = None,
    callback=None,
) -> SolveResult:
    """Descend from ``init``.

    ``fixed`` marks cells held at their initial values.  ``centre`` is the
    centre of the L2 ball (defaults to ``init``).  ``bounds`` defaults to
    [alpha - 1, beta + 1] from ``potential`` (no clamp without a potential).
    ``callback(k, u, E)`` is called after each accepted step.
    """
    opts = SolveOptions() if options is None else options
    u = check_field(grid, init).copy()
    n = grid.n_active
    free = np.ones(n, bool) if fixed is None else ~np.asarray(fixed, bool)
    u0 = u.copy() if centre is None else check_field(grid, centre)
    if bounds is None and potential is not None and opts.clamp:
        bounds = (potential.alpha - 1.0, potential.beta + 1.0)
    scale = (potential.beta - potential.alpha) if potential is not None else float(np.ptp(u) or 1.0)
    grad_tol = opts.grad_tol if opts.grad_tol is not None else 1e-7 * scale
    vol = grid.volumes
    d = opts.ball_radius

    def project(v):
        if bounds is not None:
            v = np.clip(v, bounds[0], bounds[1])
        if d is not None:
            r = l2_distance(grid, v, u0)
            if r > d:
                v = u0 + (v - u0) * (d / r)
        return np.where(free, v, u)

    if opts.preconditioner == "jacobi":
        precond = _jacobi(grid, potential, free)
    elif opts.preconditioner == "amg":
        precond = _amg(grid, potential, free)
    else:
        precond = lambda g: np.where(free, g / vol, 0.0)  # noqa: E731

    u = project(u)
    E, g = energy_and_gradient(grid, u, potential)
    if not np.isfinite(E):
        raise NonFiniteEnergy("initial energy is not finite", iterate=u)
    energies = [E]
    tau = 1.0
    reason = "max_iters"
    backtracks = 0
    k = 0
    res = float(np.max(np.abs(np.where(free, g, 0.0)) / vol))
    while k < opts.max_iters:
        if res <= grad_tol:
            reason = "grad_tol"
            break
        p = -precond(g)
        t = tau
        for _ in range(opts.max_backtracks):
            u_new = project(u + t * p)
            step = u_new - u
            slope = float(np.dot(g, step))
            if slope < 0:
                dE = energy_difference(grid, u, u_new, potential, grad=g)
                if not np.isfinite(dE):
                    raise NonFiniteEnergy(f"non-finite energy at iteration {k}", iterate=u_new)
                if dE <= opts.armijo_c * slope:
                    break
            t *= opts.backtrack
            backtracks += 1
        else:
            if abs(slope) <= 1e-15 * max(abs(E), 1e-300):
                reason = "stalled"
                break
            raise NoDescent(f"line search failed at iteration {k}", iterate=u)
        _, g_new = energy_and_gradient(grid, u_new, potential)
        E_new = E + dE
        k += 1
        if opts.spectral:
            y = g_new - g
            sy = float(np.dot(step, y))
            sPs = -t * t * float(np.dot(g, p))
            tau = sPs / sy if sy > 0 else 2.0 * t
            tau = min(max(tau, 1e-8), 1e8)
        else:
            tau = 1.0
        if not E_new <= E:  # pragma: no cover - the Armijo rule implies descent
            raise NoDescent(f"accepted step raised the energy at iteration {k}", iterate=u_new)
        u, E, g = u_new, E_new, g_new
        energies.append(E)
        res = float(np.max(np.abs(np.where(free, g, 0.0)) / vol))
        if callback is not None:
            callback(k, u, E)
        w = opts.energy_window
        if opts.energy_tol > 0 and len(energies) > w:
            drop = energies[-w - 1] - E
            if drop <= opts.energy_tol * abs(E):
                reason = "energy_tol"
                break
    log.debug("minimise: %s after %d iterations, residual %.3e", reason, k, res)
    diag = Diagnostics(
        iterations=k, grad_norm=res, reason=reason, energies=energies,
        ball_radius=d, backtracks=backtracks,
    )
    for obs in observers:
        obs(diag)
    return SolveResult(u, energy(grid, u, potential), diag)


def neck_frozen_chain(grid: DumbbellGrid) -> np.ndarray:
    """Mask of the two end slabs of a neck-only grid."""
    i = grid.ijk[0]
    return (grid.region == Region.NECK) & ((i == i.min()) | (i == i.max()))
