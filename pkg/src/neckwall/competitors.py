"""Explicit competitor fields: affine in the neck, prolate harmonic shells
in the bulks, and their mixture.

Prolate spheroidal coordinates (mu, nu, phi) with foci (0, +-a, 0):

    x = a sinh(mu) sin(nu) cos(phi)
    y = a cosh(mu) cos(nu)
    z = a sinh(mu) sin(nu) sin(phi)

Level sets of mu are confocal ellipsoids elongated along y.  The shell
profile used here depends on mu alone and is harmonic:
h(mu) = c ln(tanh(mu/2)) + const.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RegimeViolationError, ShellFitError
from .geometry import DumbbellGrid, NeckParams, Region


DEFAULT_R0 = 0.5  # flat radius of the default unit bulk


def prolate_map(a, mu, nu, phi):
    a, mu, nu, phi = (np.asarray(v, float) for v in (a, mu, nu, phi))
    s = a * np.sinh(mu) * np.sin(nu)
    return s * np.cos(phi), a * np.cosh(mu) * np.cos(nu), s * np.sin(phi)


def prolate_jacobian_det(a, mu, nu):
    a, mu, nu = (np.asarray(v, float) for v in (a, mu, nu))
    return -(a**3) * np.sinh(mu) * np.sin(nu) * (np.sin(nu) ** 2 + np.sinh(mu) ** 2)


def prolate_mu(a: float, x, y, z, tol: float = 1e-12, mu_max: float = 40.0) -> np.ndarray:
    """Invert the map for mu by bisection on

        y^2 / (a cosh mu)^2 + (x^2 + z^2) / (a sinh mu)^2 = 1,

    whose left side decreases strictly in mu.  Points on the focal segment
    return mu = 0.
    """
    x, y, z = np.broadcast_arrays(*(np.asarray(v, float) for v in (x, y, z)))
    y2 = (y / a) ** 2
    rho2 = (x * x + z * z) / a**2
    lo = np.zeros(x.shape)
    hi = np.full(x.shape, mu_max)
    n_iter = int(math.ceil(math.log2(mu_max / tol))) + 1
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(n_iter):
            mid = 0.5 * (lo + hi)
            f = y2 / np.cosh(mid) ** 2 + rho2 / np.sinh(mid) ** 2 - 1.0
            outside = f > 0
            lo = np.where(outside, mid, lo)
            hi = np.where(outside, hi, mid)
    return 0.5 * (lo + hi)


def fit_shell_to_neck(neck: NeckParams) -> tuple[float, float]:
    """(a, m) with a sinh(2m) = 2 eta and a cosh(2m) = 2 delta, so the inner
    ellipsoid mu = 2m contains the neck cross-section."""
    if neck.eta >= neck.delta:
        raise RegimeViolationError("shell fit needs eta < delta")
    a = 2.0 * math.sqrt(neck.delta**2 - neck.eta**2)
    m = 0.5 * math.atanh(neck.eta / neck.delta)
    return a, m


@dataclass(frozen=True)
class ProlateShell:
    """Harmonic half shell between mu = 2m (value v_inner) and mu = 2M (v_outer)."""

    a: float
    m: float
    M: float
    v_inner: float = 0.0
    v_outer: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ShellFitError("focal half-distance a must be positive")
        if not 0 < self.m < self.M:
            raise ShellFitError(f"need 0 < m < M, got m={self.m}, M={self.M}")

    @property
    def log_ratio(self) -> float:
        return math.log(math.tanh(self.M) / math.tanh(self.m))

    @property
    def outer_radius(self) -> float:
        return self.a * math.cosh(2 * self.M)

    def fits(self, r0: float) -> bool:
        return self.outer_radius < r0


def default_outer_M(a: float, r0: float) -> float:
    """M with a cosh(2M) = r0/2."""
    if r0 / 2 <= a:
        raise ShellFitError(f"flat radius {r0} too small for focal distance {a}")
    return 0.5 * math.acosh(r0 / (2 * a))


def shell_profile(shell: ProlateShell, mu):
    mu = np.asarray(mu, float)
    lo, hi = 2 * shell.m, 2 * shell.M
    if np.any(mu < lo * (1 - 1e-12)) or np.any(mu > hi * (1 + 1e-12)):
        raise ValueError(f"mu outside [{lo}, {hi}]")
    frac = np.log(np.tanh(mu / 2) / math.tanh(shell.m)) / shell.log_ratio
    return shell.v_inner + (shell.v_outer - shell.v_inner) * frac


def _shell_values(shell: ProlateShell, mu):
    """shell_profile extended by the boundary values inside and outside."""
    mu = np.clip(np.asarray(mu, float), 2 * shell.m, 2 * shell.M)
    return shell_profile(shell, mu)


def half_shell_energy(shell: ProlateShell) -> float:
    """Dirichlet energy pi a (v_outer - v_inner)^2 / ln(tanh M / tanh m) of a half shell."""
    return math.pi * shell.a * (shell.v_outer - shell.v_inner) ** 2 / shell.log_ratio


def affine_energy(neck: NeckParams, A: float, B: float) -> float:
    return neck.delta * neck.eta * (B - A) ** 2 / neck.eps


@dataclass(frozen=True)
class MixedChoice:
    A: float
    B: float

    def check(self, alpha: float, beta: float) -> None:
        if not alpha <= self.A <= self.B <= beta:
            raise ValueError(f"need alpha <= A <= B <= beta, got A={self.A}, B={self.B}")


def _log_gap(neck: NeckParams) -> float:
    if neck.eta >= neck.delta:
        raise RegimeViolationError("needs eta < delta")
    return abs(math.log(neck.eta / neck.delta))


def optimal_AB(neck: NeckParams, alpha: float, beta: float) -> MixedChoice:
    """Minimiser of the asymptotic mixed energy

        2 pi delta / L [(A-alpha)^2 + (B-beta)^2] + delta eta / eps (B-A)^2,

    with L = |ln(eta/delta)|."""
    w = math.pi / _log_gap(neck)
    v = neck.eta / neck.eps
    mid = 0.5 * (alpha + beta)
    return MixedChoice((w * alpha + v * mid) / (w + v), (w * beta + v * mid) / (w + v))


def mixed_energy(
    neck: NeckParams,
    choice: MixedChoice,
    alpha: float,
    beta: float,
    M: float | None = None,
    r0: float | None = None,
    asymptotic: bool = False,
) -> float:
    """Energy of the mixed competitor.

    Exact form: pi a [(A-alpha)^2 + (B-beta)^2] / ln(tanh M/tanh m) + affine part,
    with (a, m) fitted to the neck and M given or derived from ``r0``.
    Asymptotic form: a -> 2 delta, ln(tanh M/tanh m) -> |ln(eta/delta)|.
    """
    A, B = choice.A, choice.B
    neck_part = affine_energy(neck, A, B)
    jumps = (A - alpha) ** 2 + (B - beta) ** 2
    if asymptotic:
        return 2 * math.pi * neck.delta / _log_gap(neck) * jumps + neck_part
    a, m = fit_shell_to_neck(neck)
    if M is None:
        M = default_outer_M(a, DEFAULT_R0 if r0 is None else r0)
    shell = ProlateShell(a, m, M)
    return math.pi * a * jumps / shell.log_ratio + neck_part


def competitor_shell(neck: NeckParams, r0: float, M: float | None = None) -> ProlateShell:
    a, m = fit_shell_to_neck(neck)
    M = default_outer_M(a, r0) if M is None else M
    shell = ProlateShell(a, m, M)
    if not shell.fits(r0):
        raise ShellFitError(
            f"outer ellipsoid a cosh(2M)={shell.outer_radius:g} does not fit in r0={r0:g}"
        )
    return shell


def build_competitor_field(
    grid: DumbbellGrid,
    kind: str,
    alpha: float,
    beta: float,
    A: float | None = None,
    B: float | None = None,
    M: float | None = None,
) -> np.ndarray:
    """Sample a competitor at cell centres.

    kind 'affine': A / affine / B.  kind 'shell': the neck at (alpha+beta)/2,
    harmonic half shells to alpha and beta.  kind 'mixed': shells from A and B
    to alpha and beta plus the affine neck.  Missing A, B default to the
    optimal pair (mixed) or to (alpha, beta) (affine).
    """
    neck = grid.neck
    x = grid.cell_centres[:, 0]
    reg = grid.region
    if kind == "affine":
        A = alpha if A is None else A
        B = beta if B is None else B
        u = np.where(reg == Region.LEFT, A, B).astype(float)
        nk = reg == Region.NECK
        u[nk] = (B - A) / (2 * neck.eps) * x[nk] + 0.5 * (A + B)
        return u
    if kind == "shell":
        A = B = 0.5 * (alpha + beta)
    elif kind == "mixed":
        if A is None or B is None:
            opt = optimal_AB(neck, alpha, beta)
            A = opt.A if A is None else A
            B = opt.B if B is None else B
    else:
        raise ValueError(f"unknown competitor kind {kind!r}")
    MixedChoice(A, B).check(alpha, beta)
    shell = competitor_shell(neck, grid.bulk.r0, M)
    c = grid.cell_centres
    u = np.empty(grid.n_active)
    nk = reg == Region.NECK
    u[nk] = (B - A) / (2 * neck.eps) * x[nk] + 0.5 * (A + B)
    for side, shift, inner, outer in ((Region.LEFT, neck.eps, A, alpha), (Region.RIGHT, -neck.eps, B, beta)):
        sel = reg == side
        mu = prolate_mu(shell.a, c[sel, 0] + shift, c[sel, 1], c[sel, 2])
        prof = ProlateShell(shell.a, shell.m, shell.M, inner, outer)
        u[sel] = _shell_values(prof, mu)
    return u
