"""Brute-force reference computations used to check the closed forms."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .competitors import ProlateShell, prolate_jacobian_det
from .geometry import NeckParams


@dataclass(frozen=True)
class QuadratureSpec:
    n_mu: int = 2000
    n_nu: int = 2000

    def __post_init__(self):
        if self.n_mu < 16 or self.n_nu < 16:
            raise ValueError("quadrature needs at least 16 nodes per direction")


def quad_shell_energy(shell: ProlateShell, spec: QuadratureSpec | None = None) -> float:
    """Half-shell Dirichlet energy by midpoint quadrature in (mu, nu).

    Integrates |grad h|^2 / 2 |det J| with the gradient written out in
    prolate coordinates; the phi integral is the factor 2 pi, halved for a
    half shell.  Open midpoint nodes avoid nu in {0, pi} and mu = 2m.
    """
    spec = QuadratureSpec() if spec is None else spec
    jump = shell.v_outer - shell.v_inner
    if jump == 0:
        return 0.0
    c = jump / math.log(math.tanh(shell.M) / math.tanh(shell.m))
    a = shell.a
    # nodes uniform in ln(mu): the integrand behaves like 1/mu near a thin
    # inner ellipsoid, which a uniform mu grid resolves poorly
    lo, hi = math.log(2 * shell.m), math.log(2 * shell.M)
    dt = (hi - lo) / spec.n_mu
    dnu = math.pi / spec.n_nu
    mu = np.exp(lo + (np.arange(spec.n_mu) + 0.5) * dt)
    nu = (np.arange(spec.n_nu) + 0.5) * dnu
    sh, ch = np.sinh(mu)[:, None], np.cosh(mu)[:, None]
    sn, cn = np.sin(nu)[None, :], np.cos(nu)[None, :]
    grad2 = (ch**2 * sn**2 + sh**2 * cn**2) / (sh**2 * (sn**2 + sh**2) ** 2)
    jac = np.abs(prolate_jacobian_det(a, mu[:, None], nu[None, :]))
    integrand = c**2 / (2 * a**2) * grad2 * jac * mu[:, None]  # dmu = mu dt
    return float(2 * math.pi * integrand.sum() * dt * dnu / 2)


def solve_1d_chain(n: int, left_value: float, right_value: float) -> np.ndarray:
    """Cell values of the discrete 1D Dirichlet problem with the end values
    held fixed: the tridiagonal system  -u[i-1] + 2u[i] - u[i+1] = 0."""
    if n < 2:
        raise ValueError("chain needs at least two nodes")
    from scipy.linalg import solve_banded

    u = np.empty(n)
    u[0], u[-1] = left_value, right_value
    k = n - 2
    if k == 0:
        return u
    ab = np.zeros((3, k))
    ab[0, 1:] = -1.0
    ab[1, :] = 2.0
    ab[2, :-1] = -1.0
    rhs = np.zeros(k)
    rhs[0] += left_value
    rhs[-1] += right_value
    u[1:-1] = solve_banded((1, 1), ab, rhs)
    return u


def chain_energy(profile: np.ndarray, half_length: float = 1.0) -> float:
    """(1/2) int v'^2 of the piecewise-linear interpolant on [-L, L]."""
    h = 2 * half_length / (len(profile) - 1)
    return 0.5 * float(np.sum(np.diff(profile) ** 2)) / h


def grid_search_AB(neck: NeckParams, alpha: float, beta: float, n: int = 401) -> tuple[float, float]:
    """Exhaustive minimisation of the asymptotic mixed energy over an n x n
    grid on [alpha, beta]^2 restricted to A <= B."""
    if n < 100:
        raise ValueError("grid search needs n >= 100")
    L = abs(math.log(neck.eta / neck.delta))
    t = np.linspace(alpha, beta, n)
    A, B = np.meshgrid(t, t, indexing="ij")
    E = 2 * math.pi * neck.delta / L * ((A - alpha) ** 2 + (B - beta) ** 2) + (
        neck.delta * neck.eta / neck.eps
    ) * (B - A) ** 2
    E = np.where(A <= B, E, np.inf)
    i, j = np.unravel_index(np.argmin(E), E.shape)
    return float(t[i]), float(t[j])
