import math

import numpy as np
import pytest

from neckwall.competitors import ProlateShell, half_shell_energy, optimal_AB
from neckwall.geometry import NeckParams
from neckwall.oracle import QuadratureSpec, chain_energy, grid_search_AB, quad_shell_energy, solve_1d_chain


def test_quadrature_spec_bounds():
    with pytest.raises(ValueError):
        QuadratureSpec(8, 100)


def test_quadrature_zero_jump():
    assert quad_shell_energy(ProlateShell(1.0, 0.2, 1.0, 0.4, 0.4)) == 0.0


def test_quadrature_example():
    s = ProlateShell(1.0, 0.2, 1.0, 0.0, 1.0)
    exact = math.pi / math.log(math.tanh(1.0) / math.tanh(0.2))
    assert half_shell_energy(s) == pytest.approx(exact, rel=1e-14)
    assert quad_shell_energy(s, QuadratureSpec(2000, 2000)) == pytest.approx(exact, rel=1e-6)


def test_quadrature_second_order():
    s = ProlateShell(0.7, 0.1, 1.5, 0.0, 1.0)
    exact = half_shell_energy(s)
    e1 = abs(quad_shell_energy(s, QuadratureSpec(100, 100)) / exact - 1)
    e2 = abs(quad_shell_energy(s, QuadratureSpec(200, 200)) / exact - 1)
    assert 3.0 < e1 / e2 < 5.0


def test_chain_examples():
    assert np.allclose(solve_1d_chain(11, 0.0, 1.0), np.linspace(0, 1, 11), atol=1e-15)
    flat = solve_1d_chain(7, 0.3, 0.3)
    assert np.allclose(flat, 0.3, rtol=0, atol=1e-15) and chain_energy(flat) < 1e-28
    # (1/2) int_{-1}^{1} v'^2 for v from alpha to beta is (beta - alpha)^2 / 4
    assert chain_energy(solve_1d_chain(50, 0.0, 1.0)) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        solve_1d_chain(1, 0, 1)
    assert solve_1d_chain(2, 0.0, 1.0).tolist() == [0.0, 1.0]


def test_grid_search_examples():
    delta, eta = 0.1, 0.001
    L = abs(math.log(eta / delta))
    nk = NeckParams(eta * L / math.pi, delta, eta)
    A, B = grid_search_AB(nk, 0.0, 1.0, 401)
    assert abs(A - 0.25) <= 1 / 400 and abs(B - 0.75) <= 1 / 400
    A, B = grid_search_AB(NeckParams(1e-8, 0.1, 0.001), 0.0, 1.0, 401)
    assert abs(A - 0.5) <= 1 / 400 and abs(B - 0.5) <= 1 / 400
    A, B = grid_search_AB(NeckParams(1e8, 0.1, 0.001), 0.0, 1.0, 401)
    assert A <= 1 / 400 and B >= 1 - 1 / 400
    with pytest.raises(ValueError):
        grid_search_AB(nk, 0, 1, 50)


def test_grid_search_agrees_with_closed_form():
    nk = NeckParams(0.2, 0.05, 0.004)
    c = optimal_AB(nk, -1.0, 2.0)
    A, B = grid_search_AB(nk, -1.0, 2.0, 301)
    assert abs(A - c.A) <= 3 / 300 and abs(B - c.B) <= 3 / 300
