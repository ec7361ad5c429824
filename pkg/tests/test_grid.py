import numpy as np
import pytest

from slabrt import build_grid, integrate
from slabrt.errors import GridTooSmall, LengthMismatch
from slabrt.grid import barycentric_eval, barycentric_weights, differentiation_matrix


def test_nodes_endpoints_exact(grid64):
    assert grid64.nodes[0] == 0.0
    assert grid64.nodes[-1] == 1.0
    assert np.all(np.diff(grid64.nodes) > 0)


def test_nodes_symmetric(grid64):
    assert np.allclose(grid64.nodes + grid64.nodes[::-1], 1.0, atol=1e-16, rtol=0)


def test_too_small_rejected():
    with pytest.raises(GridTooSmall):
        build_grid(15)


def test_weights_sum_to_one():
    for n in (16, 33, 64, 128):
        g = build_grid(n)
        assert abs(g.w.sum() - 1.0) <= 1e-13


@pytest.mark.parametrize("k", range(11))
def test_quadrature_exact_on_monomials(grid64, k):
    # int_0^1 y^k dy = 1/(k+1)
    assert abs(integrate(grid64, grid64.nodes**k) - 1.0 / (k + 1)) <= 1e-10


def test_quadrature_y_squared_small_grid():
    g = build_grid(16)
    assert abs(integrate(g, g.nodes**2) - 1.0 / 3.0) <= 1e-12


def test_quadrature_exponential():
    # analytic integral of e^y over [0, 1] is e - 1
    g = build_grid(64)
    assert abs(integrate(g, np.exp(g.nodes)) - (np.e - 1.0)) <= 1e-12


@pytest.mark.parametrize("n", [16, 32, 64, 128])
def test_d1_exact_on_monomials(n):
    g = build_grid(n)
    for k in range(1, min(n - 1, 10) + 1):
        err = np.max(np.abs(g.D1 @ g.nodes**k - k * g.nodes ** (k - 1)))
        assert err <= 1e-9, (n, k, err)


def test_d1_on_sine():
    # analytic derivative oracle: (sin(pi y))' = pi cos(pi y)
    g = build_grid(32)
    err = np.max(np.abs(g.D1 @ np.sin(np.pi * g.nodes) - np.pi * np.cos(np.pi * g.nodes)))
    assert err <= 1e-10


def test_d2_annihilates_constants():
    g = build_grid(64)
    assert np.max(np.abs(g.D2 @ np.ones(g.n))) <= 1e-8


def test_higher_matrices_are_powers(grid64):
    assert np.array_equal(grid64.D2, grid64.D1 @ grid64.D1)
    assert np.array_equal(grid64.D3, grid64.D2 @ grid64.D1)
    assert np.array_equal(grid64.D4, grid64.D2 @ grid64.D2)


def test_integrate_length_mismatch(grid64):
    with pytest.raises(LengthMismatch):
        integrate(grid64, np.ones(grid64.n - 1))


def test_curvature_integral_stable_under_doubling():
    # int |psi''|^2 for a fixed smooth function, evaluated spectrally
    vals = {}
    for n in (64, 128):
        g = build_grid(n)
        psi = np.sin(np.pi * g.nodes) * g.nodes * (1 - g.nodes)
        vals[n] = integrate(g, (g.D2 @ psi) ** 2)
    assert abs(vals[128] - vals[64]) <= 1e-10 * abs(vals[128])


def test_barycentric_interpolation_roundtrip():
    g = build_grid(32)
    f = np.exp(g.nodes) * np.cos(3 * g.nodes)
    bw = barycentric_weights(g.nodes)
    xs = np.linspace(0, 1, 217)
    exact = np.exp(xs) * np.cos(3 * xs)
    assert np.max(np.abs(barycentric_eval(g.nodes, bw, f, xs) - exact)) <= 1e-12
    # node hits return node values exactly
    assert barycentric_eval(g.nodes, bw, f, g.nodes[7]) == f[7]


def test_differentiation_matrix_general_nodes():
    nodes = np.linspace(0, 1, 12)
    D = differentiation_matrix(nodes, barycentric_weights(nodes))
    assert np.max(np.abs(D @ nodes**3 - 3 * nodes**2)) <= 1e-10
