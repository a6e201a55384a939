import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hartmann_layer.errors import UnsupportedOrder
from hartmann_layer.grid import (GridSpec, cum_integral_y, d_alpha, deriv_x, deriv_y, integrate_y,
                                 tail_integral_y, weighted_l2)


@pytest.fixture(scope="module")
def grid():
    return GridSpec()


def test_grid_validation():
    for bad in ({"nx": 7}, {"nx": 6}, {"ny": 8}, {"y_max": 5.0}):
        with pytest.raises(ValueError):
            GridSpec(**bad)
    g = GridSpec()
    assert g.shape == (64, 129)
    assert g.y[0] == 0.0 and g.y[-1] == pytest.approx(30.0)
    assert g.x[-1] < 2 * np.pi


def test_deriv_x_sine(grid):
    X, _ = grid.mesh()
    assert np.max(np.abs(deriv_x(np.sin(X), grid, 1) - np.cos(X))) <= 1e-4
    assert np.max(np.abs(deriv_x(np.sin(X), grid, 2) + np.sin(X))) <= 1e-3
    assert np.max(np.abs(deriv_x(np.full(grid.shape, 3.7), grid, 1))) < 1e-12


def test_deriv_x_converges_at_fourth_order():
    errs = []
    for nx in (16, 32, 64):
        g = GridSpec(nx=nx, ny=16)
        X, _ = g.mesh()
        errs.append(np.max(np.abs(deriv_x(np.sin(X), g, 1) - np.cos(X))))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(16, rel=0.1)


def test_order_limit(grid):
    with pytest.raises(UnsupportedOrder):
        deriv_y(np.zeros(grid.shape), grid, grid.max_order + 1)


def test_deriv_y_exponential(grid):
    _, Y = grid.mesh()
    err = np.abs(deriv_y(np.exp(-Y), grid, 1) + np.exp(-Y))
    assert err[:, 0].max() <= 5e-2
    assert err[:, 1:-1].max() <= 1e-2


def test_deriv_y_linear_exact(grid):
    _, Y = grid.mesh()
    assert np.max(np.abs(deriv_y(2.0 - 0.7 * Y, grid, 1) + 0.7)) < 1e-12


def test_deriv_y_second_order_self_convergence():
    # (1+y)^-2.5 has second derivative 8.75 (1+y)^-4.5; compare on the shared coarse nodes
    interior, wall = [], []
    for ny in (512, 1024, 2048):
        g = GridSpec(nx=8, ny=ny)
        step = ny // 512
        y = g.y[::step]
        err = np.abs(deriv_y((1 + g.y)[None, :] ** -2.5, g, 2)[0][::step] - 8.75 * (1 + y) ** -4.5)
        interior.append(err[1:-1].max())
        wall.append(err[0])
    assert 3.5 <= interior[0] / interior[1] <= 4.5
    assert 3.5 <= interior[1] / interior[2] <= 4.5
    # the one-sided wall stencil reaches its asymptotic rate more slowly
    assert 3.0 <= wall[1] / wall[2] <= 4.5


def test_d_alpha(grid):
    X, Y = grid.mesh()
    f = np.sin(X) * np.exp(-Y)
    assert np.array_equal(d_alpha(f, grid, (0, 0)), f)
    assert np.max(np.abs(d_alpha(f, grid, (1, 1)) + np.cos(X) * np.exp(-Y))) < 5e-2


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_x_and_y_stencils_commute(seed):
    g = GridSpec(nx=16, ny=32)
    f = np.random.default_rng(seed).normal(size=g.shape)
    a = deriv_x(deriv_y(f, g, 1), g, 1)
    b = deriv_y(deriv_x(f, g, 1), g, 1)
    assert np.max(np.abs(a - b)) <= 1e-10


def test_tail_integral():
    g = GridSpec(nx=8, ny=256)
    f = (1 + g.y[None, :] + np.zeros((8, 1))) ** -2.5
    tail = tail_integral_y(f, g)
    exact = (1 - 31 ** -1.5) / 1.5
    # trapezoid error predicted by Euler-Maclaurin: dy^2/12 (f'(y_max) - f'(0))
    em = g.dy ** 2 / 12 * (-2.5 * 31 ** -3.5 + 2.5)
    assert tail[0, 0] - em == pytest.approx(exact, abs=1e-4)
    assert tail[0, 0] == pytest.approx(exact, abs=5e-3)
    assert np.all(tail[:, -1] == 0)
    assert np.all(tail_integral_y(np.zeros(g.shape), g) == 0)
    e = np.exp(-g.mesh()[1])
    assert np.max(np.abs(tail_integral_y(e, g) - (e - np.exp(-30)))) < g.dy ** 2 / 12 * 1.01


def test_tail_integral_second_order():
    errs = []
    for ny in (128, 256, 512):
        g = GridSpec(nx=8, ny=ny)
        errs.append(abs(tail_integral_y((1 + g.y)[None, :] ** -2.5, g)[0, 0] - (1 - 31 ** -1.5) / 1.5))
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.05)


def test_cum_integral(grid):
    _, Y = grid.mesh()
    assert np.max(np.abs(cum_integral_y(np.ones(grid.shape), grid) - Y)) < 1e-12
    e = np.exp(-Y)
    assert np.max(np.abs(cum_integral_y(e, grid) - (1 - e))) < grid.dy ** 2
    assert np.all(cum_integral_y(e, grid)[:, 0] == 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_cum_plus_tail_is_total(seed):
    g = GridSpec(nx=8, ny=32)
    f = np.random.default_rng(seed).normal(size=g.shape)
    total = integrate_y(f, g)
    assert np.allclose(cum_integral_y(f, g) + tail_integral_y(f, g), total[:, None], rtol=0, atol=1e-12)


def test_weighted_l2(grid):
    f = (1 + grid.mesh()[1]) ** -2.5
    exact = np.sqrt(2 * np.pi * (1 - 31.0 ** -2) / 2)
    assert weighted_l2(f, grid, 1.0) == pytest.approx(exact, abs=5e-3)
    assert weighted_l2(np.ones(grid.shape), grid, 0.0) == pytest.approx(np.sqrt(2 * np.pi * 30))
    assert weighted_l2(f, grid, 1.0) == pytest.approx(np.sqrt(np.pi), abs=5e-3)
    assert weighted_l2(np.zeros(grid.shape), grid, 1.0) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.floats(-50, 50).filter(lambda c: c == 0 or abs(c) > 1e-100), st.integers(0, 2**32 - 1))
def test_weighted_l2_homogeneous(c, seed):
    g = GridSpec(nx=8, ny=32)
    f = np.random.default_rng(seed).normal(size=g.shape)
    assert weighted_l2(c * f, g, 0.5) == pytest.approx(abs(c) * weighted_l2(f, g, 0.5), rel=1e-12)
