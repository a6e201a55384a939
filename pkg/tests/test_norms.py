import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hartmann_layer.errors import MonotonicityLost
from hartmann_layer.grid import GridSpec, deriv_x, weighted_l2
from hartmann_layer.norms import (g_k, membership_check, multi_indices, norm_hs_gamma,
                                  norm_hs_gamma_g, norm_report, pointwise_I, shear_ratio,
                                  sigma_floor, slot_norms)
from hartmann_layer.outer import OuterFlow, sin_flow
from hartmann_layer.solver import Params, State, init_from_profile, state_from_vorticity


PIN_HS_GAMMA = 528.1624400338465


@pytest.fixture(scope="module")
def grid():
    return GridSpec()


@pytest.fixture(scope="module")
def builtin(grid):
    return init_from_profile(OuterFlow.constant(), Params(), grid)


def test_multi_indices():
    idx = multi_indices(4)
    assert len(idx) == 15 and len(set(idx)) == 15
    assert all(a + b <= 4 for a, b in idx)


def test_shear_flow_has_no_cancellation_terms(builtin):
    p = Params()
    for k in range(1, p.s + 1):
        assert np.max(np.abs(g_k(builtin, k, p))) < 1e-12
    assert norm_hs_gamma_g(builtin, p) == pytest.approx(norm_hs_gamma(builtin.w, builtin.grid, 4, 1.0), rel=1e-12)


def test_g0_of_builtin_profile_converges_to_closed_form():
    # g0 = w - (d_y w / w)(u - U); on [0, 30] the deficit is -(1+y)^-1.5 + 31^-1.5, so
    # g0 = -(1+y)^-2.5 + 2.5 * 31^-1.5 / (1+y)  (and -(1+y)^-2.5 as y_max -> infinity)
    errs = []
    for ny in (512, 1024):
        g = GridSpec(nx=8, ny=ny)
        Y = g.mesh()[1]
        s = init_from_profile(OuterFlow.constant(), Params(), g)
        exact = -(1 + Y) ** -2.5 + 2.5 * 31 ** -1.5 / (1 + Y)
        errs.append(np.max(np.abs(g_k(s, 0, Params()) - exact)))
    assert errs[1] < errs[0] / 3
    assert errs[1] < 0.02


def test_g_reduces_to_x_derivative_when_u_equals_U(grid):
    X, Y = grid.mesh()
    w = (1.5 + 0.2 * np.sin(X)) * (1 + Y) ** -2.5
    flow = OuterFlow.constant()
    st_ = State(0.0, w, np.ones(grid.shape), np.zeros(grid.shape), None, flow, grid)
    for k in range(4):
        assert np.array_equal(g_k(st_, k, Params()), deriv_x(w, grid, k))


def test_norm_hs_gamma_examples(grid):
    assert norm_hs_gamma(np.zeros(grid.shape), grid, 4, 1.0) == 0.0
    f = (1 + grid.mesh()[1]) ** -2.5
    assert norm_hs_gamma(f, grid, 0, 1.0) == pytest.approx(math.sqrt(math.pi), abs=5e-3)


def test_norm_hs_gamma_builtin_pin(builtin):
    # regression value of the verified build at 64 x 128
    assert norm_hs_gamma(builtin.w, builtin.grid, 4, 1.0) == pytest.approx(PIN_HS_GAMMA, rel=1e-9)


def test_slot_substitution_identity(grid):
    p = Params()
    s = init_from_profile(sin_flow(amp=0.2), p, grid)
    slots = slot_norms(s.w, grid, p.s, p.gamma)
    top = weighted_l2(g_k(s, p.s, p), grid, p.gamma)
    full = norm_hs_gamma(s.w, grid, p.s, p.gamma)
    hg = norm_hs_gamma_g(s, p)
    assert hg ** 2 - top ** 2 == pytest.approx(full ** 2 - slots[(p.s, 0)] ** 2, rel=1e-12)
    assert hg >= top


def test_pointwise_I_examples(grid):
    p = Params()
    flow = OuterFlow.constant()
    zero = State(0.0, np.zeros(grid.shape), np.ones(grid.shape), np.zeros(grid.shape), None, flow, grid)
    assert np.all(pointwise_I(zero, p) == 0.0)


def test_pointwise_I_of_builtin_profile():
    # every weighted term of 1.5 (1+y)^-2.5 is constant in y: I = 2.25 + 14.0625 + 172.265625
    exact = 2.25 + (2.5 * 1.5) ** 2 + (3.5 * 2.5 * 1.5) ** 2
    wall = []
    for ny in (2048, 4096):
        s = init_from_profile(OuterFlow.constant(), Params(), GridSpec(nx=8, ny=ny))
        I = pointwise_I(s, Params())
        wall.append(I[0, 0])
        assert np.median(I) == pytest.approx(exact, rel=1e-4)
    richardson = (4 * wall[1] - wall[0]) / 3
    assert richardson == pytest.approx(exact, rel=2e-3)


def test_sigma_floor_examples(grid, builtin):
    p = Params()
    assert sigma_floor(builtin, p) == pytest.approx(1.5, rel=1e-14)
    assert sigma_floor(init_from_profile(sin_flow(), p, grid), p) == pytest.approx(1.35, abs=1e-3)
    flow = OuterFlow.constant()
    zero = State(0.0, np.zeros(grid.shape), np.ones(grid.shape), np.zeros(grid.shape), None, flow, grid)
    assert sigma_floor(zero, p) == 0.0


def test_membership(grid, builtin):
    m = membership_check(builtin, Params(delta=0.05))
    assert m.in_space and m.floor_margin > 0 and m.I_margin > 0
    m = membership_check(builtin, Params(delta=0.1))
    assert not m.in_space
    assert m.floor_margin == pytest.approx(1.4, rel=1e-12) and m.I_margin < 0
    flow = OuterFlow.constant()
    zero = State(0.0, np.zeros(grid.shape), np.ones(grid.shape), np.zeros(grid.shape), None, flow, grid)
    assert not membership_check(zero, Params()).in_space


def test_shear_ratio_guard(grid):
    p = Params()
    w = 0.01 * (1 + grid.mesh()[1]) ** -2.5
    s = state_from_vorticity(w, OuterFlow.constant(), grid, p)
    with pytest.raises(MonotonicityLost):
        shear_ratio(s, p)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 0.3), st.integers(1, 3), st.floats(2.0, 3.5))
def test_report_entries_nonnegative_and_finite(amp, k, sigma):
    g = GridSpec(nx=16, ny=64)
    p = Params(sigma=sigma)
    r = norm_report(init_from_profile(sin_flow(amp=amp, k=k), p, g), p)
    for v in (r.h_s_gamma, r.h_s_gamma_g, r.u_minus_U, r.I_sup):
        assert np.isfinite(v) and v >= 0
    assert r.h_s_gamma_g >= r.g_slots[p.s]
