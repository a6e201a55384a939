"""Weighted Sobolev functionals on vorticity snapshots.

    ||w||^2_{H^{s,gamma}}   = sum_{|alpha|<=s} ||(1+y)^{gamma+alpha_2} D^alpha w||^2
    ||w||^2_{H^{s,gamma}_g} = same sum with the alpha = (s, 0) slot replaced by ||(1+y)^gamma g_s||^2
    g_k = d_x^k w - (d_y w / w) d_x^k (u - U)
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import MonotonicityLost
from .grid import deriv_x, deriv_y, weighted_l2

LOW_ORDER = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


def multi_indices(s):
    return [(a1, n - a1) for n in range(s + 1) for a1 in range(n, -1, -1)]


def derivative_table(f, grid, order):
    """{alpha: D^alpha f} for every |alpha| <= order."""
    table = {}
    fx = np.asarray(f, dtype=float)
    for a1 in range(order + 1):
        table[(a1, 0)] = fx
        for a2 in range(1, order - a1 + 1):
            table[(a1, a2)] = deriv_y(fx, grid, a2)
        if a1 < order:
            fx = deriv_x(fx, grid, 1)
    return table


def slot_norms(f, grid, s, gamma):
    """{alpha: ||(1+y)^{gamma+alpha_2} D^alpha f||} over |alpha| <= s."""
    table = derivative_table(f, grid, s)
    return {a: weighted_l2(d, grid, gamma + a[1]) for a, d in table.items()}


def norm_hs_gamma(w, grid, s, gamma):
    return float(np.sqrt(sum(v * v for v in slot_norms(w, grid, s, gamma).values())))


def u_deficit(state):
    return state.u - state.outer.eval_U(state.grid.x, state.t)[:, None]


def norm_u_minus_U(state, p):
    """||u - U||_{H^{s, gamma-1}}."""
    return norm_hs_gamma(u_deficit(state), state.grid, p.s, p.gamma - 1.0)


def sigma_floor(state, p):
    """Signed minimum of (1+y)^sigma w over the grid."""
    return float(np.min(state.grid.weight(p.sigma) * state.w))


def shear_ratio(state, p):
    """a = d_y w / w, guarded by the floor (1+y)^sigma w >= delta / 2."""
    grid = state.grid
    weighted = grid.weight(p.sigma) * state.w
    i = int(np.argmin(weighted))
    if weighted.flat[i] < 0.5 * p.delta:
        raise MonotonicityLost(state.t, np.unravel_index(i, weighted.shape), float(weighted.flat[i]))
    return deriv_y(state.w, grid, 1) / state.w


def g_k(state, k, p, a=None):
    grid = state.grid
    if a is None:
        a = shear_ratio(state, p)
    return deriv_x(state.w, grid, k) - a * deriv_x(u_deficit(state), grid, k)


def norm_hs_gamma_g(state, p, slots=None):
    """||w||_{H^{s,gamma}_g}; ``slots`` may pass precomputed ``slot_norms`` of w."""
    if slots is None:
        slots = slot_norms(state.w, state.grid, p.s, p.gamma)
    top = weighted_l2(g_k(state, p.s, p), state.grid, p.gamma)
    rest = sum(v * v for a, v in slots.items() if a[0] <= p.s - 1)
    return float(np.sqrt(top * top + rest))


def pointwise_I(state, p):
    """sum_{|alpha|<=2} ((1+y)^{sigma+alpha_2} D^alpha w)^2, pointwise."""
    grid = state.grid
    table = derivative_table(state.w, grid, 2)
    return sum((grid.weight(p.sigma + a[1]) * table[a]) ** 2 for a in LOW_ORDER)


def pointwise_I_gamma(state, p):
    """The gamma-weighted, unsquared variant of I; reported for comparison only."""
    grid = state.grid
    table = derivative_table(state.w, grid, 2)
    return sum(np.abs(grid.weight(p.gamma + a[1]) * table[a]) for a in LOW_ORDER)


@dataclass
class Membership:
    in_space: bool
    floor_margin: float
    I_margin: float
    norm_finite: bool
    delta_eff: float


def membership_check(state, p, norm=None):
    """Evaluate the three defining conditions of H^{s,gamma}_{sigma,delta} with margins.

    ``delta_eff`` is the largest delta for which the snapshot would be a member.
    """
    floor = sigma_floor(state, p)
    I_sup = float(np.max(pointwise_I(state, p)))
    if norm is None:
        norm = norm_hs_gamma(state.w, state.grid, p.s, p.gamma)
    finite = bool(np.isfinite(norm))
    floor_margin = floor - p.delta
    I_margin = 1.0 / p.delta ** 2 - I_sup
    delta_eff = min(floor, 1.0 / np.sqrt(I_sup) if I_sup > 0 else np.inf)
    return Membership(floor_margin >= 0 and I_margin >= 0 and finite,
                      floor_margin, I_margin, finite, float(delta_eff))


@dataclass
class NormReport:
    h_s_gamma: float
    h_s_gamma_g: float
    u_minus_U: float
    sigma_floor: float
    I_sup: float
    slots: dict = field(default_factory=dict)
    g_slots: dict = field(default_factory=dict)


def norm_report(state, p):
    grid = state.grid
    slots = slot_norms(state.w, grid, p.s, p.gamma)
    a = shear_ratio(state, p)
    g_slots = {k: weighted_l2(g_k(state, k, p, a), grid, p.gamma) for k in range(p.s + 1)}
    rest = sum(v * v for al, v in slots.items() if al[0] <= p.s - 1)
    return NormReport(
        h_s_gamma=float(np.sqrt(sum(v * v for v in slots.values()))),
        h_s_gamma_g=float(np.sqrt(g_slots[p.s] ** 2 + rest)),
        u_minus_U=norm_u_minus_U(state, p),
        sigma_floor=sigma_floor(state, p),
        I_sup=float(np.max(pointwise_I(state, p))),
        slots=slots,
        g_slots=g_slots,
    )
