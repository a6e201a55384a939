"""Time integration of the regularized vorticity system.

The vorticity ``w`` is the only stepped unknown.  After every step the
velocity ``(u, v)`` and magnetic field ``b`` are re-derived from it:

    u = U - int_y^{y_max} w,   v = -int_0^y d_x u,   b = B - int_y^{y_max} (U - u).

Stepping is IMEX: ``d_yy`` and the ``-w`` damping are Crank-Nicolson (one
tridiagonal solve per x-column); advection and ``eps^2 d_xx`` are explicit
Adams-Bashforth 2.  The first step is IMEX-Euler.
"""
from dataclasses import dataclass, replace
import math

import numpy as np
from scipy.linalg import solve_banded

from .errors import (InvalidInitialData, MagneticRecoveryUnavailable, MonotonicityLost,
                     NumericalBlowup, StepRejected)
from .grid import GridSpec, cum_integral_y, deriv_x, deriv_y, tail_integral_y


@dataclass(frozen=True)
class Params:
    s: int = 4
    gamma: float = 1.0
    sigma: float = 2.5
    delta: float = 0.1
    eps: float = 0.1
    dt: float = 0.005
    cfl: float = 0.5
    t_end: float = 0.1

    def violations(self):
        """List of (field, message) pairs for every broken hypothesis."""
        bad = []
        if self.s < 4 or self.s % 2:
            bad.append(("s", "s must be even and ≥ 4"))
        if self.gamma < 1:
            bad.append(("gamma", "gamma must be >= 1"))
        if not self.sigma > self.gamma + 0.5:
            bad.append(("sigma", "sigma must exceed gamma + 1/2"))
        if not 0 < self.delta < 1:
            bad.append(("delta", "delta must lie in (0, 1)"))
        if self.eps < 0:
            bad.append(("eps", "eps must be >= 0"))
        if not self.dt > 0:
            bad.append(("dt", "dt must be > 0"))
        if not 0 < self.cfl <= 1:
            bad.append(("cfl", "cfl must lie in (0, 1]"))
        if self.t_end < 0:
            bad.append(("t_end", "t_end must be >= 0"))
        return bad

    def validate(self):
        bad = self.violations()
        if bad:
            raise ValueError("; ".join(msg for _, msg in bad))
        return self

    def to_dict(self):
        return {"s": self.s, "gamma": self.gamma, "sigma": self.sigma, "delta": self.delta,
                "eps": self.eps, "dt": self.dt, "cfl": self.cfl, "t_end": self.t_end}


@dataclass(frozen=True)
class State:
    t: float
    w: np.ndarray
    u: np.ndarray
    v: np.ndarray
    b: np.ndarray | None
    outer: object
    grid: GridSpec
    # explicit tendency of the previous step, needed by Adams-Bashforth
    history: np.ndarray | None = None


@dataclass(frozen=True)
class Forcing:
    """Extra source and replacement wall flux, used by manufactured-solution runs.

    ``source(t, grid)`` returns a field; ``wall_flux(t, grid)`` returns an x-profile
    that replaces the Bernoulli flux K.
    """
    source: object = None
    wall_flux: object = None


def recover_u(w, outer, t, grid):
    U = outer.eval_U(grid.x, t)[:, None]
    return U - tail_integral_y(w, grid)


def recover_v(u, grid):
    return -cum_integral_y(deriv_x(u, grid, 1), grid)


def recover_b(u, outer, t, grid, sigma=None):
    """b = B - int_y^{y_max} (U - u); needs sigma > 2 for the deficit to be integrable."""
    if sigma is not None and sigma <= 2:
        raise MagneticRecoveryUnavailable(f"U - u decays like (1+y)^(1-sigma); sigma={sigma} <= 2")
    U = outer.eval_U(grid.x, t)[:, None]
    B = outer.eval_B(grid.x, t)[:, None]
    return B - tail_integral_y(U - u, grid)


def state_from_vorticity(w, outer, grid, p, t=0.0, history=None):
    w = np.array(w, dtype=float)
    u = recover_u(w, outer, t, grid)
    v = recover_v(u, grid)
    try:
        b = recover_b(u, outer, t, grid, p.sigma)
    except MagneticRecoveryUnavailable:
        b = None
    return State(t, w, u, v, b, outer, grid, history)


def init_from_profile(outer, p, grid):
    """w0 = U(0, x) (sigma - 1) (1 + y)^(-sigma) and the recovered u, v, b."""
    amp = outer.eval_U(grid.x, 0.0) * (p.sigma - 1.0)
    if np.any(amp < 2.0 * p.delta):
        i = int(np.argmin(amp))
        raise InvalidInitialData(
            f"U(0,x)(sigma-1) = {amp[i]:.4g} < 2 delta = {2 * p.delta:g} at x-node {i}")
    w0 = amp[:, None] * grid.weight(-p.sigma)
    return state_from_vorticity(w0, outer, grid, p)


def sigma_floor_values(w, grid, sigma):
    return grid.weight(sigma) * w


def admissible_dt(state, p):
    grid = state.grid
    umax = float(np.max(np.abs(state.u)))
    vmax = float(np.max(np.abs(state.v)))
    lim = math.inf
    if umax > 0:
        lim = min(lim, grid.dx / umax)
    if vmax > 0:
        lim = min(lim, grid.dy / vmax)
    return p.cfl * lim


def _explicit_tendency(state, p, grid):
    w = state.w
    return (-state.u * deriv_x(w, grid, 1) - state.v * deriv_y(w, grid, 1)
            + p.eps ** 2 * deriv_x(w, grid, 2))


def _diffusion_bands(grid, sigma):
    """Banded storage of L = d_yy - 1 with the wall ghost node and the top decay condition.

    The top row imposes d_y w = -sigma w / (1 + y_max), which the power-law
    profiles of the admissible space satisfy exactly.
    """
    n = grid.ny + 1
    h2 = 1.0 / grid.dy ** 2
    c = sigma / (1.0 + grid.y_max)
    upper = np.full(n, h2)
    diag = np.full(n, -2.0 * h2 - 1.0)
    lower = np.full(n, h2)
    upper[1] = 2.0 * h2          # row 0 couples to w_1 twice (ghost w_-1 = w_1 - 2 dy K)
    lower[n - 2] = 2.0 * h2      # row n-1 couples to w_{n-2} twice
    diag[-1] -= 2.0 * c / grid.dy
    upper[0] = 0.0
    lower[-1] = 0.0
    return upper, diag, lower


def _apply_bands(bands, w):
    upper, diag, lower = bands
    out = diag * w
    out[..., :-1] += upper[1:] * w[..., 1:]
    out[..., 1:] += lower[:-1] * w[..., :-1]
    return out


def _wall_flux(state, p, t, forcing):
    grid = state.grid
    if forcing is not None and forcing.wall_flux is not None:
        return np.asarray(forcing.wall_flux(t, grid), dtype=float)
    return state.outer.boundary_flux_K(grid.x, t, p.eps)


def step(state, p, forcing=None, dt=None):
    """Advance one IMEX step; returns a new State with re-derived u, v, b."""
    grid = state.grid
    dt = p.dt if dt is None else dt
    lim = admissible_dt(state, p)
    if dt > lim * (1 + 1e-12):
        raise StepRejected(dt, lim)

    t0, t1 = state.t, state.t + dt
    theta = 1.0 if state.history is None else 0.5
    N = _explicit_tendency(state, p, grid)
    expl = N if state.history is None else 1.5 * N - 0.5 * state.history

    bands = _diffusion_bands(grid, p.sigma)
    rhs = state.w + dt * (1.0 - theta) * _apply_bands(bands, state.w) + dt * expl
    K0 = _wall_flux(state, p, t0, forcing)
    K1 = _wall_flux(state, p, t1, forcing)
    rhs[:, 0] += -2.0 / grid.dy * dt * (theta * K1 + (1.0 - theta) * K0)
    if forcing is not None and forcing.source is not None:
        rhs = rhs + dt * forcing.source(t0 + theta * dt, grid)

    upper, diag, lower = bands
    ab = np.vstack([-theta * dt * upper, 1.0 - theta * dt * diag, -theta * dt * lower])
    w_new = solve_banded((1, 1), ab, rhs.T).T

    if not np.all(np.isfinite(w_new)):
        raise NumericalBlowup(t1)
    return state_from_vorticity(w_new, state.outer, grid, p, t1, history=N)


@dataclass
class RunResult:
    snapshots: list
    records: list
    stop_reason: str = "completed"
    error: Exception | None = None


def n_steps(p):
    return int(round(p.t_end / p.dt)) if p.t_end > 0 else 0


def check_floor(state, p):
    vals = sigma_floor_values(state.w, state.grid, p.sigma)
    i = int(np.argmin(vals))
    if vals.flat[i] < 0.5 * p.delta:
        raise MonotonicityLost(state.t, np.unravel_index(i, vals.shape), float(vals.flat[i]))


def run(state0, p, record_every=1, forcing=None, diagnose=True):
    """Step to ``p.t_end``, sampling a snapshot (and diagnostics) every ``record_every`` steps.

    Stops early on NumericalBlowup, MonotonicityLost or StepRejected and
    returns the partial series with the stop reason.
    """
    from .estimates import sample_record

    def sample(state):
        result.snapshots.append(state)
        if diagnose:
            result.records.append(sample_record(state, p))

    result = RunResult([], [])
    state = state0
    try:
        sample(state)
        for i in range(1, n_steps(p) + 1):
            state = step(state, p, forcing)
            if diagnose:
                check_floor(state, p)
            if i % record_every == 0:
                sample(state)
    except (NumericalBlowup, MonotonicityLost, StepRejected) as exc:
        result.stop_reason = type(exc).__name__
        result.error = exc
    return result


def residual_momentum(prev, state, p):
    """Pointwise residual of the regularized velocity equation at ``state``.

    d_t u is the backward difference between two consecutive snapshots.
    """
    grid = state.grid
    x, t = grid.x, state.t
    u, v = state.u, state.v
    dt = state.t - prev.t
    dudt = (u - prev.u) / dt if dt > 0 else np.zeros_like(u)
    U = state.outer.eval_U(x, t)[:, None]
    dPdx = state.outer.pressure_gradient(x, t, p.eps)[:, None]
    return (dudt + u * deriv_x(u, grid, 1) + v * deriv_y(u, grid, 1) - (U - u)
            - p.eps ** 2 * deriv_x(u, grid, 2) - deriv_y(u, grid, 2) + dPdx)


def with_params(p, **kw):
    return replace(p, **kw)
