"""Periodic-in-x, truncated half-line-in-y tensor grid with stencils and quadrature.

Fields are plain float64 arrays of shape ``(nx, ny + 1)``: axis 0 is the
periodic x direction, axis 1 runs from the wall ``y = 0`` up to ``y_max``.
"""
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from .errors import UnsupportedOrder


@dataclass(frozen=True)
class GridSpec:
    nx: int = 64
    ny: int = 128
    y_max: float = 30.0
    x_length: float = 2 * np.pi
    max_order: int = 8

    def __post_init__(self):
        if self.nx < 8 or self.nx % 2:
            raise ValueError("nx must be even and >= 8")
        if self.ny < 16:
            raise ValueError("ny must be >= 16")
        if self.y_max < 10:
            raise ValueError("y_max must be >= 10")

    @property
    def dx(self):
        return self.x_length / self.nx

    @property
    def dy(self):
        return self.y_max / self.ny

    @property
    def shape(self):
        return (self.nx, self.ny + 1)

    @property
    def x(self):
        return np.arange(self.nx) * self.dx

    @property
    def y(self):
        return np.linspace(0.0, self.y_max, self.ny + 1)

    def mesh(self):
        """Return ``(X, Y)`` node coordinates, each of shape ``(nx, ny + 1)``."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    def weight(self, lam):
        """(1 + y)^lam as a row vector broadcastable against fields."""
        return (1.0 + self.y)[None, :] ** lam

    def field(self, fn):
        X, Y = self.mesh()
        return np.asarray(np.broadcast_to(fn(X, Y), self.shape), dtype=float).copy()

    def to_dict(self):
        return {"nx": self.nx, "ny": self.ny, "y_max": self.y_max, "x_length": self.x_length}


def _check_order(grid, k):
    if k < 0 or k > grid.max_order:
        raise UnsupportedOrder(f"derivative order {k} outside [0, {grid.max_order}]")


def deriv_x(f, grid, k=1):
    """k-fold 4th-order central periodic difference in x."""
    _check_order(grid, k)
    out = np.asarray(f, dtype=float)
    c = 1.0 / (12.0 * grid.dx)
    for _ in range(k):
        out = c * (8.0 * (np.roll(out, -1, axis=0) - np.roll(out, 1, axis=0))
                   - (np.roll(out, -2, axis=0) - np.roll(out, 2, axis=0)))
    return out


@lru_cache(maxsize=None)
def _fd_weights(offsets, k):
    """Weights w with sum_j w_j f(offsets_j) ~ f^(k)(0) for unit spacing."""
    offsets = np.asarray(offsets, dtype=float)
    n = len(offsets)
    A = np.array([offsets ** j / math.factorial(j) for j in range(n)])
    rhs = np.zeros(n)
    rhs[k] = 1.0
    return np.linalg.solve(A, rhs)


def deriv_y(f, grid, k=1):
    """2nd-order k-th y-derivative: central stencil inside, one-sided (k+2 points) near both ends."""
    _check_order(grid, k)
    f = np.asarray(f, dtype=float)
    if k == 0:
        return f.copy()
    n = f.shape[-1]
    m = (k + 1) // 2
    out = np.empty_like(f)
    wc = _fd_weights(tuple(range(-m, m + 1)), k)
    out[..., m:n - m] = sum(wj * f[..., j:n - 2 * m + j] for j, wj in enumerate(wc))
    npts = k + 2
    for i in range(m):
        out[..., i] = f[..., :npts] @ _fd_weights(tuple(range(-i, npts - i)), k)
        out[..., n - 1 - i] = f[..., n - npts:] @ _fd_weights(tuple(range(i + 1 - npts, i + 1)), k)
    return out / grid.dy ** k


def d_alpha(f, grid, alpha):
    a1, a2 = alpha
    _check_order(grid, a1 + a2)
    return deriv_y(deriv_x(f, grid, a1), grid, a2)


def _increments(f, grid):
    f = np.asarray(f, dtype=float)
    return 0.5 * grid.dy * (f[..., 1:] + f[..., :-1])


def cum_integral_y(f, grid):
    """Trapezoidal integral from the wall: value 0 at y = 0."""
    inc = _increments(f, grid)
    zero = np.zeros(inc.shape[:-1] + (1,))
    return np.concatenate([zero, np.cumsum(inc, axis=-1)], axis=-1)


def tail_integral_y(f, grid):
    """Trapezoidal integral from y up to y_max: value exactly 0 at the top."""
    inc = _increments(f, grid)
    zero = np.zeros(inc.shape[:-1] + (1,))
    tail = np.cumsum(inc[..., ::-1], axis=-1)[..., ::-1]
    return np.concatenate([tail, zero], axis=-1)


def integrate_y(f, grid):
    return _increments(f, grid).sum(axis=-1)


def integrate(f, grid):
    """Double integral over the periodic strip (rectangle rule in x, trapezoid in y)."""
    return grid.dx * float(integrate_y(f, grid).sum())


@lru_cache(maxsize=None)
def _simpson_weights(ny, dy):
    """Composite Simpson weights on ny intervals; an odd last interval falls back to trapezoid.

    All weights are positive, so the quadrature norm obeys the triangle inequality.
    """
    w = np.zeros(ny + 1)
    even = ny - ny % 2
    w[0:even + 1:2] = 2.0
    w[1:even:2] = 4.0
    w[0] = w[even] = 1.0
    w *= dy / 3.0
    if ny % 2:
        w[-2] += 0.5 * dy
        w[-1] += 0.5 * dy
    w.setflags(write=False)
    return w


def quadrature_y(f, grid):
    """Simpson-rule integral over [0, y_max] of every x-column."""
    return np.asarray(f, dtype=float) @ _simpson_weights(grid.ny, grid.dy)


def weighted_l2(f, grid, lam=0.0):
    """sqrt(integral of (1 + y)^(2 lam) f^2), Simpson in y and rectangle rule in x."""
    f = np.asarray(f, dtype=float)
    return float(np.sqrt(grid.dx * quadrature_y(grid.weight(2.0 * lam) * f * f, grid).sum()))


def periodic_l2(profile, grid):
    """L2 norm over the torus of an x-profile."""
    profile = np.asarray(profile, dtype=float)
    return float(np.sqrt(grid.dx * np.sum(profile * profile)))
