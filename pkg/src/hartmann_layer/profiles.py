"""Seeded test-function families and special initial profiles used by the checks."""
import numpy as np

from .outer import sin_flow


def random_decaying_fields(rng, n, grid, terms=3):
    """Smooth fields decaying like exp(-a y) with a >= 0.6 (negligible at y_max = 30)."""
    X, Y = grid.mesh()
    out = []
    for _ in range(n):
        f = np.zeros(grid.shape)
        for _ in range(terms):
            c, a, om, psi = rng.normal(), rng.uniform(0.6, 3.0), rng.uniform(0, 3), rng.uniform(0, 2 * np.pi)
            k, b, phi = rng.integers(0, 4), rng.uniform(0, 0.5), rng.uniform(0, 2 * np.pi)
            f += c * np.exp(-a * Y) * np.cos(om * Y + psi) * (1 + b * np.sin(k * X + phi))
        out.append(f)
    return out


def random_zero_trace_fields(rng, n, grid, terms=3):
    """Smooth bounded fields vanishing exactly at y = 0."""
    X, Y = grid.mesh()
    out = []
    for _ in range(n):
        f = np.zeros(grid.shape)
        for _ in range(terms):
            c, a, b = rng.normal(), rng.uniform(0.0, 1.0), rng.uniform(0.2, 3.0)
            k, h, phi = rng.integers(0, 4), rng.uniform(0, 0.5), rng.uniform(0, 2 * np.pi)
            f += c * (1 - np.exp(-b * Y)) * np.exp(-a * Y) * (1 + h * np.sin(k * X + phi))
        out.append(f)
    return out


def random_bandlimited_fields(rng, n, grid, kmax=4, terms=4):
    X, Y = grid.mesh()
    out = []
    for _ in range(n):
        f = np.zeros(grid.shape)
        for _ in range(terms):
            k = rng.integers(0, kmax + 1)
            c, a, om = rng.normal(), rng.uniform(0.3, 2.0), rng.uniform(0, 2)
            phi = rng.uniform(0, 2 * np.pi)
            f += c * np.exp(-a * Y) * np.cos(om * Y) * np.cos(k * X + phi)
        out.append(f)
    return out


def equivalence_family(s=4):
    """Ten x-dependent outer flows U = 1 + a sin(k x)."""
    return [sin_flow(1.0, a, k, s) for k in (1, 2) for a in (0.05, 0.1, 0.15, 0.2, 0.25)]


def wall_compatible_vorticity(outer, p, grid, t=0.0):
    """Positive vorticity with d_y w = K at the wall and int w = U.

    ``-K e^{-y}`` carries the wall flux; the even Gaussian corrects the integral
    without touching odd wall derivatives.
    """
    Y = grid.y[None, :]
    K = outer.boundary_flux_K(grid.x, t, p.eps)[:, None]
    U = outer.eval_U(grid.x, t)[:, None]
    return -K * np.exp(-Y) + (U + K) * 2.0 / np.sqrt(np.pi) * np.exp(-Y ** 2)


def even_bump_vorticity(grid, bump=0.3):
    """e^{-y} plus a zero-mean even bump: compatible with K = -1 at every odd order."""
    Y = grid.y[None, :] + np.zeros((grid.nx, 1))
    return np.exp(-Y) + bump * (np.exp(-Y ** 2) - 2.0 * np.exp(-4.0 * Y ** 2))
