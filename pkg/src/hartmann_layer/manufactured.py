"""Manufactured solution for verifying the vorticity stepper.

    w*(t, x, y) = e^{-t} * 1.5 (1+y)^{-5/2} * (1 + 0.05 sin x)

The outer flow is scaled so that u* = U - int_y^{y_max} w* vanishes at the wall,
and the top decay condition d_y w = -(5/2) w / (1 + y) holds exactly.
"""
import numpy as np

from .outer import FourierTerm, OuterFlow
from .solver import Forcing, state_from_vorticity

AMP = 1.5
DECAY = 2.5
WOBBLE = 0.05


class ManufacturedSolution:
    def __init__(self, grid, eps=0.0, s=4):
        self.grid = grid
        self.eps = eps
        c = 1.0 - (1.0 + grid.y_max) ** (1.0 - DECAY)
        self.outer = OuterFlow(
            (FourierTerm(c, 0, "cos", "exp", a=1.0), FourierTerm(WOBBLE * c, 1, "sin", "exp", a=1.0)),
            (FourierTerm(1.0),), s)

    def _parts(self, t):
        X, Y = self.grid.mesh()
        A = 1.0 + WOBBLE * np.sin(X)
        dA = WOBBLE * np.cos(X)
        ddA = -WOBBLE * np.sin(X)
        prof = AMP * (1.0 + Y) ** -DECAY * np.exp(-t)
        return X, Y, A, dA, ddA, prof

    def w(self, t):
        _, _, A, _, _, prof = self._parts(t)
        return prof * A

    def u(self, t):
        _, Y, A, _, _, _ = self._parts(t)
        return np.exp(-t) * A * (1.0 - (1.0 + Y) ** (1.0 - DECAY))

    def v(self, t):
        _, Y, _, dA, _, _ = self._parts(t)
        # int_0^y (1 - (1+s)^{-3/2}) ds
        return -np.exp(-t) * dA * (Y - 2.0 + 2.0 * (1.0 + Y) ** -0.5)

    def source(self, t, grid=None):
        _, Y, A, dA, ddA, prof = self._parts(t)
        w = prof * A
        wx = prof * dA
        wy = -DECAY / (1.0 + Y) * w
        wyy = DECAY * (DECAY + 1.0) / (1.0 + Y) ** 2 * w
        wxx = prof * ddA
        # d_t w + w = 0 for this profile
        return self.u(t) * wx + self.v(t) * wy - self.eps ** 2 * wxx - wyy

    def wall_flux(self, t, grid=None):
        return -DECAY * self.w(t)[:, 0]

    def forcing(self):
        return Forcing(source=self.source, wall_flux=self.wall_flux)

    def initial_state(self, p):
        return state_from_vorticity(self.w(0.0), self.outer, self.grid, p)
