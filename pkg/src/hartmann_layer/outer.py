"""Closed-form outer flow U(t, x), far-field magnetic field B(t, x), and Bernoulli pressure.

Both fields are finite sums of terms ``amp * X_k(x) * T(t)`` where ``X_k`` is
``cos(k x)`` or ``sin(k x)`` and ``T`` is constant, ``exp(-a t)`` or ``t**m``.
Every derivative is evaluated exactly.
"""
from dataclasses import dataclass, field
from math import comb, factorial, pi

import numpy as np

from .errors import ConfigError, UnsupportedOrder

T_MODES = ("const", "exp", "poly")


@dataclass(frozen=True)
class FourierTerm:
    amp: float
    k: int = 0
    basis: str = "cos"
    t_mode: str = "const"
    a: float = 0.0
    m: int = 0

    def __post_init__(self):
        if self.basis not in ("cos", "sin"):
            raise ValueError(f"basis must be 'cos' or 'sin', got {self.basis!r}")
        if self.t_mode not in T_MODES:
            raise ValueError(f"t_mode must be one of {T_MODES}, got {self.t_mode!r}")
        if self.k < 0 or self.m < 0:
            raise ValueError("wavenumber and power must be nonnegative")

    def x_part(self, x, n):
        if self.k == 0:
            if n:
                return np.zeros_like(x)
            return np.ones_like(x) if self.basis == "cos" else np.zeros_like(x)
        trig = np.cos if self.basis == "cos" else np.sin
        return self.k ** n * trig(self.k * x + n * pi / 2)

    def t_part(self, t, l):
        if self.t_mode == "const":
            return 1.0 if l == 0 else 0.0
        if self.t_mode == "exp":
            return (-self.a) ** l * np.exp(-self.a * t)
        if l > self.m:
            return 0.0
        return factorial(self.m) / factorial(self.m - l) * t ** (self.m - l)

    def to_dict(self):
        return {"amp": self.amp, "k_wavenumber": self.k, "basis": self.basis,
                "t_mode": self.t_mode, "a": self.a, "m": self.m}

    @classmethod
    def from_dict(cls, d, path="term"):
        unknown = set(d) - {"amp", "k_wavenumber", "basis", "t_mode", "a", "m"}
        if unknown:
            raise ConfigError(path, f"unknown keys {sorted(unknown)}")
        if "amp" not in d:
            raise ConfigError(path + ".amp", "required")
        try:
            return cls(amp=float(d["amp"]), k=int(d.get("k_wavenumber", 0)),
                       basis=d.get("basis", "cos" if int(d.get("k_wavenumber", 0)) == 0 else "sin"),
                       t_mode=d.get("t_mode", "const"), a=float(d.get("a", 0.0)),
                       m=int(d.get("m", 0)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(path, str(exc)) from None


def _eval_terms(terms, x, t, k, l):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for term in terms:
        tp = term.t_part(t, l)
        if tp != 0.0:
            out = out + term.amp * tp * term.x_part(x, k)
    return out


@dataclass(frozen=True)
class OuterFlow:
    """U and B descriptors; ``s`` fixes the admissible derivative orders."""

    U_terms: tuple = (FourierTerm(1.0),)
    B_terms: tuple = (FourierTerm(1.0),)
    s: int = 4
    extra_orders: int = field(default=0, compare=False)

    @classmethod
    def constant(cls, U=1.0, B=1.0, s=4):
        return cls((FourierTerm(U),), (FourierTerm(B),), s)

    @property
    def max_k(self):
        return self.s + 2 + self.extra_orders

    @property
    def max_l(self):
        return self.s // 2 + 1 + self.extra_orders

    @property
    def x_independent(self):
        return all(t.k == 0 or t.amp == 0.0 for t in self.U_terms)

    def eval_U(self, x, t, k=0, l=0):
        """Exact d^l/dt^l d^k/dx^k U at the x-nodes."""
        if k < 0 or l < 0 or k > self.max_k or l > self.max_l:
            raise UnsupportedOrder(f"U derivative (k={k}, l={l}) beyond (k<={self.max_k}, l<={self.max_l})")
        return _eval_terms(self.U_terms, x, t, k, l)

    def eval_B(self, x, t, k=0, l=0):
        return _eval_terms(self.B_terms, x, t, k, l)

    def pressure_gradient(self, x, t, eps=0.0):
        """d_x P from the regularized Bernoulli law (eps = 0 gives the classical law)."""
        U = self.eval_U(x, t)
        return (-self.eval_U(x, t, 0, 1) - U * self.eval_U(x, t, 1, 0)
                + eps ** 2 * self.eval_U(x, t, 2, 0))

    def boundary_flux_K(self, x, t, eps=0.0):
        """Neumann datum for the vorticity at the wall: d_x P - U."""
        return self.pressure_gradient(x, t, eps) - self.eval_U(x, t)

    def flux_derivative(self, x, t, eps=0.0, l=0, j=0):
        """Exact d^l/dt^l d^j/dx^j of K = d_x P - U (Leibniz on the product U d_x U)."""
        U = lambda kk, ll: self.eval_U(x, t, kk, ll)
        out = -U(j, l + 1) + eps ** 2 * U(j + 2, l) - U(j, l)
        for i in range(l + 1):
            for m in range(j + 1):
                out = out - comb(l, i) * comb(j, m) * U(m, i) * U(j - m + 1, l - i)
        return out

    def to_dict(self):
        return {"U": [t.to_dict() for t in self.U_terms], "B": [t.to_dict() for t in self.B_terms]}

    @classmethod
    def from_dict(cls, d, s=4, path="outer_flow"):
        if not isinstance(d, dict):
            raise ConfigError(path, "must be an object")
        unknown = set(d) - {"U", "B"}
        if unknown:
            raise ConfigError(path, f"unknown keys {sorted(unknown)}")
        U = tuple(FourierTerm.from_dict(t, f"{path}.U[{i}]") for i, t in enumerate(d.get("U", [{"amp": 1.0}])))
        B = tuple(FourierTerm.from_dict(t, f"{path}.B[{i}]") for i, t in enumerate(d.get("B", [{"amp": 1.0}])))
        return cls(U, B, s)


def sin_flow(mean=1.0, amp=0.1, k=1, s=4, decay=None):
    """U = mean + amp sin(k x), optionally with the oscillating part decaying like exp(-decay t)."""
    osc = FourierTerm(amp, k, "sin") if decay is None else FourierTerm(amp, k, "sin", "exp", a=decay)
    return OuterFlow((FourierTerm(mean), osc), (FourierTerm(1.0),), s)
