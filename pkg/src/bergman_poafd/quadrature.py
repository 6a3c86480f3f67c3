"""Area quadrature used as an independent oracle for inner products.

Disc: in ``t = r^2`` the measure ``dA_alpha`` becomes
``(1 + alpha)/(2 pi) (1 - t)^alpha dt dtheta``. The ``t`` integral uses
Gauss-Jacobi nodes for the weight ``(1 - t)^alpha`` (plain Gauss-Legendre
when ``alpha = 0``) and the angle uses the periodic trapezoid rule.

Half-plane: the Cayley map ``z = i (1 + u)/(1 - u)`` carries the disc onto
the upper half-plane with ``|dz/du|^2 = 4/|1 - u|^4``. Products of two
half-plane Bergman functions decay like ``|z|^-4``, so the pulled-back
integrand stays bounded at ``u = 1`` and the disc rule applies unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .kernels import Space

DEFAULT_RADIAL = 200
DEFAULT_ANGULAR = 512


@lru_cache(maxsize=32)
def _disc_rule(alpha: float, n_radial: int, n_angular: int):
    x, w = roots_jacobi(n_radial, alpha, 0.0)
    t = (1.0 + x) / 2.0
    # int_0^1 (1-t)^a g dt = 2^-(a+1) int_-1^1 (1-x)^a g dx
    wt = w * 2.0 ** (-(alpha + 1.0))
    theta = 2.0 * np.pi * np.arange(n_angular) / n_angular
    r = np.sqrt(t)
    z = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = ((1.0 + alpha) * wt[:, None] / n_angular * np.ones(n_angular)[None, :]).ravel()
    return z, weights


@dataclass
class AreaQuadrature:
    """Nodes and weights with ``sum(w * F(z)) ~ int F dA`` for a space."""

    space: Space
    n_radial: int = DEFAULT_RADIAL
    n_angular: int = DEFAULT_ANGULAR
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.space.is_disc:
            self.nodes, self.weights = _disc_rule(self.space.alpha, self.n_radial, self.n_angular)
        else:
            u, w = _disc_rule(0.0, self.n_radial, self.n_angular)
            self.nodes = 1j * (1.0 + u) / (1.0 - u)
            self.weights = w * 4.0 / np.abs(1.0 - u) ** 4

    def integrate(self, values) -> complex:
        return complex(np.sum(self.weights * values))

    def inner(self, f, g) -> complex:
        """``<f, g>`` for callables ``f``, ``g`` evaluated on the nodes."""
        return self.integrate(f(self.nodes) * np.conj(g(self.nodes)))

    def norm_squared(self, f) -> float:
        return float(np.sum(self.weights * np.abs(f(self.nodes)) ** 2))

    def gram(self, funcs) -> np.ndarray:
        vals = np.array([f(self.nodes) for f in funcs])
        return (vals * self.weights) @ np.conj(vals).T
