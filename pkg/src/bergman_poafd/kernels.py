"""Reproducing kernels of the weighted Bergman spaces and their derivatives.

Two geometries are supported:

* the unit disc with weight ``dA_alpha = (1 + alpha)(1 - |z|^2)^alpha dA``,
  kernel ``K(z, w) = (1 - conj(w) z)^-(2 + alpha)``;
* the upper half-plane with ``dA = dx dy / pi``,
  kernel ``K(z, w) = -(z - conj(w))^-2``.

A generalized kernel of order ``m`` is ``(d/d conj(w))^m K(., w)`` at
``w = center``. Differentiating in ``conj(w)`` gives, with ``s = 2 + alpha``
and the rising factorial ``(s)_m``::

    disc:        (s)_m z^m (1 - conj(c) z)^-(s + m)
    half-plane:  -(m + 1)! (z - conj(c))^-(m + 2)

Pairing any ``f`` against the order-``m`` kernel at ``c`` returns
``f^(m)(c)``, so inner products between generalized kernels are
``z``-derivatives of the closed forms above. For the disc that derivative
is a finite Leibniz sum, for the half-plane a single power.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

DISC_GUARD = 1e-12
HALF_PLANE_GUARD = 1e-12


class DomainError(ValueError):
    """A point lies on or outside the boundary of the domain."""


class NonFiniteKernelError(ArithmeticError):
    """A kernel evaluation overflowed (usually too close to the boundary)."""


class Geometry(enum.Enum):
    DISC = "disc"
    HALF_PLANE = "half_plane"


@dataclass(frozen=True)
class Space:
    """Which Hilbert space kernels, norms and inner products refer to."""

    geometry: Geometry = Geometry.DISC
    alpha: float = 0.0

    def __post_init__(self):
        if self.geometry is Geometry.DISC:
            if not self.alpha > -1:
                raise ValueError(f"alpha must exceed -1, got {self.alpha}")
        elif self.alpha != 0.0:
            raise ValueError("the half-plane space carries no weight exponent")

    @classmethod
    def disc(cls, alpha: float = 0.0) -> "Space":
        return cls(Geometry.DISC, float(alpha))

    @classmethod
    def half_plane(cls) -> "Space":
        return cls(Geometry.HALF_PLANE, 0.0)

    @property
    def is_disc(self) -> bool:
        return self.geometry is Geometry.DISC

    @property
    def exponent(self) -> float:
        """Power ``s = 2 + alpha`` in the disc kernel."""
        return 2.0 + self.alpha

    def boundary_distance(self, z):
        z = np.asarray(z, dtype=complex)
        if self.is_disc:
            return 1.0 - np.abs(z)
        return z.imag

    def is_interior(self, z):
        z = np.asarray(z, dtype=complex)
        if self.is_disc:
            return np.abs(z) <= 1.0 - DISC_GUARD
        return z.imag >= HALF_PLANE_GUARD

    def check_interior(self, z, what: str = "point"):
        ok = self.is_interior(z)
        if not np.all(ok):
            bad = np.asarray(z, dtype=complex)[~np.asarray(ok)] if np.ndim(z) else z
            first = np.ravel(bad)[0]
            if self.is_disc:
                raise DomainError(f"{what} {first} is not inside the unit disc (|z| > 1 - {DISC_GUARD})")
            raise DomainError(f"{what} {first} is not in the upper half-plane (Im z < {HALF_PLANE_GUARD})")

    def to_json(self) -> dict:
        if self.is_disc:
            return {"geometry": "disc", "alpha": self.alpha}
        return {"geometry": "half_plane"}

    @classmethod
    def from_json(cls, data: dict) -> "Space":
        geometry = data.get("geometry", "disc")
        if geometry == "disc":
            return cls.disc(data.get("alpha", 0.0))
        if geometry in ("half_plane", "halfplane"):
            return cls.half_plane()
        raise ValueError(f"unknown geometry {geometry!r}")


@dataclass(frozen=True)
class KernelRef:
    """Generalized kernel: ``order`` derivatives in ``conj(w)`` at ``center``."""

    center: complex
    order: int = 0

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if self.order < 0 or int(self.order) != self.order:
            raise ValueError(f"derivative order must be a nonnegative integer, got {self.order}")
        object.__setattr__(self, "order", int(self.order))


class KernelWithNorm(NamedTuple):
    ref: KernelRef
    scale: float


def rising(x: float, n: int) -> float:
    """Rising factorial ``x (x + 1) ... (x + n - 1)``."""
    out = 1.0
    for j in range(n):
        out *= x + j
    return out


def _finite(values, context: str):
    if not np.all(np.isfinite(values)):
        raise NonFiniteKernelError(f"non-finite kernel value in {context}")
    return values


def kernel_derivative(space: Space, center, order: int, z, n: int = 0, dtype=complex):
    """``n``-th ``z``-derivative of the order-``order`` kernel at ``center``.

    ``center`` and ``z`` broadcast against each other. With ``n = 0`` this is
    the kernel itself; with ``z`` another center it is an inner product
    between generalized kernels. ``dtype=np.clongdouble`` evaluates in
    extended precision.
    """
    real = np.longdouble if np.dtype(dtype) == np.dtype(np.clongdouble) else float
    center = np.asarray(center, dtype=dtype)
    z = np.asarray(z, dtype=dtype)
    m = int(order)
    if space.is_disc:
        s = real(space.exponent)
        cbar = np.conj(center)
        base = 1 - cbar * z
        total = np.zeros(np.broadcast(center, z).shape, dtype=dtype)
        # Leibniz rule on z^m * (1 - cbar z)^-(s + m)
        for j in range(min(m, n) + 1):
            coef = math.comb(n, j) * math.perm(m, j) * rising(s + m, n - j)
            total = total + coef * z ** (m - j) * cbar ** (n - j) * base ** (-(s + m + n - j))
        return rising(s, m) * total
    sign = -1 if n % 2 == 0 else 1
    return sign * math.factorial(m + n + 1) * (z - np.conj(center)) ** (-(m + n + 2))


def kernel_eval(space: Space, ref: KernelRef, z):
    """Value of the generalized kernel ``ref`` at ``z``."""
    space.check_interior(ref.center, "kernel center")
    space.check_interior(z)
    return _finite(kernel_derivative(space, ref.center, ref.order, z), "kernel_eval")


def kernel_inner(space: Space, a: KernelRef, b: KernelRef) -> complex:
    """Inner product ``<k~_a, k~_b>`` between two generalized kernels."""
    space.check_interior(a.center, "kernel center")
    space.check_interior(b.center, "kernel center")
    value = complex(kernel_derivative(space, a.center, a.order, b.center, b.order))
    return complex(_finite(value, "kernel_inner"))


def kernel_norm_squared(space: Space, center, order: int = 0):
    """``||k~||^2`` for kernels of one order at (possibly many) centers."""
    center = np.asarray(center, dtype=complex)
    if order == 0:
        if space.is_disc:
            return (1.0 - np.abs(center) ** 2) ** (-space.exponent)
        return 1.0 / (2.0 * center.imag) ** 2
    return kernel_derivative(space, center, order, center, order).real


def normalized_kernel(space: Space, a) -> KernelWithNorm:
    """Reference to ``k_a`` plus the factor making it a unit vector."""
    space.check_interior(a, "kernel center")
    ref = KernelRef(a, 0)
    return KernelWithNorm(ref, float(1.0 / np.sqrt(kernel_norm_squared(space, ref.center))))


def gram_matrix(space: Space, rows, cols=None, dtype=complex) -> np.ndarray:
    """Matrix ``G[i, j] = <k~_rows[i], k~_cols[j]>``."""
    cols = rows if cols is None else cols
    out = np.empty((len(rows), len(cols)), dtype=dtype)
    for i, a in enumerate(rows):
        for j, b in enumerate(cols):
            out[i, j] = kernel_derivative(space, a.center, a.order, b.center, b.order, dtype=dtype)
    return _finite(out, "gram_matrix")
