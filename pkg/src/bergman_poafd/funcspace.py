"""Target functions and the three capabilities the decomposition needs.

Every target supports pointwise derivatives ``f^(m)(b)``, the space norm,
and the pairing ``<f, k~>`` (which equals a derivative by the reproducing
property). Representations:

* :class:`TaylorSeries` -- finite power series on the disc;
* :class:`KernelMix` -- finite combination of normalized (generalized) kernels;
* :class:`PowerKernel` -- ``(1 - conj(c) z)^-s`` with ``|c| <= 1``; covers the
  boundary-singular family ``(1 - z)^-(2 + beta)`` and kernel-type targets;
* :class:`BlackBox` -- an evaluator; derivatives come from a Cauchy integral;
* :class:`LinearCombination` -- sums of the above (residuals, linearity checks).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import gammaln, hyp2f1

from .kernels import DomainError, KernelRef, Space, kernel_derivative, kernel_norm_squared
from .quadrature import AreaQuadrature

CAUCHY_NODES = 256


class NormOverflowError(ArithmeticError):
    pass


def gamma_multipliers(n: int, alpha: float) -> np.ndarray:
    """``k! Gamma(alpha + 2) / Gamma(k + alpha + 2)`` for ``k < n``.

    These are the squared norms of the monomials ``z^k`` in the weighted
    disc space. Evaluated through log-Gamma so ``k ~ 1e5`` stays finite.
    """
    k = np.arange(n, dtype=float)
    return np.exp(gammaln(k + 1.0) + gammaln(alpha + 2.0) - gammaln(k + alpha + 2.0))


class TargetFunction:
    """Interface shared by all representations."""

    label = "target"

    def __call__(self, z):
        return self.deriv(z, 0)

    def deriv(self, b, m: int):
        raise NotImplementedError

    def norm_squared(self, space: Space) -> float:
        raise NotImplementedError

    def check_space(self, space: Space):
        pass

    def taylor_coefficients(self, n: int) -> np.ndarray:
        raise TypeError(f"{type(self).__name__} has no Taylor expansion available")

    def to_json(self) -> dict:
        raise TypeError(f"{type(self).__name__} is not serializable")

    def __add__(self, other):
        return LinearCombination(((1.0, self), (1.0, other)))

    def __sub__(self, other):
        return LinearCombination(((1.0, self), (-1.0, other)))

    def __rmul__(self, c):
        return LinearCombination(((complex(c), self),))


@dataclass(frozen=True, eq=False)
class TaylorSeries(TargetFunction):
    """``f(z) = sum a_k z^k`` on the disc."""

    coeffs: np.ndarray
    label: str = "taylor"

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("Taylor coefficients must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(c)):
            raise ValueError("Taylor coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def check_space(self, space: Space):
        if not space.is_disc:
            raise ValueError("Taylor series targets live on the disc")

    def deriv(self, b, m: int):
        if m < 0:
            raise ValueError("derivative order must be nonnegative")
        if m > self.degree:
            raise ValueError(f"derivative order {m} exceeds the series degree {self.degree}")
        b = np.asarray(b, dtype=complex)
        if np.any(np.abs(b) >= 1.0):
            raise DomainError("Taylor targets are evaluated inside the unit disc only")
        return P.polyval(b, P.polyder(self.coeffs, m))

    def norm_squared(self, space: Space) -> float:
        self.check_space(space)
        with np.errstate(over="ignore"):
            terms = gamma_multipliers(self.coeffs.size, space.alpha) * np.abs(self.coeffs) ** 2
        if not np.all(np.isfinite(terms)):
            bad = int(np.flatnonzero(~np.isfinite(terms))[0])
            raise NormOverflowError(f"non-finite norm term at index {bad}")
        return float(np.sum(terms))

    def taylor_coefficients(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=complex)
        k = min(n, self.coeffs.size)
        out[:k] = self.coeffs[:k]
        return out

    def to_json(self) -> dict:
        return {"type": "taylor", "coeffs": [[c.real, c.imag] for c in self.coeffs]}


@dataclass(frozen=True, eq=False)
class KernelMix(TargetFunction):
    """``f = sum c_l k~_l / ||k~_l||`` for finitely many generalized kernels.

    With all orders zero this is ``sum c_l e_{b_l}``. ``total_variation``
    is ``M = sum |c_l|``.
    """

    space: Space
    coefs: tuple
    refs: tuple
    label: str = "kernelmix"
    scales: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        coefs = tuple(complex(c) for c in self.coefs)
        refs = tuple(r if isinstance(r, KernelRef) else KernelRef(r) for r in self.refs)
        if len(coefs) != len(refs):
            raise ValueError("coefficient and kernel lists differ in length")
        for r in refs:
            self.space.check_interior(r.center, "kernel center")
        if not all(np.isfinite(c) for c in coefs):
            raise ValueError("KernelMix coefficients must be finite")
        object.__setattr__(self, "coefs", coefs)
        object.__setattr__(self, "refs", refs)
        scales = np.array([1.0 / math.sqrt(kernel_norm_squared(self.space, r.center, r.order)) for r in refs])
        object.__setattr__(self, "scales", scales)

    @classmethod
    def of_points(cls, space: Space, coefs: Sequence[complex], points: Sequence[complex], **kw):
        return cls(space, tuple(coefs), tuple(KernelRef(p) for p in points), **kw)

    @property
    def total_variation(self) -> float:
        return float(sum(abs(c) for c in self.coefs))

    def check_space(self, space: Space):
        if space != self.space:
            raise ValueError(f"KernelMix built for {self.space} used in {space}")

    def deriv(self, b, m: int):
        b = np.asarray(b, dtype=complex)
        self.space.check_interior(b)
        out = np.zeros(b.shape, dtype=complex)
        for c, r, sc in zip(self.coefs, self.refs, self.scales):
            out = out + c * sc * kernel_derivative(self.space, r.center, r.order, b, m)
        return out

    def inner_with_kernels(self, refs) -> np.ndarray:
        """``<f, k~_j>`` for each ``refs[j]``."""
        return np.array([complex(self.deriv(r.center, r.order)) for r in refs])

    def norm_squared(self, space: Space) -> float:
        self.check_space(space)
        c = np.array(self.coefs) * self.scales
        g = np.array([[kernel_derivative(space, a.center, a.order, b.center, b.order) for b in self.refs] for a in self.refs])
        value = float(np.real(c @ g @ np.conj(c)))
        if not math.isfinite(value):
            raise NormOverflowError("non-finite KernelMix norm")
        return value

    def taylor_coefficients(self, n: int) -> np.ndarray:
        if not self.space.is_disc:
            raise TypeError("half-plane kernels have no Taylor expansion about 0")
        s = self.space.exponent
        k = np.arange(n)
        out = np.zeros(n, dtype=complex)
        for c, r, sc in zip(self.coefs, self.refs, self.scales):
            m = r.order
            # z^m (1 - cbar z)^-(s+m) = sum_j (s+m)_j / j! cbar^j z^(j+m)
            j = np.clip(k - m, 0, None).astype(float)
            log_poch = gammaln(s + m + j) - gammaln(s + m) - gammaln(j + 1.0)
            term = np.exp(log_poch) * np.conj(r.center) ** j
            term = np.where(k >= m, term, 0.0)
            out += c * sc * _rising(s, m) * term
        return out

    def to_json(self) -> dict:
        return {
            "type": "kernelmix",
            "space": self.space.to_json(),
            "terms": [
                {"coef": [c.real, c.imag], "center": [r.center.real, r.center.imag], "order": r.order}
                for c, r in zip(self.coefs, self.refs)
            ],
        }


def _rising(x: float, n: int) -> float:
    out = 1.0
    for j in range(n):
        out *= x + j
    return out


@dataclass(frozen=True, eq=False)
class PowerKernel(TargetFunction):
    """``f(z) = (1 - conj(c) z)^-s`` on the disc, ``|c| <= 1``.

    ``c = 1`` gives ``(1 - z)^-(2 + beta)`` with ``s = 2 + beta``. The
    weighted norm is ``2F1(s, s; alpha + 2; |c|^2)``, finite at ``|c| = 1``
    exactly when ``alpha > 2 s - 2`` (Gauss summation).
    """

    center: complex
    power: float
    label: str = "power_kernel"

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if abs(self.center) > 1.0 + 1e-15:
            raise ValueError("PowerKernel center must satisfy |c| <= 1")

    def check_space(self, space: Space):
        if not space.is_disc:
            raise ValueError("PowerKernel targets live on the disc")

    def deriv(self, b, m: int):
        b = np.asarray(b, dtype=complex)
        if np.any(np.abs(b) >= 1.0):
            raise DomainError("PowerKernel targets are evaluated inside the unit disc only")
        cbar = np.conj(self.center)
        return _rising(self.power, m) * cbar**m * (1.0 - cbar * b) ** (-(self.power + m))

    def norm_squared(self, space: Space) -> float:
        self.check_space(space)
        s, c2 = self.power, abs(self.center) ** 2
        a2 = space.alpha + 2.0
        if c2 >= 1.0:
            if a2 - 2.0 * s <= 0:
                raise NormOverflowError(f"(1 - z)^-{s} has infinite norm for alpha = {space.alpha}")
            log = gammaln(a2) + gammaln(a2 - 2.0 * s) - 2.0 * gammaln(a2 - s)
            return float(np.exp(log))
        value = float(hyp2f1(s, s, a2, c2))
        if not math.isfinite(value):
            raise NormOverflowError("non-finite hypergeometric norm")
        return value

    def taylor_coefficients(self, n: int) -> np.ndarray:
        k = np.arange(n, dtype=float)
        cbar = np.conj(self.center)
        if self.power == 0:
            out = np.zeros(n, dtype=complex)
            out[0] = 1.0
            return out
        # (s)_k / k! with sign handling for negative s
        coef = np.ones(n)
        for j in range(1, n):
            coef[j] = coef[j - 1] * (self.power + j - 1) / j
        return coef * cbar**k

    def to_json(self) -> dict:
        return {"type": "power_kernel", "center": [self.center.real, self.center.imag], "power": self.power}


@dataclass(frozen=True, eq=False)
class BlackBox(TargetFunction):
    """A function known only through an evaluator.

    ``radius`` bounds the Cauchy circle used for derivatives (the declared
    analyticity radius around each point); it is further capped at half the
    distance to the domain boundary.
    """

    func: Callable
    geometry_space: Space
    radius: float = np.inf
    label: str = "blackbox"
    nodes: int = CAUCHY_NODES

    def check_space(self, space: Space):
        if space.geometry is not self.geometry_space.geometry:
            raise ValueError("BlackBox geometry does not match the space")

    def cauchy_radius(self, b) -> np.ndarray:
        dist = self.geometry_space.boundary_distance(b)
        return np.minimum(0.5 * dist, self.radius)

    def deriv(self, b, m: int, rho=None):
        b = np.asarray(b, dtype=complex)
        self.geometry_space.check_interior(b)
        if m == 0 and rho is None:
            return np.asarray(self.func(b), dtype=complex)
        rho = self.cauchy_radius(b) if rho is None else np.broadcast_to(np.asarray(rho, dtype=float), b.shape)
        dist = self.geometry_space.boundary_distance(b)
        if np.any(rho >= dist):
            raise DomainError(f"Cauchy circle of radius {np.max(rho)} leaves the domain (boundary distance {np.min(dist)})")
        theta = 2.0 * np.pi * np.arange(self.nodes) / self.nodes
        ring = np.exp(1j * theta)
        pts = b[..., None] + rho[..., None] * ring
        vals = np.asarray(self.func(pts), dtype=complex)
        return math.factorial(m) * np.mean(vals * ring ** (-m), axis=-1) / rho**m

    def norm_squared(self, space: Space) -> float:
        self.check_space(space)
        return AreaQuadrature(space).norm_squared(self.func)


@dataclass(frozen=True, eq=False)
class LinearCombination(TargetFunction):
    """``sum w_i f_i`` over other targets."""

    terms: tuple
    label: str = "combination"

    def deriv(self, b, m: int):
        out = 0.0
        for w, f in self.terms:
            out = out + w * f.deriv(b, m)
        return out

    def check_space(self, space: Space):
        for _, f in self.terms:
            f.check_space(space)

    def norm_squared(self, space: Space) -> float:
        total = 0.0 + 0.0j
        for wi, fi in self.terms:
            for wj, fj in self.terms:
                total += wi * np.conj(wj) * inner(fi, fj, space)
        return float(total.real)

    def taylor_coefficients(self, n: int) -> np.ndarray:
        return sum(w * f.taylor_coefficients(n) for w, f in self.terms)


def inner(f: TargetFunction, g: TargetFunction, space: Space) -> complex:
    """``<f, g>`` using closed forms where one side allows it."""
    if isinstance(g, KernelMix):
        vals = np.array([complex(f.deriv(r.center, r.order)) for r in g.refs])
        return complex(np.sum(vals * np.conj(np.array(g.coefs) * g.scales)))
    if isinstance(f, KernelMix):
        return complex(np.conj(inner(g, f, space)))
    if isinstance(f, TaylorSeries) and isinstance(g, TaylorSeries):
        n = max(f.coeffs.size, g.coeffs.size)
        w = gamma_multipliers(n, space.alpha)
        return complex(np.sum(w * f.taylor_coefficients(n) * np.conj(g.taylor_coefficients(n))))
    if f is g:
        return complex(f.norm_squared(space))
    return AreaQuadrature(space).inner(f, g)


def eval_deriv(f: TargetFunction, space: Space, b, m: int):
    """``f^(m)(b)``."""
    f.check_space(space)
    return f.deriv(b, m)


def norm_squared(f: TargetFunction, space: Space) -> float:
    return f.norm_squared(space)


def kernel_pairing(f: TargetFunction, centers, order: int):
    """``f^(order)`` at ``centers`` for internal pairings.

    Unlike :func:`eval_deriv` a Taylor polynomial differentiated past its
    degree gives 0 rather than an error, which is the exact pairing value.
    """
    if isinstance(f, TaylorSeries) and order > f.degree:
        centers = np.asarray(centers, dtype=complex)
        if np.any(np.abs(centers) >= 1.0):
            raise DomainError("Taylor targets are evaluated inside the unit disc only")
        return np.zeros(centers.shape, dtype=complex)
    return f.deriv(centers, order)


def project_on_kernel(f: TargetFunction, space: Space, ref: KernelRef) -> complex:
    """``<f, k~_ref> = f^(order)(center)``."""
    space.check_interior(ref.center, "kernel center")
    return complex(eval_deriv(f, space, ref.center, ref.order))
