"""Orthonormal rational systems built from generalized kernels.

``B_1, ..., B_n`` is the Gram-Schmidt orthonormalization of the kernels
``k~_{a_1}, ..., k~_{a_n}``, where a parameter that repeats contributes a
kernel differentiated once more in ``conj(w)`` at each repetition. Each
``B_k`` is stored as a row of a lower-triangular matrix ``C`` over the
kernels, so every quantity reduces to closed-form kernel inner products.

Clustered parameters make the kernel Gram matrix badly conditioned and
``C`` large, and double-precision Gram-Schmidt then loses orthogonality
at a rate ``eps * ||C||^2``. ``C`` and the Gram matrix are therefore
built and kept in extended precision (``np.clongdouble``), with
double-precision copies for evaluation on grids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .funcspace import TargetFunction, kernel_pairing
from .kernels import KernelRef, Space, gram_matrix, kernel_derivative, kernel_eval

TAU_COINCIDE = 1e-9
TAU_SPAN = 1e-12
EXT = np.clongdouble


class DegenerateExtensionError(ArithmeticError):
    """The new kernel lies numerically in the span of the previous ones."""


@dataclass(frozen=True)
class ParamSeq:
    """Ordered parameters with derivative orders ``l(a_k) - 1``."""

    points: tuple = ()
    orders: tuple = ()
    tol: float = TAU_COINCIDE

    @classmethod
    def from_points(cls, points, tol: float = TAU_COINCIDE) -> "ParamSeq":
        seq = cls(tol=tol)
        for p in points:
            seq = seq.append(p)
        return seq

    def __len__(self):
        return len(self.points)

    @property
    def multiplicities(self) -> tuple:
        return tuple(o + 1 for o in self.orders)

    def match(self, b: complex):
        """The stored point within ``tol`` of ``b``, or ``None``."""
        for p in self.points:
            if abs(p - b) <= self.tol:
                return p
        return None

    def count(self, p: complex) -> int:
        return sum(1 for q in self.points if q == p)

    def append(self, b: complex) -> "ParamSeq":
        b = complex(b)
        hit = self.match(b)
        if hit is not None:
            b = hit
        order = self.count(b)
        return ParamSeq(self.points + (b,), self.orders + (order,), self.tol)

    def refs(self) -> list:
        return [KernelRef(p, o) for p, o in zip(self.points, self.orders)]

    def distinct(self) -> dict:
        """Distinct points mapped to their current multiplicity."""
        out = {}
        for p in self.points:
            out[p] = out.get(p, 0) + 1
        return out


@dataclass(frozen=True)
class BROSystem:
    """Orthonormal system ``B_k = sum_{j<=k} C[k, j] k~_{a_j}``.

    Indices of ``B`` are 1-based in the public methods, matching ``B_1``.
    ``coeffs_ext`` and ``gram_ext`` hold ``C`` and the kernel Gram matrix in
    extended precision; ``coeffs`` and ``gram`` are their complex128 copies.
    """

    space: Space
    params: ParamSeq = field(default_factory=ParamSeq)
    coeffs_ext: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=EXT), repr=False)
    gram_ext: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=EXT), repr=False)
    tau_span: float = TAU_SPAN
    coeffs: np.ndarray = field(init=False, repr=False, compare=False)
    gram: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", self.coeffs_ext.astype(complex))
        object.__setattr__(self, "gram", self.gram_ext.astype(complex))

    @classmethod
    def empty(cls, space: Space, tol: float = TAU_COINCIDE, tau_span: float = TAU_SPAN) -> "BROSystem":
        return cls(space, ParamSeq(tol=tol), tau_span=tau_span)

    @classmethod
    def from_points(cls, space: Space, points, tol: float = TAU_COINCIDE) -> "BROSystem":
        sys = cls.empty(space, tol)
        for p in points:
            sys = sys.extend(p)
        return sys

    def __len__(self):
        return len(self.params)

    @property
    def refs(self) -> list:
        return self.params.refs()

    def candidate_ref(self, b: complex) -> KernelRef:
        """Kernel that extending by ``b`` would add."""
        seq = self.params.append(b)
        return KernelRef(seq.points[-1], seq.orders[-1])

    def extend(self, b: complex) -> "BROSystem":
        """Append ``b`` and orthonormalize the new generalized kernel.

        Modified Gram-Schmidt with one reorthogonalization pass, carried out
        in coordinates of unit-normalized kernels.
        """
        self.space.check_interior(b, "parameter")
        params = self.params.append(b)
        new = KernelRef(params.points[-1], params.orders[-1])
        n = len(self.params)
        refs = self.refs + [new]

        gram = np.zeros((n + 1, n + 1), dtype=EXT)
        gram[:n, :n] = self.gram_ext
        cross = gram_matrix(self.space, [new], refs, dtype=EXT)[0]
        gram[n, :] = cross
        gram[:n, n] = np.conj(cross[:n])
        gram[n, n] = cross[n].real

        nu = np.sqrt(np.real(np.diag(gram)))
        g_hat = gram / np.outer(nu, nu)
        c_hat = np.zeros((n + 1, n + 1), dtype=EXT)
        c_hat[:n, :n] = self.coeffs_ext * nu[:n][None, :]

        r = np.zeros(n + 1, dtype=EXT)
        r[n] = 1
        for _ in range(2):
            for k in range(n):
                proj = r @ g_hat @ np.conj(c_hat[k])
                r = r - proj * c_hat[k]
        norm2 = np.real(r @ g_hat @ np.conj(r))
        if not norm2 > self.tau_span:
            raise DegenerateExtensionError(
                f"kernel at {new.center} (order {new.order}) is numerically spanned: residual norm^2 {float(norm2):.3e}"
            )
        c_hat[n] = r / np.sqrt(norm2)
        c_hat[n, n] = c_hat[n, n].real

        coeffs = c_hat / nu[None, :]
        return BROSystem(self.space, params, coeffs, gram, self.tau_span)

    def _check_index(self, k: int):
        if not 1 <= k <= len(self):
            raise IndexError(f"B index {k} out of range 1..{len(self)}")

    def kernel_values(self, z, n: int = 0, dtype=complex) -> np.ndarray:
        """``n``-th z-derivative of every kernel at ``z``: shape ``z.shape + (len,)``."""
        z = np.asarray(z, dtype=complex)
        cols = [kernel_derivative(self.space, r.center, r.order, z, n, dtype=dtype) for r in self.refs]
        if not cols:
            return np.zeros(z.shape + (0,), dtype=dtype)
        return np.stack(cols, axis=-1)

    def eval_all(self, z, n: int = 0) -> np.ndarray:
        """``B_1..B_len`` (or their n-th derivatives) at ``z``, last axis indexes ``B``."""
        self.space.check_interior(z)
        return self.kernel_values(z, n) @ self.coeffs.T

    def eval_B(self, k: int, z):
        self._check_index(k)
        self.space.check_interior(z)
        row = self.coeffs[k - 1, :k]
        total = 0.0
        for c, ref in zip(row, self.refs[:k]):
            total = total + c * kernel_eval(self.space, ref, z)
        return total

    def kernel_pairings(self, f: TargetFunction) -> np.ndarray:
        return np.array([complex(kernel_pairing(f, r.center, r.order)) for r in self.refs], dtype=complex)

    def projections(self, f: TargetFunction) -> np.ndarray:
        """``<f, B_k>`` for all k."""
        return (np.conj(self.coeffs_ext) @ self.kernel_pairings(f)).astype(complex)

    def project(self, f: TargetFunction, k: int) -> complex:
        self._check_index(k)
        pair = self.kernel_pairings(f)[:k]
        return complex(np.conj(self.coeffs_ext[k - 1, :k]) @ pair)

    def _basis_gram_ext(self) -> np.ndarray:
        return self.coeffs_ext @ self.gram_ext @ np.conj(self.coeffs_ext).T

    def basis_gram(self) -> np.ndarray:
        """``<B_p, B_q>`` computed algebraically from ``C`` and the kernel Gram."""
        return self._basis_gram_ext().astype(complex)

    def roundoff_estimate(self, k: int = None) -> float:
        """Relative rounding error of ``<f, B_k>`` in units of ``||f||``.

        The pairings ``f^(m)(a_j)`` enter in double precision and are bounded
        by ``||f|| ||k~_j||``, so the error is ``eps * ||C_hat[k]||_1`` where
        ``C_hat`` are the coefficients over unit-normalized kernels.
        """
        k = len(self) if k is None else k
        self._check_index(k)
        nu = np.sqrt(np.real(np.diag(self.gram))[:k])
        return float(np.finfo(float).eps * np.sum(np.abs(self.coeffs[k - 1, :k]) * nu))

    def orthonormality_defect(self) -> float:
        if len(self) == 0:
            return 0.0
        return float(np.max(np.abs(self._basis_gram_ext() - np.eye(len(self)))))

    def cross_gram(self, other: "BROSystem") -> np.ndarray:
        """``<B_p, B'_q>`` between two systems over the same space."""
        g = gram_matrix(self.space, self.refs, other.refs, dtype=EXT)
        return (self.coeffs_ext @ g @ np.conj(other.coeffs_ext).T).astype(complex)

    def invariant_subspace_kernel(self, w: complex):
        """``z -> k_w(z) - sum_k <k_w, B_k> B_k(z)``.

        This is the reproducing kernel at ``w`` of the functions vanishing on
        the parameters with their multiplicities.
        """
        self.space.check_interior(w, "point")
        if self.params.match(complex(w)) is not None:
            raise ValueError(f"{w} coincides with a parameter; use extend for the limit case")
        w_ref = KernelRef(w, 0)
        # <k_w, B_k> = conj(B_k(w))
        weights = np.conj(self.eval_all(np.asarray(w))) if len(self) else np.zeros(0)

        def kernel(z):
            z = np.asarray(z, dtype=complex)
            out = kernel_derivative(self.space, w_ref.center, 0, z)
            if len(self):
                out = out - self.eval_all(z) @ weights
            return out

        return kernel

    def to_json(self) -> dict:
        return {
            "space": self.space.to_json(),
            "params": [[p.real, p.imag] for p in self.params.points],
            "multiplicities": list(self.params.multiplicities),
            "coeffs": [[[c.real, c.imag] for c in row] for row in self.coeffs],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, data: dict) -> "BROSystem":
        space = Space.from_json(data["space"])
        sys = cls.from_points(space, [complex(re, im) for re, im in data["params"]])
        if list(sys.params.multiplicities) != list(data["multiplicities"]):
            raise ValueError("stored multiplicities disagree with the parameter list")
        return sys
