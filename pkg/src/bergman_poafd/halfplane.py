"""Upper half-plane specializations.

The kernel of the unweighted half-plane Bergman space is
``k_w(z) = -(z - conj(w))^-2``; its ``m``-th derivative in ``conj(w)`` is
``-(m + 1)! (z - conj(w))^-(m + 2)``.
"""

from __future__ import annotations

import numpy as np

from .funcspace import TargetFunction
from .kernels import DomainError, KernelRef, Space, kernel_derivative
from .poafd import Decomposition, SelectionConfig, decompose

HALF_PLANE = Space.half_plane()


def hp_kernel_eval(ref: KernelRef, z):
    if ref.center.imag <= 0:
        raise DomainError("kernel centers must lie in the upper half-plane")
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise DomainError("evaluation points must lie in the upper half-plane")
    return kernel_derivative(HALF_PLANE, ref.center, ref.order, z)


def hp_boundary_band(delta: float, R: float):
    """Predicate that is True for points kept by selection grids.

    The excluded band is ``{Im b < delta} U {|b| > R}``.
    """
    if not 0 < delta < R:
        raise ValueError("need 0 < delta < R")

    def keep(b):
        b = np.asarray(b, dtype=complex)
        return (b.imag >= delta) & (np.abs(b) <= R)

    return keep


def hp_decompose(f: TargetFunction, cfg: SelectionConfig = None, n_iter: int = 10, **kw) -> Decomposition:
    """Maximal-selection decomposition in the half-plane space."""
    return decompose(f, HALF_PLANE, cfg or SelectionConfig(), n_iter, **kw)
