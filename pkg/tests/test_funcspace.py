import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gamma

from bergman_poafd.funcspace import (
    BlackBox,
    KernelMix,
    NormOverflowError,
    PowerKernel,
    TaylorSeries,
    eval_deriv,
    gamma_multipliers,
    inner,
    kernel_pairing,
    norm_squared,
    project_on_kernel,
)
from bergman_poafd.kernels import DomainError, KernelRef, Space
from bergman_poafd.quadrature import AreaQuadrature

D0 = Space.disc(0.0)


class TestEvalDeriv:
    def test_taylor_at_center(self):
        assert eval_deriv(TaylorSeries([1, 2, 3]), D0, 0.0, 1) == pytest.approx(2.0)

    def test_taylor_rejects_order_past_degree(self):
        with pytest.raises(ValueError):
            eval_deriv(TaylorSeries([1, 2, 3]), D0, 0.1, 3)

    def test_normalized_kernel_mix(self):
        f = KernelMix.of_points(D0, [1.0], [0.5])
        assert eval_deriv(f, D0, 0.0, 0) == pytest.approx(0.75, rel=1e-14)

    def test_blackbox_matches_series(self):
        sp = D0
        bb = BlackBox(lambda z: 1.0 / (1.0 - 0.9 * z) ** 2, sp)
        k = np.arange(61)
        series = TaylorSeries((k + 1) * 0.9**k)
        exact = eval_deriv(series, sp, 0.1, 2)
        assert abs(eval_deriv(bb, sp, 0.1, 2) - exact) <= 1e-8 * abs(exact)

    def test_blackbox_circle_leaving_domain(self):
        bb = BlackBox(lambda z: z, D0)
        with pytest.raises(DomainError, match="radius"):
            bb.deriv(0.9, 1, rho=0.2)

    def test_kernel_pairing_is_zero_past_degree(self):
        f = TaylorSeries([1, 2, 3])
        np.testing.assert_array_equal(kernel_pairing(f, np.array([0.1, 0.2j]), 5), [0, 0])


class TestNorm:
    @pytest.mark.parametrize("alpha", [-0.5, 0.0, 2.0])
    def test_constant(self, alpha):
        assert norm_squared(TaylorSeries([1.0]), Space.disc(alpha)) == 1.0

    def test_z(self):
        assert norm_squared(TaylorSeries([0, 1]), D0) == pytest.approx(0.5)

    def test_scaled_normalized_kernel(self):
        assert norm_squared(KernelMix.of_points(D0, [2.0], [0.3j]), D0) == pytest.approx(4.0, rel=1e-13)

    def test_multipliers_stay_finite_for_large_k(self):
        w = gamma_multipliers(100_001, 3.0)
        assert np.all(np.isfinite(w)) and w[-1] > 0
        # k! Gamma(5) / Gamma(k + 5) = 24 / ((k+1)(k+2)(k+3)(k+4))
        k = 100_000
        assert w[-1] == pytest.approx(24.0 / ((k + 1) * (k + 2) * (k + 3) * (k + 4)), rel=1e-10)

    def test_overflow_reports_index(self):
        c = np.zeros(5, dtype=complex)
        c[3] = 1e200
        with pytest.raises(NormOverflowError, match="index 3"):
            norm_squared(TaylorSeries(c), D0)

    def test_truncated_kernel_series_norm(self):
        for a in (0.3, 0.5j, -0.7):
            f = KernelMix.of_points(D0, [1.0], [a])
            t = TaylorSeries(f.taylor_coefficients(81))
            assert abs(norm_squared(t, D0) - 1.0) <= 1e-6

    @pytest.mark.parametrize("alpha", [0.0, 1.5])
    def test_taylor_norm_matches_quadrature(self, alpha, rng):
        sp = Space.disc(alpha)
        c = rng.normal(size=9) + 1j * rng.normal(size=9)
        f = TaylorSeries(c)
        assert norm_squared(f, sp) == pytest.approx(AreaQuadrature(sp).norm_squared(f), rel=1e-10)

    def test_kernelmix_norm_matches_quadrature(self):
        sp = Space.disc(1.0)
        f = KernelMix(sp, (1.0, -0.5j, 0.3), (KernelRef(0.4), KernelRef(-0.3j, 1), KernelRef(0.2 + 0.2j, 2)))
        assert f.norm_squared(sp) == pytest.approx(AreaQuadrature(sp).norm_squared(f), rel=1e-9)

    def test_power_kernel_norm_matches_series(self):
        sp = Space.disc(1.0)
        f = PowerKernel(0.8, 2.5)
        c = f.taylor_coefficients(4000)
        series = np.sum(gamma_multipliers(4000, 1.0) * np.abs(c) ** 2)
        assert f.norm_squared(sp) == pytest.approx(series, rel=1e-10)

    def test_power_kernel_boundary_norm(self):
        # (1 - z)^-2 with alpha = 3: Gauss sum Gamma(5)Gamma(1)/Gamma(3)^2 = 6
        assert PowerKernel(1.0, 2.0).norm_squared(Space.disc(3.0)) == pytest.approx(6.0, rel=1e-12)
        with pytest.raises(NormOverflowError):
            PowerKernel(1.0, 2.0).norm_squared(Space.disc(2.0))

    def test_kernelmix_rejects_boundary_centre(self):
        with pytest.raises(DomainError):
            KernelMix.of_points(D0, [1.0], [1.0])

    def test_total_variation(self):
        assert KernelMix.of_points(D0, [1.0, -2j], [0.1, 0.2]).total_variation == pytest.approx(3.0)


class TestProjectOnKernel:
    def test_constant(self):
        assert project_on_kernel(TaylorSeries([1.0]), D0, KernelRef(0.4 - 0.2j)) == pytest.approx(1.0)

    def test_derivative_at_zero(self):
        assert project_on_kernel(TaylorSeries([0, 0, 1]), D0, KernelRef(0.0, 1)) == 0

    def test_kernel_value(self):
        f = KernelMix.of_points(D0, [1.0], [0.5])
        v = project_on_kernel(f, D0, KernelRef(0.2))
        assert v == pytest.approx(0.75 / 0.81, rel=1e-14)
        q = AreaQuadrature(D0).inner(f, lambda z: 1.0 / (1.0 - 0.2 * z) ** 2)
        assert v == pytest.approx(q, rel=1e-9)

    @given(st.floats(-0.8, 0.8), st.floats(-0.5, 0.5), st.integers(0, 3))
    def test_linearity(self, x, y, m):
        a = complex(x, y)
        if abs(a) >= 0.9:
            return
        f = TaylorSeries([1.0, -2.0, 0.5j, 3.0])
        g = KernelMix.of_points(D0, [0.7, -1j], [0.3, -0.5j])
        ref = KernelRef(a, m)
        lhs = project_on_kernel(f + g, D0, ref)
        rhs = project_on_kernel(f, D0, ref) + project_on_kernel(g, D0, ref)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


class TestInner:
    def test_taylor_kernelmix_by_quadrature(self):
        sp = Space.disc(0.5)
        f = TaylorSeries([1.0, 2.0, -1j, 0.5])
        g = KernelMix.of_points(sp, [1.0, 0.5j], [0.4, -0.6j])
        assert inner(f, g, sp) == pytest.approx(AreaQuadrature(sp).inner(f, g), rel=1e-9)
        assert inner(g, f, sp) == pytest.approx(np.conj(inner(f, g, sp)), rel=1e-14)


class TestCoefficientEquivalence:
    @pytest.mark.parametrize("alpha", [0.0, 1.0, 3.0])
    @pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
    def test_partial_sum_ratio_bounded(self, alpha, s):
        n = 10_001
        k = np.arange(n, dtype=float)
        a2 = (k + 1) ** (-s)
        lhs = np.cumsum(gamma_multipliers(n, alpha) * a2)
        rhs = np.cumsum((k + 1) ** (-(alpha + 1)) * a2)
        ratio = lhs / rhs
        g = gamma(alpha + 2)
        assert ratio.min() >= 1 / (2 * g) and ratio.max() <= 2 * g
