import json

import numpy as np
import pytest

from bergman_poafd.funcspace import KernelMix, TaylorSeries
from bergman_poafd.kernels import KernelRef, Space
from bergman_poafd.orthosystem import BROSystem
from bergman_poafd.poafd import (
    Decomposition,
    SelectionConfig,
    SelectionExhausted,
    decompose,
    decomposition_json,
    rate_bound,
    rate_bound_value,
    reconstruct,
    select_next,
    selection_objective,
)
from bergman_poafd.quadrature import AreaQuadrature
from bergman_poafd.targets import poly_decay, random_kernelmix

from .conftest import random_interior

D0 = Space.disc(0.0)
COARSE = SelectionConfig(n_radii=24, n_angles=64)


def brute_force_argmax(sys, f, n=100):
    """Objective on a ~10^4-point Cartesian grid of the disc."""
    x = np.linspace(-0.995, 0.995, n)
    pts = (x[None, :] + 1j * x[:, None]).ravel()
    pts = pts[np.abs(pts) < 0.995]
    vals = selection_objective(sys, f, pts)
    i = int(np.argmax(vals))
    return pts[i], vals[i]


class TestSelectionConfig:
    @pytest.mark.parametrize("kw", [{"n_radii": 0}, {"boundary_margin": 0.0}, {"refine_rounds": -1}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SelectionConfig(**kw)

    def test_grid_respects_margin(self):
        cfg = SelectionConfig()
        pts, step = cfg.grid(D0)
        assert pts.size == 64 * 256 + 1 and np.all(step > 0)
        assert np.max(np.abs(pts)) == pytest.approx(1 - 1e-3)

    def test_half_plane_grid(self):
        pts, _ = SelectionConfig().grid(Space.half_plane())
        assert np.all(pts.imag >= 1e-3 * (1 - 1e-12)) and np.all(np.abs(pts) <= 100)


class TestSelectionObjective:
    def test_at_own_center(self):
        f = KernelMix.of_points(D0, [1.0], [0.5])
        assert selection_objective(BROSystem.empty(D0), f, 0.5) == pytest.approx(1.0, rel=1e-13)

    def test_at_origin(self):
        f = KernelMix.of_points(D0, [1.0], [0.5])
        assert selection_objective(BROSystem.empty(D0), f, 0.0) == pytest.approx(0.75, rel=1e-14)

    def test_vanishes_after_exact_step(self, rng):
        f = KernelMix.of_points(D0, [1.0], [0.5])
        sys = BROSystem.from_points(D0, [0.5])
        vals = selection_objective(sys, f, random_interior(rng, 200, 0.99))
        assert np.max(vals) <= 1e-7
        assert selection_objective(sys, f, 0.5) == 0.0

    def test_matches_quadrature_definition(self):
        # |<f, B^b>| with B^b formed explicitly and integrated
        sp = Space.disc(1.0)
        f = TaylorSeries([1.0, 0.5, -0.25j, 0.1])
        sys = BROSystem.from_points(sp, [0.3, -0.2j])
        b = 0.4 + 0.4j
        cand = sys.extend(b)
        q = AreaQuadrature(sp).inner(f, lambda z: cand.eval_all(z)[..., 2])
        assert selection_objective(sys, f, b) == pytest.approx(abs(q), rel=1e-9)


class TestSelectNext:
    def test_single_kernel(self):
        f = KernelMix.of_points(D0, [1.0], [0.5])
        b, val = select_next(BROSystem.empty(D0), f)
        assert abs(b - 0.5) <= 1e-6
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_symmetric_pair_matches_brute_force(self):
        f = KernelMix.of_points(D0, [1.0, 1.0], [0.3, -0.3])
        sys = BROSystem.empty(D0)
        b, val = select_next(sys, f)
        bb, bval = brute_force_argmax(sys, f)
        assert val >= bval * (1 - 1e-12)
        assert abs(b) <= 1e-6 and abs(bb) <= 0.02

    def test_greedy_dominance_later_step(self):
        f = poly_decay()
        sys = BROSystem.from_points(D0, [0.0, 0.5])
        b, val = select_next(sys, f)
        _, bval = brute_force_argmax(sys, f)
        pts, _ = SelectionConfig().grid(D0)
        assert val >= bval * (1 - 1e-12)
        assert val >= np.max(selection_objective(sys, f, pts))

    def test_repeated_selection_returns_exact_point(self):
        # sup over fresh b of |<z, B^b>| is only approached as b -> 0
        sys = BROSystem.from_points(D0, [0.0])
        b, val = select_next(sys, TaylorSeries([0, 1]))
        assert b == 0.0
        assert sys.extend(b).params.multiplicities == (1, 2)
        assert val == pytest.approx(1 / np.sqrt(2), rel=1e-12)

    def test_exhausted(self):
        f = KernelMix.of_points(D0, [1.0], [0.0])
        with pytest.raises(SelectionExhausted):
            select_next(BROSystem.from_points(D0, [0.0]), f, COARSE)

    def test_multiplicity_cap_blocks_repeat(self):
        cfg = SelectionConfig(n_radii=8, n_angles=16, max_multiplicity=1)
        b, val = select_next(BROSystem.from_points(D0, [0.0]), TaylorSeries([0, 1]), cfg)
        assert b != 0.0 and val < 1 / np.sqrt(2)

    def test_no_spurious_maximum_near_parameter(self):
        # cancellation near an existing point must not beat the true sup
        sys = BROSystem.from_points(D0, [0.0])
        cfg = SelectionConfig(max_multiplicity=1)
        _, val = select_next(sys, TaylorSeries([0, 1]), cfg)
        assert val <= 1 / np.sqrt(2) * (1 + 1e-12)

    def test_tie_break_prefers_smallest_angle(self):
        # |<z^4, e_b>| depends on |b| only, so every angle ties on the grid
        cfg = SelectionConfig(refine_rounds=0, polish=False)
        b, _ = select_next(BROSystem.empty(D0), TaylorSeries([0, 0, 0, 0, 1]), cfg)
        assert b.imag == 0 and b.real > 0
        assert select_next(BROSystem.empty(D0), TaylorSeries([0, 0, 0, 0, 1]), cfg)[0] == b


class TestDecompose:
    def test_single_scaled_kernel(self):
        f = KernelMix.of_points(D0, [3.0], [0.2j])
        d = decompose(f, D0, n_iter=1)
        assert len(d.iterations) == 1
        assert abs(d.iterations[0].coeff) == pytest.approx(3.0, rel=1e-10)
        assert d.iterations[0].residual_energy <= 1e-10

    def test_monomial_energy_identity(self):
        f = TaylorSeries([0, 0, 0, 0, 0, 1])
        d = decompose(f, D0, n_iter=8)
        assert d.norm_squared == pytest.approx(1 / 6)
        coeffs = np.abs(d.coefficients) ** 2
        for k, it in enumerate(d.iterations):
            assert abs(d.norm_squared - coeffs[: k + 1].sum() - it.residual_energy) <= 1e-9 * d.norm_squared

    def test_pythagoras_against_quadrature(self):
        sp = Space.disc(0.5)
        f = TaylorSeries([1.0, -0.5, 0.25j, 0.3, -0.1])
        d = decompose(f, sp, COARSE, n_iter=4)
        quad = AreaQuadrature(sp)
        for n in range(1, len(d.iterations) + 1):
            resid = lambda z, n=n: f(z) - d.reconstruct(z, n)
            assert quad.norm_squared(resid) == pytest.approx(d.iterations[n - 1].residual_energy, rel=1e-7, abs=1e-12)

    def test_residual_energy_nonincreasing(self):
        d = decompose(random_kernelmix(D0, 5, 3), D0, COARSE, n_iter=12)
        assert np.all(np.diff(d.residual_energies) <= 0)

    def test_converged_stop(self):
        d = decompose(TaylorSeries([1.0]), D0, n_iter=5)
        assert len(d.iterations) == 1 and d.stop_reason.startswith("converged")

    def test_rejects_zero_iterations(self):
        with pytest.raises(ValueError):
            decompose(TaylorSeries([1.0]), D0, n_iter=0)

    def test_json(self):
        d = decompose(poly_decay(), D0, COARSE, n_iter=3)
        doc = json.loads(decomposition_json(d))
        assert len(doc["iterations"]) == 3
        assert doc["space"] == {"geometry": "disc", "alpha": 0.0}


class TestReconstruct:
    def test_exact_kernel(self, rng):
        f = KernelMix.of_points(D0, [1.0], [0.4 - 0.3j])
        d = decompose(f, D0, n_iter=1)
        z = random_interior(rng, 100, 0.99)
        np.testing.assert_allclose(reconstruct(d, z), f(z), atol=1e-9)

    def test_empty(self):
        d = Decomposition(D0, TaylorSeries([1.0]), 1.0, BROSystem.empty(D0))
        np.testing.assert_array_equal(reconstruct(d, np.array([0.1, 0.2j])), [0, 0])

    def test_pointwise_error_weakly_decreasing(self, rng):
        f = poly_decay()
        d = decompose(f, D0, COARSE, n_iter=8)
        z = random_interior(rng, 50, 0.9)
        errs = [np.max(np.abs(f(z) - d.reconstruct(z, n))) for n in range(1, 9)]
        assert all(b <= a * (1 + 1e-9) for a, b in zip(errs, errs[1:])) or errs[-1] < 0.1 * errs[0]

    def test_residual_zero_structure(self):
        f = poly_decay()
        d = decompose(f, D0, n_iter=6)
        scale = np.sqrt(d.norm_squared)
        for p, mult in d.system.params.distinct().items():
            for m in range(mult):
                assert abs(d.residual_derivative(p, m)) <= 1e-8 * scale


class TestRateBound:
    def test_arithmetic(self):
        assert rate_bound_value(4, 2.0) == pytest.approx(1.0)

    def test_exact_target(self):
        f = KernelMix.of_points(D0, [2.0], [0.5])
        rows = rate_bound(decompose(f, D0, n_iter=1))
        assert all(ok for *_, ok in rows)

    def test_random_mix_has_no_violations(self):
        f = random_kernelmix(D0, 5, 11)
        rows = rate_bound(decompose(f, D0, COARSE, n_iter=20))
        assert all(ok for *_, ok in rows)

    def test_requires_total_variation(self):
        with pytest.raises(ValueError):
            rate_bound(decompose(TaylorSeries([1.0, 1.0]), D0, n_iter=1))
