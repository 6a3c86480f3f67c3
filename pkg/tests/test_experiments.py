import json

import numpy as np
import pytest

from bergman_poafd import cli
from bergman_poafd.experiments import (
    CSV_COLUMNS,
    ConfigError,
    emit_report,
    fourier_baseline,
    load_config,
    report_csv,
    run_experiment,
    validate_config,
)
from bergman_poafd.funcspace import BlackBox, KernelMix, TaylorSeries
from bergman_poafd.kernels import Space
from bergman_poafd.quadrature import AreaQuadrature
from bergman_poafd.targets import (
    blaschke,
    chirp,
    poly_decay,
    random_disc_points,
    singular_inner,
    target_from_json,
)

D0 = Space.disc(0.0)
SMALL = {
    "name": "small",
    "space": {"geometry": "disc", "alpha": 0},
    "target": {"type": "builtin", "name": "poly_decay", "exponent": 2, "degree": 6},
    "method": "both",
    "n_iter": 3,
    "selection": {"n_radii": 16, "n_angles": 32},
    "figures": False,
}


class TestFourierBaseline:
    def test_exact_monomial(self):
        d = fourier_baseline(TaylorSeries([0, 0, 0, 1]), D0, 4)
        assert d.iterations[-1].residual_energy == pytest.approx(0.0, abs=1e-16)

    def test_kernel_tail(self):
        f = KernelMix.of_points(D0, [1.0], [0.5])
        d = fourier_baseline(f, D0, 10)
        # e_a = (1 - |a|^2) sum (k + 1) conj(a)^k z^k and ||z^k||^2 = 1/(k + 1)
        k = np.arange(10, 400)
        tail = 0.75**2 * np.sum((k + 1) * 0.25**k)
        assert d.iterations[-1].residual_energy == pytest.approx(tail, rel=1e-10)

    def test_monomials_orthogonal(self):
        g = AreaQuadrature(D0).gram([lambda z, k=k: z**k for k in range(5)])
        assert np.max(np.abs(g - np.diag(np.diag(g)))) <= 1e-10

    def test_rejects_blackbox(self):
        with pytest.raises(TypeError):
            fourier_baseline(BlackBox(lambda z: z, D0), D0, 3)

    def test_rejects_half_plane(self):
        with pytest.raises(ValueError):
            fourier_baseline(TaylorSeries([1.0]), Space.half_plane(), 3)

    def test_reconstruction(self):
        f = poly_decay()
        d = fourier_baseline(f, D0, 11)
        z = np.array([0.3, -0.2 + 0.5j])
        np.testing.assert_allclose(d.reconstruct(z), f(z), rtol=1e-13)


class TestTargets:
    def test_blaschke_unimodular_on_circle(self):
        zeros = random_disc_points(10, 0)
        f = blaschke(zeros)
        assert np.max(np.abs(f(zeros))) <= 1e-10
        t = np.exp(1j * np.linspace(0, 2 * np.pi, 50))
        assert np.all(np.abs(f(0.999 * t)) < 1.0)
        np.testing.assert_allclose(np.abs(f((1 - 1e-9) * t)), 1.0, atol=1e-6)

    def test_chirp_boundary_real_part(self):
        f = chirp()
        t = np.linspace(-3.0, 3.0, 7)
        # Re of the analytic signal reproduces the real signal up to its mean
        mean = np.real(f.coeffs[0])
        vals = np.real(2 * f(0.99999 * np.exp(1j * t)) - f.coeffs[0]) - mean
        assert f.label == "chirp (embedded)"
        assert np.max(np.abs(vals - (np.cos(t**2) - mean))) < 0.1

    def test_singular_inner_bounded(self):
        f = singular_inner(128)
        assert np.max(np.abs(f(0.5 * np.exp(1j * np.linspace(0, 6, 20))))) <= 1.0 + 1e-6

    def test_from_json(self):
        f = target_from_json({"type": "taylor", "coeffs": [[1, 0], [0, 1]]}, D0)
        assert f.deriv(0.0, 1) == pytest.approx(1j)
        g = target_from_json({"type": "kernelmix", "terms": [{"coef": [1, 0], "center": [0.5, 0]}]}, D0)
        assert g.deriv(0.0, 0) == pytest.approx(0.75)
        with pytest.raises(ValueError):
            target_from_json({"type": "builtin", "name": "nope"}, D0)


class TestConfig:
    def test_defaults(self):
        cfg = validate_config({"space": {"geometry": "disc"}, "target": SMALL["target"], "n_iter": 2})
        assert cfg["method"] == "both" and cfg["seed"] == 0 and cfg["fourier_terms"] == 2

    @pytest.mark.parametrize(
        "bad",
        [
            {"n_iter": 0},
            {"method": "wavelet"},
            {"unknown_key": 1},
            {"space": {"geometry": "half_plane"}, "method": "fourier"},
        ],
    )
    def test_rejections(self, bad):
        with pytest.raises(ConfigError):
            validate_config({**SMALL, **bad})

    def test_load_missing(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "none.json")

    def test_load_invalid_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{")
        with pytest.raises(ConfigError):
            load_config(p)


class TestReport:
    def test_empty_csv_is_header_only(self):
        assert report_csv([]) == ",".join(CSV_COLUMNS) + "\n"

    def test_two_methods_sorted(self):
        result = run_experiment(validate_config(SMALL))
        lines = report_csv(result.runs[0].decompositions).splitlines()
        methods = [line.split(",")[1] for line in lines[1:]]
        assert methods == sorted(methods)
        ks = [int(line.split(",")[0]) for line in lines[1:] if ",poafd," in line]
        assert ks == sorted(ks)

    def test_alpha_grid_files(self, tmp_path):
        cfg = validate_config({**SMALL, "alpha_grid": [-1.0, 0.0, 1.0], "method": "poafd"})
        paths = emit_report(run_experiment(cfg), tmp_path)
        names = sorted(p.name for p in paths if p.suffix == ".csv" and "reconstruction" not in p.name)
        assert names == ["small_alpha=-1.csv", "small_alpha=0.csv", "small_alpha=1.csv", "small_matrix.csv"]
        # the alpha = -1 grid point is outside the family and yields a header-only CSV
        assert (tmp_path / "small_alpha=-1.csv").read_text() == ",".join(CSV_COLUMNS) + "\n"

    def test_deterministic(self, tmp_path):
        cfg = validate_config(SMALL)
        for sub in ("a", "b"):
            emit_report(run_experiment(cfg), tmp_path / sub)
        for name in ("small.csv", "small.json", "small_reconstruction.csv", "small.gp"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_lf_line_endings_and_gnuplot_references(self, tmp_path):
        paths = emit_report(run_experiment(validate_config(SMALL)), tmp_path)
        text = (tmp_path / "small.csv").read_bytes()
        assert b"\r" not in text
        gp = (tmp_path / "small.gp").read_text()
        emitted = {p.name for p in paths}
        for token in gp.split("'"):
            if token.endswith(".csv"):
                assert token in emitted

    def test_relative_error_from_bookkeeping(self):
        d = run_experiment(validate_config(SMALL)).runs[0].decompositions[0]
        rel = d.relative_errors()
        np.testing.assert_allclose(rel**2 * d.norm_squared, d.residual_energies, rtol=1e-12)


class TestCli:
    def write(self, tmp_path, doc):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(doc))
        return p

    def test_run_success(self, tmp_path, capsys):
        p = self.write(tmp_path, SMALL)
        assert cli.main(["run", str(p), "--out", str(tmp_path / "out"), "--seed", "3"]) == 0
        assert (tmp_path / "out" / "small.csv").exists()
        assert "small.csv" in capsys.readouterr().out

    def test_config_error_exit_code(self, tmp_path):
        p = self.write(tmp_path, {**SMALL, "n_iter": -1})
        assert cli.main(["run", str(p)]) == 2

    def test_missing_file_exit_code(self, tmp_path):
        assert cli.main(["run", str(tmp_path / "missing.json")]) == 2

    def test_bad_threads(self, tmp_path):
        p = self.write(tmp_path, SMALL)
        assert cli.main(["run", str(p), "--threads", "0"]) == 2

    def test_numerical_failure_exit_code(self, tmp_path):
        # f_beta with beta = 0 has infinite norm in A^2_1
        doc = {**SMALL, "space": {"geometry": "disc", "alpha": 1}, "method": "poafd",
               "target": {"type": "builtin", "name": "f_beta", "beta": 0}}
        assert cli.main(["run", str(self.write(tmp_path, doc)), "--out", str(tmp_path)]) == 3

    def test_probe_membership(self, capsys):
        assert cli.main(["probe", "membership", "--beta", "0", "--alpha", "3"]) == 0
        assert "member" in capsys.readouterr().out

    def test_probe_inclusion_json(self, capsys):
        assert cli.main(["probe", "inclusion", "--alpha1", "0", "--alpha2", "1", "--json"]) == 0
        assert json.loads(capsys.readouterr().out)["separates"] is True

    def test_probe_classify(self, capsys):
        assert cli.main(["probe", "classify", "--beta", "-2"]) == 0
        assert "True" in capsys.readouterr().out
