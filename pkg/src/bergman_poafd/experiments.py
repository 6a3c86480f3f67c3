"""Fourier baseline and the experiment runner behind the CLI."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .funcspace import BlackBox, TargetFunction, gamma_multipliers
from .kernels import Space
from .poafd import Decomposition, Iteration, SelectionConfig, decompose
from .orthosystem import BROSystem
from .targets import target_from_json

log = logging.getLogger(__name__)

CSV_COLUMNS = ["k", "method", "abs_coeff", "residual_energy", "rel_error"]
RATE_NOTE = (
    "rate bound column uses M/sqrt(k); the squared form M^2/sqrt(k) also appears "
    "in the literature and is looser whenever M >= 1"
)


class ConfigError(ValueError):
    """The experiment document is malformed."""


@dataclass
class FourierDecomposition(Decomposition):
    """Projection onto the normalized monomials ``z^k / ||z^k||``.

    ``iterations[k]`` holds the ``k``-th coefficient ``<f, z^k>/||z^k||``
    with ``point`` 0 and ``multiplicity`` ``k + 1``.
    """

    taylor: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    method: str = "fourier"

    def reconstruct(self, z, n: int = None, deriv: int = 0):
        z = np.asarray(z, dtype=complex)
        self.space.check_interior(z)
        n = len(self.iterations) if n is None else n
        c = self.taylor[:n]
        return np.polynomial.polynomial.polyval(z, np.polynomial.polynomial.polyder(c, deriv) if deriv else c)


def fourier_baseline(f: TargetFunction, space: Space, n_terms: int, norm_squared: float = None) -> FourierDecomposition:
    """Orthogonal projection onto the first ``n_terms`` monomials.

    The residual energy after ``n`` terms is ``||f||^2 - sum_{k<n} ||z^k||^2 |a_k|^2``,
    with ``||f||^2`` taken from the target's own closed form.
    """
    if isinstance(f, BlackBox):
        raise TypeError("the Fourier baseline needs Taylor coefficients; BlackBox targets are rejected")
    if not space.is_disc:
        raise ValueError("the Fourier baseline is defined on the disc only")
    if n_terms < 0:
        raise ValueError("n_terms must be nonnegative")
    f.check_space(space)
    nf2 = f.norm_squared(space) if norm_squared is None else norm_squared
    a = f.taylor_coefficients(n_terms)
    w = gamma_multipliers(n_terms, space.alpha)
    coeffs = a * np.sqrt(w)
    energies = nf2 - np.cumsum(np.abs(coeffs) ** 2)
    iters = [Iteration(0j, k + 1, complex(c), float(e)) for k, (c, e) in enumerate(zip(coeffs, energies))]
    d = FourierDecomposition(space, f, nf2, BROSystem.empty(space), iters, "n_iter reached", taylor=a)
    return d


def _rows(d: Decomposition) -> list:
    rel = d.relative_errors()
    return [
        [k, d.method, repr(abs(it.coeff)), repr(it.residual_energy), repr(float(r))]
        for k, (it, r) in enumerate(zip(d.iterations, rel), start=1)
    ]


def report_csv(results) -> str:
    """RFC-4180 table sorted by ``(method, k)``."""
    rows = []
    for d in results:
        rows.extend(_rows(d))
    rows.sort(key=lambda r: (r[1], r[0]))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)
    return buf.getvalue()


def summary(d: Decomposition, targets=()) -> dict:
    rel = d.relative_errors()
    return {
        "method": d.method,
        "iterations": len(d.iterations),
        "stop_reason": d.stop_reason,
        "final_rel_error": float(rel[-1]) if rel.size else 1.0,
        "iterations_to": {f"{t:g}": d.iterations_to(t) for t in targets},
    }


CONFIG_SCHEMA = {
    "type": "object",
    "required": ["space", "target", "n_iter"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "space": {
            "type": "object",
            "properties": {
                "geometry": {"enum": ["disc", "half_plane"]},
                "alpha": {"type": "number", "exclusiveMinimum": -1},
            },
            "additionalProperties": False,
        },
        "alpha_grid": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "target": {"type": "object", "required": ["type"]},
        "method": {"enum": ["poafd", "fourier", "both"]},
        "n_iter": {"type": "integer", "minimum": 1},
        "fourier_terms": {"type": "integer", "minimum": 0},
        "error_targets": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
        "match_fourier_at": {"type": "integer", "minimum": 1},
        "selection": {"type": "object"},
        "seed": {"type": "integer", "minimum": 0},
        "output": {"type": "string"},
        "figures": {"type": "boolean"},
    },
}

SEEDED_BUILTINS = {"blaschke", "random_kernelmix"}


@dataclass
class Run:
    """All decompositions for one space of an experiment."""

    space: Space
    decompositions: list
    skipped: str = ""


@dataclass
class ExperimentResult:
    name: str
    config: dict
    runs: list


def validate_config(doc: dict) -> dict:
    """Schema check plus defaults; raises :class:`ConfigError`."""
    import jsonschema

    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {exc.message}") from None
    cfg = {
        "name": "experiment",
        "method": "both",
        "error_targets": [1e-3],
        "selection": {},
        "seed": 0,
        "figures": True,
        **doc,
    }
    cfg.setdefault("fourier_terms", cfg["n_iter"])
    unknown = set(cfg["selection"]) - set(SelectionConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"selection: unknown fields {sorted(unknown)}")
    if cfg["space"].get("geometry", "disc") == "half_plane":
        if cfg["method"] != "poafd":
            raise ConfigError("the Fourier baseline exists on the disc only; use method 'poafd' on the half-plane")
        if "alpha_grid" in cfg:
            raise ConfigError("alpha_grid applies to the disc only")
    # alpha_grid entries <= -1 are kept and reported as skipped rows
    return cfg


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return validate_config(doc)


def _target_doc(cfg: dict) -> dict:
    doc = dict(cfg["target"])
    if doc.get("type") == "builtin" and doc.get("name") in SEEDED_BUILTINS and "zeros" not in doc:
        doc.setdefault("seed", cfg["seed"])
    return doc


def _spaces(cfg: dict) -> list:
    base = cfg["space"]
    if base.get("geometry", "disc") == "half_plane":
        return [Space.half_plane()]
    grid = cfg.get("alpha_grid")
    if grid is None:
        return [Space.disc(base.get("alpha", 0.0))]
    return list(grid)


def run_experiment(cfg: dict, threads: int = None) -> ExperimentResult:
    """Execute a validated config; returns every decomposition per space."""
    sel = dict(cfg["selection"])
    if threads is not None:
        sel["threads"] = threads
    try:
        selection = SelectionConfig(**sel)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"selection: {exc}") from None
    methods = ["poafd", "fourier"] if cfg["method"] == "both" else [cfg["method"]]
    runs = []
    for entry in _spaces(cfg):
        if not isinstance(entry, Space):
            if entry <= -1:
                runs.append(Run(None, [], skipped=f"alpha={entry:g} is not > -1"))
                continue
            entry = Space.disc(entry)
        space = entry
        try:
            target = target_from_json(_target_doc(cfg), space)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"target: {exc}") from None
        nf2 = target.norm_squared(space)
        decs = []
        for m in methods:
            log.info("%s: %s on %s", cfg["name"], m, space.to_json())
            if m == "poafd":
                decs.append(decompose(target, space, selection, cfg["n_iter"], norm_squared=nf2))
            else:
                decs.append(fourier_baseline(target, space, cfg["fourier_terms"], norm_squared=nf2))
        runs.append(Run(space, decs))
    return ExperimentResult(cfg["name"], cfg, runs)


def _alpha_tag(space: Space) -> str:
    return "half_plane" if not space.is_disc else f"alpha={space.alpha:g}"


def run_summary(run: Run, cfg: dict) -> dict:
    if run.space is None:
        return {"skipped": run.skipped}
    out = {"space": run.space.to_json(), "methods": {}}
    for d in run.decompositions:
        s = summary(d, cfg["error_targets"])
        if d.method == "poafd":
            s["points"] = [[it.point.real, it.point.imag, it.multiplicity] for it in d.iterations]
            M = getattr(d.target, "total_variation", None)
            if M is not None:
                rows = d.rate_bound(M)
                s["rate_bound"] = {"M": M, "violations": sum(not r[3] for r in rows), "note": RATE_NOTE}
        out["methods"][d.method] = s
    at = cfg.get("match_fourier_at")
    four = next((d for d in run.decompositions if d.method == "fourier"), None)
    poafd = next((d for d in run.decompositions if d.method == "poafd"), None)
    if at and four is not None and poafd is not None and len(four.iterations) >= at:
        ref = float(four.relative_errors()[at - 1])
        out["match_fourier"] = {"fourier_terms": at, "fourier_rel_error": ref, "poafd_iterations": poafd.iterations_to(ref)}
    return out


def matrix_csv(result: ExperimentResult) -> str:
    """One row per (space, method): final error and iterations to each error target."""
    targets = result.config["error_targets"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha", "method", "iterations", "rel_error"] + [f"iterations_to_{t:g}" for t in targets])
    for run, alpha in zip(result.runs, _grid_labels(result)):
        if run.space is None:
            writer.writerow([alpha, "skipped", "", ""] + [""] * len(targets))
            continue
        for d in sorted(run.decompositions, key=lambda d: d.method):
            rel = d.relative_errors()
            hits = [d.iterations_to(t) for t in targets]
            writer.writerow([alpha, d.method, len(d.iterations), repr(float(rel[-1])) if rel.size else ""]
                            + ["" if h is None else h for h in hits])
    return buf.getvalue()


def _grid_labels(result: ExperimentResult) -> list:
    grid = result.config.get("alpha_grid")
    if grid is not None:
        return [f"{a:g}" for a in grid]
    return [_alpha_tag(r.space) if r.space else "" for r in result.runs]


def _probe_points(space: Space, n: int = 256):
    """Abscissa and points for reconstruction plots."""
    if space.is_disc:
        theta = 2.0 * np.pi * np.arange(n) / n
        return theta, 0.95 * np.exp(1j * theta)
    x = np.linspace(-5.0, 5.0, n)
    return x, x + 1j


def reconstruction_csv(run: Run) -> str:
    x, z = _probe_points(run.space)
    target = run.decompositions[0].target if run.decompositions else None
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    methods = sorted(d.method for d in run.decompositions)
    writer.writerow(["x", "target"] + methods)
    cols = [np.real(target(z))] + [np.real(d.reconstruct(z)) for d in sorted(run.decompositions, key=lambda d: d.method)]
    for i, xi in enumerate(x):
        writer.writerow([repr(float(xi))] + [repr(float(c[i])) for c in cols])
    return buf.getvalue()


def gnuplot_script(name: str, csv_files: list, recon_files: list) -> str:
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set terminal pngcairo size 900,600",
        "",
        f"set output '{name}_error.gp.png'",
        "set logscale y",
        "set xlabel 'iteration'",
        "set ylabel 'relative error'",
    ]
    plots = []
    for f in csv_files:
        for m in ("fourier", "poafd"):
            plots.append(f"'{f}' using 1:(strcol(2) eq '{m}' ? $5 : 1/0) with linespoints title '{f} {m}'")
    lines.append("plot " + ", \\\n     ".join(plots) if plots else "# no data")
    lines += ["", "unset logscale y", "set xlabel 'x'", "set ylabel 'Re f'"]
    for f in recon_files:
        stem = f.rsplit(".", 1)[0]
        lines.append(f"set output '{stem}.gp.png'")
        lines.append(f"stats '{f}' skip 1 nooutput")
        lines.append(f"plot for [c=2:STATS_columns] '{f}' using 1:c with lines")
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def emit_report(result: ExperimentResult, out_dir, figures: bool = None) -> list:
    """Write CSVs, the JSON summary, the gnuplot script and (optionally) PNG figures.

    Returns the written paths. Single-space runs produce ``<name>.csv``;
    alpha grids produce one CSV per grid point plus ``<name>_matrix.csv``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = result.name
    figures = result.config.get("figures", True) if figures is None else figures
    written, csv_files, recon_files = [], [], []
    gridded = "alpha_grid" in result.config

    for run, label in zip(result.runs, _grid_labels(result)):
        stem = f"{name}_alpha={label}" if gridded else name
        p = out / f"{stem}.csv"
        _write(p, report_csv(run.decompositions))
        written.append(p)
        csv_files.append(p.name)
        if run.space is not None and run.decompositions:
            r = out / f"{stem}_reconstruction.csv"
            _write(r, reconstruction_csv(run))
            written.append(r)
            recon_files.append(r.name)
    if not result.runs:
        p = out / f"{name}.csv"
        _write(p, report_csv([]))
        written.append(p)
        csv_files.append(p.name)
    if gridded:
        p = out / f"{name}_matrix.csv"
        _write(p, matrix_csv(result))
        written.append(p)

    doc = {
        "name": name,
        "config": result.config,
        "relative_error": "||f - S_n f|| / ||f|| in the space norm, from residual energies",
        "runs": [run_summary(r, result.config) for r in result.runs],
    }
    p = out / f"{name}.json"
    _write(p, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    written.append(p)
    p = out / f"{name}.gp"
    _write(p, gnuplot_script(name, csv_files, recon_files))
    written.append(p)

    if figures:
        from .plotting import error_figure, reconstruction_figure

        written.append(error_figure(result, out / f"{name}_error.png"))
        for run, label in zip(result.runs, _grid_labels(result)):
            if run.space is not None and run.decompositions:
                stem = f"{name}_alpha={label}" if gridded else name
                written.append(reconstruction_figure(run, out / f"{stem}_reconstruction.png"))
    return written
