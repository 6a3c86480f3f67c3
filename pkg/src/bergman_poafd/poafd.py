"""Pre-orthogonal adaptive Fourier decomposition.

At step ``n + 1`` the next parameter maximizes ``|<f, B^b_{n+1}>|`` over the
domain, where ``B^b_{n+1}`` orthonormalizes the candidate kernel at ``b``
against ``B_1..B_n``. For a fresh point::

    <f, B^b> = (<f, e_b> - sum_k conj(<e_b, B_k>) <f, B_k>) / sqrt(1 - sum_k |<e_b, B_k>|^2)

At an already selected point the limit is taken with the next derivative
kernel, so existing parameters enter the search as extra candidates. The
residual is never formed as a function: everything is computed from the
coefficient matrix and closed-form kernel pairings.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .funcspace import TargetFunction, kernel_pairing
from .kernels import KernelRef, Space, kernel_derivative, kernel_norm_squared
from .orthosystem import EXT, TAU_COINCIDE, TAU_SPAN, BROSystem, DegenerateExtensionError

log = logging.getLogger(__name__)


class SelectionExhausted(RuntimeError):
    """No candidate improves the approximation (target numerically in span)."""


@dataclass(frozen=True)
class SelectionConfig:
    """Discretization of the sup over the domain.

    Disc grids use ``n_radii`` levels whose distance to the boundary is
    geometric from 1 down to ``boundary_margin``, times ``n_angles`` angles,
    plus the origin. Half-plane grids use ``n_imag`` log-spaced levels in
    ``[hp_delta, hp_radius]`` times ``n_real`` sinh-spaced abscissae in
    ``[-hp_radius, hp_radius]``; points with ``|b| > hp_radius`` are dropped.

    ``tau_near`` is the squared distance from the current span below which a
    fresh candidate scores 0 during selection. Closer candidates lose about
    ``eps / tau_near`` of relative accuracy to cancellation; their limit is
    covered exactly by the derivative candidate at the nearby parameter.
    """

    n_radii: int = 64
    n_angles: int = 256
    n_real: int = 257
    n_imag: int = 64
    hp_delta: float = 1e-3
    hp_radius: float = 100.0
    refine_rounds: int = 2
    refine_points: int = 9
    polish: bool = True
    boundary_margin: float = 1e-3
    max_multiplicity: int = 8
    tau_coincide: float = TAU_COINCIDE
    tau_span: float = TAU_SPAN
    tau_near: float = 1e-6
    threads: int = 1

    def __post_init__(self):
        if min(self.n_radii, self.n_angles, self.n_real, self.n_imag) < 1:
            raise ValueError("selection grid must be nonempty")
        if not self.boundary_margin > 0:
            raise ValueError("boundary_margin must be positive")
        if self.refine_rounds < 0:
            raise ValueError("refine_rounds must be nonnegative")
        if self.refine_points < 2:
            raise ValueError("refine_points must be at least 2")
        if self.tau_near < self.tau_span:
            raise ValueError("tau_near must be at least tau_span")
        if not 0 < self.hp_delta < self.hp_radius:
            raise ValueError("need 0 < hp_delta < hp_radius")

    def grid(self, space: Space) -> tuple:
        """Candidate points and a local spacing estimate for each."""
        if space.is_disc:
            dist = self.boundary_margin ** (np.arange(1, self.n_radii + 1) / self.n_radii)
            radii = 1.0 - dist
            theta = 2.0 * np.pi * np.arange(self.n_angles) / self.n_angles
            pts = (radii[:, None] * np.exp(1j * theta)[None, :]).ravel()
            dr = np.gradient(radii) if self.n_radii > 1 else np.array([radii[0]])
            step = np.maximum(dr[:, None], radii[:, None] * (2.0 * np.pi / self.n_angles)) * np.ones((1, self.n_angles))
            pts = np.concatenate([[0.0 + 0.0j], pts])
            step = np.concatenate([[radii[0]], step.ravel()])
            return pts, step
        imag = np.geomspace(self.hp_delta, self.hp_radius, self.n_imag)
        t = np.linspace(-1.0, 1.0, self.n_real)
        real = self.hp_radius * np.sinh(6.0 * t) / np.sinh(6.0)
        pts = (real[None, :] + 1j * imag[:, None]).ravel()
        dre = np.gradient(real) if self.n_real > 1 else np.ones(1)
        dlog = np.log(self.hp_radius / self.hp_delta) / max(self.n_imag - 1, 1)
        step = np.maximum(np.abs(dre)[None, :], imag[:, None] * dlog).ravel()
        keep = np.abs(pts) <= self.hp_radius
        return pts[keep], step[keep]

    def admissible(self, space: Space, b) -> np.ndarray:
        b = np.asarray(b, dtype=complex)
        if space.is_disc:
            return np.abs(b) <= 1.0 - self.boundary_margin
        return (b.imag >= self.hp_delta) & (np.abs(b) <= self.hp_radius)

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class Iteration:
    point: complex
    multiplicity: int
    coeff: complex
    residual_energy: float
    objective: float = float("nan")


@dataclass
class Decomposition:
    """Record of a run: selected parameters, coefficients, residual energies."""

    space: Space
    target: TargetFunction
    norm_squared: float
    system: BROSystem
    iterations: list = field(default_factory=list)
    stop_reason: str = ""
    method: str = "poafd"

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([it.coeff for it in self.iterations], dtype=complex)

    @property
    def residual_energies(self) -> np.ndarray:
        return np.array([it.residual_energy for it in self.iterations])

    def residual_norms(self) -> np.ndarray:
        """``||f_{k+1}||`` after each iteration."""
        return np.sqrt(np.maximum(self.residual_energies, 0.0))

    def relative_errors(self) -> np.ndarray:
        return self.residual_norms() / math.sqrt(self.norm_squared)

    def iterations_to(self, rel_error: float):
        hits = np.flatnonzero(self.relative_errors() <= rel_error)
        return int(hits[0]) + 1 if hits.size else None

    def kernel_weights(self, n: int = None) -> np.ndarray:
        """Weights ``d`` with ``sum_k coeff_k B_k = sum_j d_j k~_j``."""
        n = len(self.iterations) if n is None else n
        return self.coefficients[:n] @ self.system.coeffs[:n, :n]

    def reconstruct(self, z, n: int = None, deriv: int = 0):
        """Partial sum ``sum_{k<=n} <f, B_k> B_k`` (or its derivative) at ``z``."""
        z = np.asarray(z, dtype=complex)
        self.space.check_interior(z)
        n = len(self.iterations) if n is None else n
        if n == 0:
            return np.zeros(z.shape, dtype=complex)
        return self.system.kernel_values(z, deriv)[..., :n] @ self.kernel_weights(n)

    def independent_residual_energy(self, n: int) -> float:
        """``||f - S_n f||^2`` expanded with the kernel Gram matrix directly.

        Does not assume ``B_k`` orthonormal, so it cross-checks the bookkeeping.
        """
        d = self.coefficients[:n] @ self.system.coeffs_ext[:n, :n]
        refs = self.system.refs[:n]
        pair = np.array([complex(kernel_pairing(self.target, r.center, r.order)) for r in refs])
        cross = np.sum(np.conj(d) * pair)
        s_norm = np.real(d @ self.system.gram_ext[:n, :n] @ np.conj(d))
        return float(self.norm_squared - 2.0 * cross.real + s_norm)

    def residual_derivative(self, b, m: int, n: int = None):
        """``(f - S_n f)^(m)(b)``.

        The partial sum is formed in extended precision: near the boundary
        it is a heavily cancelling sum of large kernel values.
        """
        n = len(self.iterations) if n is None else n
        b = np.asarray(b, dtype=complex)
        self.space.check_interior(b)
        weights = self.coefficients[:n].astype(EXT) @ self.system.coeffs_ext[:n, :n]
        partial = self.system.kernel_values(b, m, dtype=EXT)[..., :n] @ weights
        return (self.target.deriv(b, m) - partial).astype(complex)

    def rate_bound(self, M: float = None) -> list:
        """Rows ``(k, ||f_k||, M/sqrt(k), ok)`` for ``k = 1..n+1`` (``f_1 = f``)."""
        if M is None:
            M = getattr(self.target, "total_variation", None)
        if M is None:
            raise ValueError("rate bound needs M = sum |c_l| of a KernelMix target")
        norms = np.concatenate([[math.sqrt(self.norm_squared)], self.residual_norms()])
        rows = []
        for k, r in enumerate(norms, start=1):
            bound = rate_bound_value(k, M)
            rows.append((k, float(r), bound, bool(r <= bound * (1 + 1e-12))))
        return rows

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "space": self.space.to_json(),
            "target": self.target.label,
            "norm_squared": self.norm_squared,
            "stop_reason": self.stop_reason,
            "iterations": [
                {
                    "k": k,
                    "point": [it.point.real, it.point.imag],
                    "multiplicity": it.multiplicity,
                    "coeff": [it.coeff.real, it.coeff.imag],
                    "residual_energy": it.residual_energy,
                }
                for k, it in enumerate(self.iterations, start=1)
            ],
        }

    def to_csv(self, M: float = None) -> str:
        """Per-iteration ``k, |coeff|, residual_energy, bound``."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["k", "abs_coeff", "residual_energy", "bound"])
        for k, it in enumerate(self.iterations, start=1):
            bound = rate_bound_value(k + 1, M) if M is not None else ""
            writer.writerow([k, repr(abs(it.coeff)), repr(it.residual_energy), repr(bound) if bound != "" else ""])
        return buf.getvalue()


def rate_bound_value(k: int, M: float) -> float:
    """Simplified bound ``M / sqrt(k)`` on ``||f_k||`` (taking every r_l <= 1)."""
    return M / math.sqrt(k)


def rate_bound(d: Decomposition, M: float = None) -> list:
    return d.rate_bound(M)


class _State:
    """Quantities cached across candidate evaluations for a fixed system."""

    def __init__(self, sys: BROSystem, f: TargetFunction, proj=None):
        self.sys = sys
        self.f = f
        self.proj = sys.projections(f) if proj is None else proj

    def objective(self, centers, order: int = 0, tau_span: float = TAU_SPAN) -> np.ndarray:
        """``|<f, B^b>|`` for candidate kernels of one order at many centers."""
        sys, space = self.sys, self.sys.space
        centers = np.asarray(centers, dtype=complex)
        nu = np.sqrt(kernel_norm_squared(space, centers, order))
        f_pair = kernel_pairing(self.f, centers, order) / nu
        n = len(sys)
        if n == 0:
            return np.abs(f_pair)
        # <u_b, k~_j> = z-derivative of the candidate kernel at a_j
        pk = np.stack(
            [kernel_derivative(space, centers, order, r.center, r.order) for r in sys.refs], axis=-1
        ) / nu[..., None]
        e = pk @ np.conj(sys.coeffs).T
        num = f_pair - np.conj(e) @ self.proj
        den2 = 1.0 - np.sum(np.abs(e) ** 2, axis=-1)
        out = np.zeros(centers.shape)
        ok = den2 > tau_span
        out[ok] = np.abs(num[ok]) / np.sqrt(den2[ok])
        return out


def selection_objective(sys: BROSystem, f: TargetFunction, b, cfg: SelectionConfig = None) -> np.ndarray:
    """Objective at fresh point(s) ``b``; zero where the candidate is spanned.

    A point equal to an existing parameter is evaluated with the order-0
    kernel (hence spanned, hence 0); the derivative limit there is what
    :func:`select_next` adds as a separate candidate.
    """
    cfg = cfg or SelectionConfig()
    sys.space.check_interior(b)
    return _State(sys, f).objective(b, 0, cfg.tau_span)


def _chunked(state: _State, pts, cfg: SelectionConfig) -> np.ndarray:
    if cfg.threads <= 1 or pts.size < 4096:
        return state.objective(pts, 0, cfg.tau_near)
    chunks = np.array_split(pts, cfg.threads)
    with ThreadPoolExecutor(cfg.threads) as pool:
        parts = list(pool.map(lambda c: state.objective(c, 0, cfg.tau_near), chunks))
    return np.concatenate(parts)


def _best(values, pts) -> int:
    """Argmax with ties broken by smallest |b| then smallest arg(b)."""
    top = np.max(values)
    tied = np.flatnonzero(values >= top * (1.0 - 1e-13))
    if tied.size == 1:
        return int(tied[0])
    angle = np.mod(np.angle(pts[tied]), 2.0 * np.pi)
    # moduli on one grid ring differ in the last bits
    order = np.lexsort((angle, np.round(np.abs(pts[tied]), 12)))
    return int(tied[order[0]])


def _derivative_candidates(sys: BROSystem, state: _State, cfg: SelectionConfig):
    pts, vals = [], []
    for p, mult in sys.params.distinct().items():
        if mult >= cfg.max_multiplicity:
            continue
        if not cfg.admissible(sys.space, p):
            continue
        pts.append(p)
        vals.append(float(state.objective(np.array([p]), mult, cfg.tau_near)[0]))
    return np.array(pts, dtype=complex), np.array(vals)


def _local_grid(space: Space, center: complex, half: float, npts: int):
    if space.is_disc:
        offs = np.linspace(-half, half, npts)
        return (center + offs[None, :] + 1j * offs[:, None]).ravel()
    # (Re, log Im) coordinates keep local grids inside the half-plane
    offs = np.linspace(-half, half, npts)
    ratio = half / center.imag
    logs = np.linspace(-ratio, ratio, npts)
    return (center.real + offs[None, :] + 1j * center.imag * np.exp(logs)[:, None]).ravel()


def _polish(space: Space, state: _State, cfg: SelectionConfig, start: complex, value: float, h: float):
    """Nelder-Mead on the objective from the refined incumbent."""
    if space.is_disc:
        to_pt = lambda x: complex(x[0], x[1])
        x0 = np.array([start.real, start.imag])
        scale = h
    else:
        to_pt = lambda x: complex(x[0], math.exp(x[1]))
        x0 = np.array([start.real, math.log(start.imag)])
        scale = h / start.imag

    def neg(x):
        b = to_pt(x)
        if not cfg.admissible(space, b):
            return 0.0
        return -float(state.objective(np.array([b]), 0, cfg.tau_near)[0])

    simplex = np.array([x0, x0 + [scale, 0.0], x0 + [0.0, scale]])
    res = minimize(neg, x0, method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": 1e-12, "fatol": 1e-16, "maxiter": 600})
    if -res.fun > value:
        return to_pt(res.x), float(-res.fun)
    return start, value


def select_next(sys: BROSystem, f: TargetFunction, cfg: SelectionConfig = None, state: _State = None) -> tuple:
    """Maximizer of the objective and its value, as ``(point, value)``.

    A point within ``tau_coincide`` of an existing parameter is returned as
    that parameter exactly, so extending by it adds a derivative kernel.
    """
    cfg = cfg or SelectionConfig()
    space = sys.space
    state = state or _State(sys, f)
    pts, step = cfg.grid(space)
    vals = _chunked(state, pts, cfg)
    i = _best(vals, pts)
    best_pt, best_val, h = pts[i], vals[i], step[i]

    for _ in range(cfg.refine_rounds):
        local = _local_grid(space, best_pt, h, cfg.refine_points)
        local = local[cfg.admissible(space, local)]
        if local.size:
            lv = state.objective(local, 0, cfg.tau_near)
            j = _best(lv, local)
            if lv[j] > best_val:
                best_pt, best_val = local[j], lv[j]
        h /= 4.0

    if cfg.polish:
        best_pt, best_val = _polish(space, state, cfg, best_pt, best_val, h)

    dpts, dvals = _derivative_candidates(sys, state, cfg)
    if dvals.size and np.max(dvals) >= best_val:
        j = _best(dvals, dpts)
        best_pt, best_val = dpts[j], dvals[j]

    if not best_val > 0:
        raise SelectionExhausted("objective vanishes on the whole candidate set")
    hit = sys.params.match(complex(best_pt))
    if hit is not None:
        if sys.params.count(hit) >= cfg.max_multiplicity:
            raise SelectionExhausted(f"multiplicity cap {cfg.max_multiplicity} reached at {hit}")
        best_pt = hit
    return complex(best_pt), float(best_val)


def decompose(
    f: TargetFunction,
    space: Space,
    cfg: SelectionConfig = None,
    n_iter: int = 10,
    energy_tol: float = 1e-15,
    norm_squared: float = None,
    roundoff_tol: float = 1e-10,
) -> Decomposition:
    """Run ``n_iter`` maximal-selection steps (fewer if the target is exhausted).

    Stops early when the residual energy drops below ``energy_tol * ||f||^2``,
    when no candidate carries energy, when an extension is degenerate, or
    when clustered parameters make the new ``B_k`` so ill-conditioned that
    the rounding error it brings into the energy bookkeeping,
    ``2 * roundoff_estimate * ||f|| * ||f_k||``, exceeds ``roundoff_tol * ||f||^2``.
    """
    if n_iter < 1:
        raise ValueError("n_iter must be at least 1")
    cfg = cfg or SelectionConfig()
    f.check_space(space)
    nf2 = f.norm_squared(space) if norm_squared is None else norm_squared
    if not (math.isfinite(nf2) and nf2 > 0):
        raise ValueError(f"target norm^2 must be finite and positive, got {nf2}")
    sys = BROSystem.empty(space, cfg.tau_coincide, cfg.tau_span)
    d = Decomposition(space, f, nf2, sys)
    proj = np.zeros(0, dtype=complex)
    energy = nf2
    d.stop_reason = "n_iter reached"
    for k in range(1, n_iter + 1):
        if energy <= energy_tol * nf2:
            d.stop_reason = "converged"
            break
        state = _State(sys, f, proj)
        try:
            b, value = select_next(sys, f, cfg, state)
            new_sys = sys.extend(b)
        except SelectionExhausted as exc:
            d.stop_reason = f"selection exhausted: {exc}"
            break
        except DegenerateExtensionError as exc:
            d.stop_reason = f"degenerate extension: {exc}"
            break
        est = new_sys.roundoff_estimate(k)
        if 2.0 * est * math.sqrt(max(energy, 0.0) * nf2) > roundoff_tol * nf2:
            d.stop_reason = f"ill-conditioned extension at {b} (relative pairing error ~{est:.1e})"
            break
        coeff = new_sys.project(f, k)
        energy = energy - abs(coeff) ** 2
        sys = new_sys
        proj = np.append(proj, coeff)
        d.system = sys
        d.iterations.append(Iteration(sys.params.points[-1], sys.params.multiplicities[-1], coeff, energy, value))
        log.debug("iter %d: b=%s mult=%d |coeff|=%.3e residual=%.3e", k, b, sys.params.multiplicities[-1], abs(coeff), energy)
    return d


def reconstruct(d: Decomposition, z):
    return d.reconstruct(z)


def decomposition_json(d: Decomposition) -> str:
    return json.dumps(d.to_json(), indent=2, sort_keys=True)
