"""Weighted Bergman membership analytics.

Everything here works on Taylor coefficients. The weighted norm of
``sum a_k z^k`` is ``sum k! Gamma(alpha + 2)/Gamma(k + alpha + 2) |a_k|^2``,
and the same multipliers with a regularized incomplete Beta factor give the
norm restricted to a disc of radius ``r``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import betainc, gammaln

from .funcspace import gamma_multipliers

SLOPE_BAND = 0.15
DEFAULT_RADII = tuple(1.0 - 2.0 ** -j for j in range(1, 13))


def coefficient_norm(coeffs, alpha: float, mode: str = "exact_gamma") -> float:
    """``sum multiplier(k) |a_k|^2`` with the exact or the power-law multiplier."""
    if alpha <= -1:
        raise ValueError("alpha must exceed -1")
    a2 = np.abs(np.asarray(coeffs, dtype=complex)) ** 2
    if mode == "exact_gamma":
        w = gamma_multipliers(a2.size, alpha)
    elif mode == "power_equiv":
        w = (np.arange(a2.size) + 1.0) ** (-(alpha + 1.0))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return float(np.sum(w * a2))


@dataclass(frozen=True)
class FBetaClass:
    """Where ``(1 - z)^-(2 + beta)`` lives."""

    beta: float
    hardy: bool
    all_bergman: bool
    alpha_threshold: float = None

    def in_bergman(self, alpha: float) -> bool:
        if alpha <= -1:
            raise ValueError("alpha must exceed -1")
        if self.all_bergman:
            return True
        return alpha > self.alpha_threshold

    @property
    def description(self) -> str:
        if self.all_bergman:
            return "every alpha > -1"
        return f"alpha > {self.alpha_threshold:g}"

    def to_json(self) -> dict:
        return {**asdict(self), "bergman_alphas": self.description}


def classify_f_beta(beta: float) -> FBetaClass:
    if beta < -1.5:
        return FBetaClass(beta, hardy=True, all_bergman=True)
    if beta == -1.5:
        return FBetaClass(beta, hardy=False, all_bergman=True)
    return FBetaClass(beta, hardy=False, all_bergman=False, alpha_threshold=2.0 + 2.0 * beta)


def f_beta_coefficients(beta: float, n: int) -> np.ndarray:
    """Taylor coefficients ``(s)_k / k!`` of ``(1 - z)^-s``, ``s = 2 + beta``."""
    s = 2.0 + beta
    if s > 0:
        k = np.arange(n, dtype=float)
        return np.exp(gammaln(s + k) - gammaln(s) - gammaln(k + 1.0))
    ratios = (s + np.arange(n - 1)) / (np.arange(n - 1) + 1.0)
    return np.concatenate([[1.0], np.cumprod(ratios)])


def _slope(x, y) -> float:
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class MembershipReport:
    beta: float
    alpha: float
    radii: list
    partial_integrals: list
    increments: list
    flagged: list
    fitted_slope: float
    predicted_slope: float
    verdict: str
    expected: bool
    agrees: bool

    def to_json(self) -> dict:
        return asdict(self)


def _increment_terms(n_terms: int, alpha: float, y_hi: float, y_lo: float) -> np.ndarray:
    """``int_{sqrt(1-y_hi) < |z| < sqrt(1-y_lo)} |z^k|^2 dA_alpha / ||z^k||^2``.

    Written with the complementary incomplete Beta in ``y = 1 - r^2`` so
    shells near the boundary keep full relative precision.
    """
    k = np.arange(n_terms, dtype=float)
    return betainc(alpha + 1.0, k + 1.0, y_hi) - betainc(alpha + 1.0, k + 1.0, y_lo)


def membership_probe(beta: float, alpha: float, radii=DEFAULT_RADII, n_fit: int = 6, terms_per_gap: float = 60.0) -> MembershipReport:
    """Growth of ``int_{|z|<r} |f_beta|^2 dA_alpha`` as ``r -> 1``.

    Shell increments between consecutive radii behave like
    ``(1 - r)^(alpha - 2 - 2 beta)`` when ``beta > -3/2``; a positive fitted
    exponent means the integral stays bounded. The exponent is fitted by
    least squares over the last ``n_fit`` radii.
    """
    if alpha <= -1:
        raise ValueError("alpha must exceed -1")
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size < max(n_fit, 2) or np.any(np.diff(radii) <= 0) or radii[0] <= 0 or radii[-1] >= 1:
        raise ValueError("radii must increase inside (0, 1) with at least n_fit entries")
    n_terms = int(terms_per_gap / (1.0 - radii[-1])) + 64
    w = gamma_multipliers(n_terms, alpha) * f_beta_coefficients(beta, n_terms) ** 2

    y = np.concatenate([[1.0], 1.0 - radii**2])
    increments, flagged = [], []
    for j in range(radii.size):
        with np.errstate(all="ignore"):
            val = float(np.sum(w * _increment_terms(n_terms, alpha, y[j], y[j + 1])))
        flagged.append(not (math.isfinite(val) and val > 0))
        increments.append(val)
    increments = np.array(increments)
    partial = np.cumsum(increments)

    tail = slice(radii.size - n_fit, radii.size)
    ok = ~np.array(flagged)[tail]
    slope = _slope(np.log(1.0 - radii[tail][ok]), np.log(increments[tail][ok])) if ok.sum() >= 2 else float("nan")

    cls = classify_f_beta(beta)
    predicted = alpha - 2.0 - 2.0 * beta if beta > -1.5 else alpha + 1.0
    if slope > SLOPE_BAND:
        verdict = "member"
    elif slope < -SLOPE_BAND:
        verdict = "not member"
    else:
        verdict = "indeterminate"
    expected = cls.in_bergman(alpha)
    agrees = verdict == "indeterminate" or (verdict == "member") == expected
    return MembershipReport(
        beta, alpha, radii.tolist(), partial.tolist(), increments.tolist(), flagged,
        slope, predicted, verdict, expected, agrees,
    )


@dataclass
class SeriesVerdict:
    """Convergence probe of ``sum multiplier(k) |a_k|^2`` at one level."""

    level: str
    partial_sum: float
    term_exponent: float
    verdict: str
    crossed_threshold: bool
    cauchy_gap: float


@dataclass
class InclusionReport:
    alpha1: float
    alpha2: float
    witness_exponent: float
    horizon: int
    threshold: float
    lower: SeriesVerdict
    upper: SeriesVerdict
    separates: bool
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def _multipliers(level, n: int) -> np.ndarray:
    if level == "hardy":
        return np.ones(n)
    return gamma_multipliers(n, float(level))


def series_probe(sq_coeffs, level, threshold: float = 1e3, margin: float = 0.05) -> SeriesVerdict:
    """Judge ``sum w_k |a_k|^2`` from the power-law decay of its terms.

    Terms decaying like ``k^-p`` converge iff ``p > 1``. ``p`` is fitted over
    the last decade of indices; the verdict is ``"converges"`` for
    ``p > 1 + margin``, ``"diverges"`` for ``p <= 1 + margin/5`` and
    ``"indeterminate"`` in between. Partial sums, the threshold crossing and
    the Cauchy gap ``S_K - S_{K/2}`` are reported alongside.
    """
    sq = np.asarray(sq_coeffs, dtype=float)
    n = sq.size
    terms = _multipliers(level, n) * sq
    sums = np.cumsum(terms)
    k = np.arange(n) + 1.0
    lo = max(n // 10, 1)
    p = -_slope(np.log(k[lo:]), np.log(terms[lo:]))
    if p > 1.0 + margin:
        verdict = "converges"
    elif p <= 1.0 + margin / 5.0:
        verdict = "diverges"
    else:
        verdict = "indeterminate"
    return SeriesVerdict(
        "hardy" if level == "hardy" else f"alpha={float(level):g}",
        float(sums[-1]), p, verdict, bool(np.any(sums > threshold)), float(sums[-1] - sums[n // 2 - 1]),
    )


def inclusion_probe(alpha1, alpha2, witness_exponent: float = None, horizon: int = 10**5, threshold: float = 1e3) -> InclusionReport:
    """Witness ``|a_k|^2 = (k + 1)^-witness_exponent`` separating two levels.

    ``alpha1`` may be ``"hardy"`` (multiplier 1). The default witness
    exponent ``1 + delta`` uses ``delta = -1 - (alpha1 + alpha2)/2``, which
    puts the upper level's terms at ``k^-(1 + (alpha2 - alpha1)/2)`` and the
    lower level's at ``k^-(1 - (alpha2 - alpha1)/2)``.
    """
    a1 = -1.0 if alpha1 == "hardy" else float(alpha1)
    if not (-1.0 <= a1 < float(alpha2)):
        raise ValueError("need alpha1 < alpha2")
    if witness_exponent is None:
        witness_exponent = -(a1 + float(alpha2)) / 2.0
    k = np.arange(horizon) + 1.0
    sq = k ** (-witness_exponent)
    lower = series_probe(sq, alpha1, threshold)
    upper = series_probe(sq, alpha2, threshold)
    notes = []
    if lower.verdict == "diverges" and not lower.crossed_threshold:
        notes.append(f"lower-level partial sum {lower.partial_sum:.4g} stays below {threshold:g} by K={horizon}; divergence judged from term exponent")
    if upper.verdict == "converges" and upper.cauchy_gap >= 1e-6:
        notes.append(f"upper-level Cauchy gap {upper.cauchy_gap:.3g} at K={horizon}; convergence judged from term exponent")
    return InclusionReport(
        a1 if alpha1 != "hardy" else "hardy", float(alpha2), float(witness_exponent), horizon, threshold,
        lower, upper, lower.verdict == "diverges" and upper.verdict == "converges", notes,
    )
