"""Zero sequences, Horowitz products and zero-set admissibility probes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from .kernels import DomainError

DEFAULT_EPS_GRID = (0.2, 0.1, 0.05, 0.02, 0.01)


@dataclass(frozen=True)
class RadialLaw:
    """``1 - r_j = scale * j^-power`` for ``j = start, start + 1, ...``."""

    power: float
    scale: float = 1.0
    start: int = 1

    def __post_init__(self):
        if self.power <= 0 or self.scale <= 0:
            raise ValueError("power and scale must be positive")
        if self.start < 1:
            raise ValueError("start index must be >= 1")
        if self.scale * self.start ** (-self.power) > 1.0:
            raise ValueError("first radius would be negative")

    def gaps(self, count: int) -> np.ndarray:
        j = np.arange(self.start, self.start + count, dtype=float)
        return self.scale * j ** (-self.power)

    def radii(self, count: int) -> np.ndarray:
        return 1.0 - self.gaps(count)

    def tail_sum(self, exponent: float, after: int) -> float:
        """``sum_{j > start + after - 1} (1 - r_j)^exponent`` in closed form (Hurwitz zeta)."""
        p = self.power * exponent
        if p <= 1.0:
            return math.inf
        return float(self.scale**exponent * zeta(p, self.start + after))

    def to_json(self) -> dict:
        return {"power": self.power, "scale": self.scale, "start": self.start}


@dataclass(frozen=True)
class ZeroSequence:
    """Interior points with multiplicities, optionally generated by a radial law."""

    points: tuple
    multiplicities: tuple = None
    law: RadialLaw = None

    def __post_init__(self):
        pts = tuple(complex(p) for p in self.points)
        mult = tuple(int(m) for m in self.multiplicities) if self.multiplicities is not None else (1,) * len(pts)
        if len(mult) != len(pts):
            raise ValueError("one multiplicity per point")
        if any(m < 1 for m in mult):
            raise ValueError("multiplicities must be >= 1")
        if any(abs(p) >= 1.0 for p in pts):
            raise DomainError("zero sequence points must lie in the open unit disc")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "multiplicities", mult)

    @classmethod
    def from_law(cls, law: RadialLaw, count: int, angles: str = "random", seed: int = 0) -> "ZeroSequence":
        r = law.radii(count)
        if angles == "random":
            theta = np.random.default_rng(seed).uniform(0.0, 2.0 * np.pi, count)
        elif angles == "equispaced":
            theta = 2.0 * np.pi * np.arange(count) / count
        elif angles == "real":
            theta = np.zeros(count)
        else:
            raise ValueError(f"unknown angle rule {angles!r}")
        return cls(tuple(r * np.exp(1j * theta)), law=law)

    @classmethod
    def from_json(cls, doc) -> "ZeroSequence":
        """Explicit ``[[re, im], ...]`` / ``{"points": ..., "multiplicities": ...}`` or ``{"law": ..., "count": ..., "seed": ...}``."""
        if isinstance(doc, list):
            return cls(tuple(complex(*p) for p in doc))
        if doc.get("law") and "count" in doc:
            law = RadialLaw(**doc["law"])
            return cls.from_law(law, int(doc["count"]), doc.get("angles", "random"), int(doc.get("seed", 0)))
        law = RadialLaw(**doc["law"]) if doc.get("law") else None
        return cls(tuple(complex(*p) for p in doc["points"]), tuple(doc.get("multiplicities", [1] * len(doc["points"]))), law)

    def to_json(self) -> dict:
        return {
            "points": [[p.real, p.imag] for p in self.points],
            "multiplicities": list(self.multiplicities),
            "law": self.law.to_json() if self.law else None,
        }

    def expanded(self) -> np.ndarray:
        """Points repeated by multiplicity."""
        return np.repeat(np.array(self.points, dtype=complex), self.multiplicities)

    def __len__(self):
        return int(sum(self.multiplicities))


def horowitz_factor(a, z):
    """``(|a|/a) u (2 - (|a|/a) u)`` with ``u = (a - z)/(1 - conj(a) z)``."""
    a = complex(a)
    if a == 0:
        raise ValueError("the Horowitz factor is undefined at a = 0")
    if abs(a) >= 1:
        raise DomainError("a must lie in the open unit disc")
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise DomainError("z must lie in the open unit disc")
    phase = abs(a) / a
    u = phase * (a - z) / (1.0 - np.conj(a) * z)
    return u * (2.0 - u)


def horowitz_product(seq: ZeroSequence, z, n_terms: int = None):
    """Partial product of the first ``n_terms`` factors, repeated per multiplicity."""
    pts = seq.expanded()
    n = pts.size if n_terms is None else n_terms
    if n > pts.size:
        raise ValueError(f"n_terms {n} exceeds the {pts.size} available factors")
    if np.any(pts[:n] == 0):
        raise ValueError("zero sequence contains the origin; the Horowitz factor is undefined there")
    z = np.asarray(z, dtype=complex)
    out = np.ones(z.shape, dtype=complex)
    for a in pts[:n]:
        out = out * horowitz_factor(a, z)
    return out


def zero_condition(seq: ZeroSequence) -> dict:
    """``sum (1 - |a_k|)^2`` with an analytic tail for law-generated sequences."""
    pts = seq.expanded()
    partial = float(np.sum((1.0 - np.abs(pts)) ** 2))
    if seq.law is None:
        return {"sum": partial, "partial": partial, "tail": 0.0, "satisfied": True}
    tail = seq.law.tail_sum(2.0, len(seq))
    total = partial + tail
    return {"sum": total, "partial": partial, "tail": tail, "satisfied": math.isfinite(total)}


def epsilon_condition(law, eps_grid=DEFAULT_EPS_GRID) -> dict:
    """Probe ``limsup_{eps -> 0} sum (1 - r_j)^(1 + eps) / log(1/eps) < 1/4`` on a grid.

    ``law`` is a :class:`RadialLaw` or a finite :class:`ZeroSequence`.
    Since ``(1 - r_j)^(1 + eps) <= 1 - r_j``, a finite ``sum (1 - r_j)``
    forces the ratio to 0 and settles the verdict. Otherwise the verdict
    reads the trend of the ratio toward small ``eps``, a numerical probe of
    a limit superior rather than a proof.
    """
    eps = sorted((float(e) for e in eps_grid), reverse=True)
    if any(not 0 < e < 1 for e in eps):
        raise ValueError("eps values must lie in (0, 1)")
    rows = []
    for e in eps:
        if isinstance(law, ZeroSequence):
            s = float(np.sum((1.0 - np.abs(law.expanded())) ** (1.0 + e)))
        else:
            s = law.tail_sum(1.0 + e, 0)
        ratio = s / math.log(1.0 / e)
        rows.append({"eps": e, "sum": s, "ratio": ratio, "summable": math.isfinite(s)})

    ratios = np.array([r["ratio"] for r in rows])
    if isinstance(law, ZeroSequence):
        first_moment = float(np.sum(1.0 - np.abs(law.expanded())))
    else:
        first_moment = law.tail_sum(1.0, 0)
    if math.isfinite(first_moment):
        verdict = "consistent with < 1/4"
    elif not np.all(np.isfinite(ratios)):
        verdict = "inconsistent"
    elif ratios[-1] < 0.25 and np.all(np.diff(ratios) <= 0):
        verdict = "consistent with < 1/4"
    elif ratios[-1] >= 0.25 and np.all(np.diff(ratios) >= 0):
        verdict = "inconsistent"
    else:
        verdict = "indeterminate"
    if math.isfinite(first_moment):
        note = f"sum (1 - r_j) = {first_moment:.6g} is finite, so the ratio is at most that over log(1/eps) -> 0"
    else:
        note = "numerical probe of a limsup on a finite eps grid, not a proof"
    return {"rows": rows, "verdict": verdict, "first_moment": first_moment, "note": note}
