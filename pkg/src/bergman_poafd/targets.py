"""Builtin test functions and the JSON target format.

Target documents::

    {"type": "taylor", "coeffs": [[re, im], ...]}
    {"type": "kernelmix", "terms": [{"coef": [re, im], "center": [re, im], "order": 0}, ...]}
    {"type": "power_kernel", "center": [re, im], "power": s}
    {"type": "builtin", "name": "f_beta", "beta": 0.0}
    {"type": "builtin", "name": "poly_decay", "exponent": 2, "degree": 10}
    {"type": "builtin", "name": "blaschke", "zeros": [[re, im], ...]}
    {"type": "builtin", "name": "blaschke", "count": 10, "seed": 0, "max_radius": 0.9}
    {"type": "builtin", "name": "chirp", "samples": 4096, "degree": 256}
    {"type": "builtin", "name": "singular_inner", "degree": 512}
    {"type": "builtin", "name": "kernel_power", "a": [re, im], "beta": 0.0}
    {"type": "builtin", "name": "random_kernelmix", "terms": 5, "seed": 0}

KernelMix documents are interpreted in the space of the experiment.
"""

from __future__ import annotations

import numpy as np

from .funcspace import KernelMix, PowerKernel, TargetFunction, TaylorSeries
from .kernels import KernelRef, Space


def _complex(pair) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    re, im = pair
    return complex(re, im)


def f_beta(beta: float) -> PowerKernel:
    """``(1 - z)^-(2 + beta)``, singular at the boundary point 1."""
    return PowerKernel(1.0, 2.0 + beta, label=f"f_beta(beta={beta:g})")


def kernel_power(a: complex, beta: float) -> PowerKernel:
    """``(1 - conj(a) z)^-(2 + beta)``: the weighted kernel shape for weight ``beta``."""
    return PowerKernel(a, 2.0 + beta, label=f"kernel_power(a={complex(a):g}, beta={beta:g})")


def poly_decay(exponent: float = 2.0, degree: int = 10) -> TaylorSeries:
    """``sum_{k<=degree} z^k / (k + 1)^exponent``."""
    k = np.arange(degree + 1, dtype=float)
    return TaylorSeries((k + 1.0) ** (-exponent), label=f"poly_decay(p={exponent:g}, n={degree})")


def random_disc_points(count: int, seed: int, max_radius: float = 0.9) -> np.ndarray:
    """Points uniform (by area) in the disc of radius ``max_radius``."""
    rng = np.random.default_rng(seed)
    r = max_radius * np.sqrt(rng.uniform(0.0, 1.0, count))
    theta = rng.uniform(0.0, 2.0 * np.pi, count)
    return r * np.exp(1j * theta)


def taylor_from_boundary(func, degree: int, samples: int, radius: float = 1.0) -> np.ndarray:
    """Taylor coefficients ``0..degree`` from samples on ``|z| = radius`` (FFT)."""
    if samples <= 2 * degree:
        raise ValueError("need more than 2*degree samples")
    theta = 2.0 * np.pi * np.arange(samples) / samples
    vals = func(radius * np.exp(1j * theta))
    coeffs = np.fft.fft(vals) / samples
    return coeffs[: degree + 1] / radius ** np.arange(degree + 1)


def blaschke(zeros) -> TaylorSeries:
    """Finite Blaschke product as a Taylor series, truncated where the tail is negligible."""
    zeros = np.asarray(zeros, dtype=complex)
    rmax = float(np.max(np.abs(zeros))) if zeros.size else 0.0
    # coefficients decay like rmax^k; stop when below 1e-17
    degree = 64 if rmax < 0.5 else int(np.ceil(np.log(1e-17) / np.log(rmax))) + 16
    samples = 1 << int(np.ceil(np.log2(4 * degree + 4)))

    def func(z):
        out = np.ones_like(z)
        for a in zeros:
            out = out * (z - a) / (1.0 - np.conj(a) * z)
        return out

    return TaylorSeries(taylor_from_boundary(func, degree, samples), label=f"blaschke({zeros.size} zeros)")


def chirp(samples: int = 4096, degree: int = 256) -> TaylorSeries:
    """Real chirp ``cos t^2`` on ``t in [-pi, pi)`` embedded through its analytic signal.

    The nonnegative-frequency Fourier coefficients of the boundary signal
    become Taylor coefficients, truncated at ``degree``.
    """
    if samples <= 2 * degree:
        raise ValueError("need more than 2*degree samples")
    t = -np.pi + 2.0 * np.pi * np.arange(samples) / samples
    c = np.fft.fft(np.cos(t**2)) / samples
    # samples start at -pi: shift by exp(i n pi)
    n = np.arange(degree + 1)
    coeffs = c[: degree + 1] * (-1.0) ** n
    return TaylorSeries(coeffs, label="chirp (embedded)")


def singular_inner(degree: int = 512, samples: int = 1 << 14) -> TaylorSeries:
    """Rational part minus a factor carrying singular inner functions at ``+-i``.

    ``(1 + 2 z^2)/((z - 2)(z - 3)) - exp(z + 1 + (z + i)/(z - i) + (z - i)/(z + i)) / ((z + 2)(z + 3))``,
    Taylor-truncated at ``degree`` from samples on a circle just inside the disc.
    """

    def func(z):
        with np.errstate(all="ignore"):
            s = np.exp(z + 1.0 + (z + 1j) / (z - 1j) + (z - 1j) / (z + 1j))
        return (1.0 + 2.0 * z**2) / ((z - 2.0) * (z - 3.0)) - s / ((z + 2.0) * (z + 3.0))

    radius = 1.0 - 4.0 / degree
    return TaylorSeries(taylor_from_boundary(func, degree, samples, radius), label="singular_inner")


def random_kernelmix(space: Space, terms: int, seed: int, max_radius: float = 0.85) -> KernelMix:
    """Seeded ``sum c_l e_{b_l}`` with complex ``c_l`` and interior ``b_l``."""
    rng = np.random.default_rng(seed)
    coefs = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    if space.is_disc:
        pts = random_disc_points(terms, int(rng.integers(2**31)), max_radius)
    else:
        pts = rng.uniform(-3.0, 3.0, terms) + 1j * rng.uniform(0.3, 3.0, terms)
    return KernelMix.of_points(space, coefs, pts, label=f"random_kernelmix({terms}, seed={seed})")


def target_from_json(doc: dict, space: Space) -> TargetFunction:
    kind = doc.get("type")
    if kind == "taylor":
        return TaylorSeries([_complex(c) for c in doc["coeffs"]], label=doc.get("label", "taylor"))
    if kind == "kernelmix":
        coefs, refs = [], []
        for term in doc["terms"]:
            coefs.append(_complex(term["coef"]))
            refs.append(KernelRef(_complex(term["center"]), int(term.get("order", 0))))
        return KernelMix(space, tuple(coefs), tuple(refs), label=doc.get("label", "kernelmix"))
    if kind == "power_kernel":
        return PowerKernel(_complex(doc["center"]), float(doc["power"]))
    if kind == "builtin":
        name = doc["name"]
        if name == "f_beta":
            return f_beta(float(doc["beta"]))
        if name == "kernel_power":
            return kernel_power(_complex(doc["a"]), float(doc["beta"]))
        if name == "poly_decay":
            return poly_decay(float(doc.get("exponent", 2.0)), int(doc.get("degree", 10)))
        if name == "blaschke":
            if "zeros" in doc:
                zeros = [_complex(z) for z in doc["zeros"]]
            else:
                zeros = random_disc_points(int(doc.get("count", 10)), int(doc.get("seed", 0)), float(doc.get("max_radius", 0.9)))
            return blaschke(zeros)
        if name == "chirp":
            return chirp(int(doc.get("samples", 4096)), int(doc.get("degree", 256)))
        if name == "singular_inner":
            return singular_inner(int(doc.get("degree", 512)))
        if name == "random_kernelmix":
            return random_kernelmix(space, int(doc.get("terms", 5)), int(doc.get("seed", 0)), float(doc.get("max_radius", 0.85)))
        raise ValueError(f"unknown builtin target {name!r}")
    raise ValueError(f"unknown target type {kind!r}")
