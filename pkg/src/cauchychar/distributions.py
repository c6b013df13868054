"""Cauchy, circular-Cauchy and two-component mixture Cauchy laws.

Cauchy laws use the half-plane parametrization: ``Cauchy(2 + 3j)`` has
location 2 and scale 3, with density ``Im(g) / (pi |x - g|^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .errors import DegenerateSampleError, DomainError
from .halfplane import disk_param, format_complex, halfplane_param

__all__ = [
    "Cauchy",
    "CircularCauchy",
    "MixtureCauchy",
    "MixtureParams",
    "DistSpec",
    "SampleSet",
    "rng_stream",
    "cauchy_pdf",
    "cauchy_cdf",
    "cauchy_quantile",
    "circular_pdf",
    "mixture_pdf",
    "mixture_cdf",
    "pdf",
    "cdf",
    "sample",
    "sample_values",
    "log_likelihood",
    "read_sample_csv",
    "write_sample_csv",
    "format_sample_csv",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Cauchy:
    gamma: complex

    def __post_init__(self):
        object.__setattr__(self, "gamma", halfplane_param(self.gamma))

    def __str__(self):
        return f"C({format_complex(self.gamma)})"


@dataclass(frozen=True)
class CircularCauchy:
    w: complex

    def __post_init__(self):
        object.__setattr__(self, "w", disk_param(self.w))

    def __str__(self):
        return f"Pcc({format_complex(self.w)})"


@dataclass(frozen=True)
class MixtureCauchy:
    """Density ``(1 - t) p(x; gamma1) + t p(x; gamma2)``.

    Components are stored in canonical order, sorted by ``(Re, Im)``; a
    swapped input is normalized by exchanging the components and replacing
    ``t`` with ``1 - t``. Both describe the same law.
    """

    t: float
    gamma1: complex
    gamma2: complex

    def __post_init__(self):
        t = float(self.t)
        if not 0.0 < t < 1.0:
            raise DomainError(f"mixture weight must lie in (0, 1), got {t}")
        g1 = halfplane_param(self.gamma1)
        g2 = halfplane_param(self.gamma2)
        if g1 == g2:
            raise DomainError("mixture components must be distinct")
        if (g2.real, g2.imag) < (g1.real, g1.imag):
            g1, g2, t = g2, g1, 1.0 - t
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "gamma1", g1)
        object.__setattr__(self, "gamma2", g2)

    def __str__(self):
        return f"C({self.t!r}; {format_complex(self.gamma1)}; {format_complex(self.gamma2)})"


MixtureParams = MixtureCauchy
DistSpec = Union[Cauchy, CircularCauchy, MixtureCauchy]


@dataclass(frozen=True)
class SampleSet:
    """Weighted empirical measure ``sum_i weights[i] * delta(values[i])``."""

    values: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        values = np.atleast_1d(np.asarray(self.values, dtype=float)).copy()
        if values.ndim != 1 or values.size == 0:
            raise DomainError("a sample needs at least one observation")
        if not np.all(np.isfinite(values)):
            raise DomainError("sample values must be finite")
        if self.weights is None:
            weights = np.full(values.size, 1.0 / values.size)
        else:
            weights = np.atleast_1d(np.asarray(self.weights, dtype=float)).copy()
            if weights.shape != values.shape:
                raise DomainError("values and weights differ in length")
            if np.any(weights < 0) or not np.all(np.isfinite(weights)):
                raise DomainError("weights must be finite and nonnegative")
            if abs(weights.sum() - 1.0) > 1e-12:
                raise DomainError(f"weights must sum to 1, got {weights.sum()!r}")
        values.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_values(cls, values, weights=None) -> "SampleSet":
        """Build a sample, normalizing arbitrary nonnegative ``weights``."""
        if weights is not None:
            weights = np.asarray(weights, dtype=float)
            total = weights.sum()
            if not total > 0:
                raise DomainError("weights must have a positive total")
            weights = weights / total
        return cls(values, weights)

    def __len__(self):
        return self.values.size

    @property
    def support(self) -> np.ndarray:
        """Distinct values carrying positive weight."""
        return np.unique(self.values[self.weights > 0])

    def is_point_mass(self) -> bool:
        return self.support.size < 2

    def require_nondegenerate(self):
        if self.is_point_mass():
            raise DegenerateSampleError(
                "sample is a point mass; at least two distinct values are required"
            )

    def quantile(self, p: float) -> float:
        """Weighted quantile by the inverted empirical CDF.

        When the CDF equals ``p`` exactly on a flat stretch, the midpoint of
        that gap is returned, so the median of ``{-1, 1}`` is 0.
        """
        order = np.argsort(self.values, kind="stable")
        x = self.values[order]
        cum = np.cumsum(self.weights[order])
        idx = min(int(np.searchsorted(cum, p - 1e-12, side="left")), x.size - 1)
        if abs(cum[idx] - p) <= 1e-12 and idx + 1 < x.size:
            return 0.5 * float(x[idx] + x[idx + 1])
        return float(x[idx])


def rng_stream(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based generator for ``(seed, *keys)``.

    Substreams keyed by task index are independent of scheduling order.
    """
    seed = int(seed)
    if seed < 0:
        raise DomainError("seeds must be nonnegative integers")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *map(int, keys)])))


# ---------------------------------------------------------------------------
# densities


def cauchy_pdf(x, gamma):
    g = halfplane_param(gamma)
    x = np.asarray(x, dtype=float)
    out = g.imag / (math.pi * ((x - g.real) ** 2 + g.imag**2))
    return float(out) if out.ndim == 0 else out


def cauchy_cdf(x, gamma):
    g = halfplane_param(gamma)
    out = 0.5 + np.arctan((np.asarray(x, dtype=float) - g.real) / g.imag) / math.pi
    return float(out) if out.ndim == 0 else out


def cauchy_quantile(p, gamma):
    g = halfplane_param(gamma)
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise DomainError("quantile level must lie strictly inside (0, 1)")
    out = g.real + g.imag * np.tan(math.pi * (p - 0.5))
    return float(out) if out.ndim == 0 else out


def circular_pdf(x, w):
    """Circular-Cauchy density on ``[0, 2 pi)``."""
    w = disk_param(w)
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x >= TWO_PI)):
        raise DomainError("angles must lie in [0, 2*pi)")
    out = (1 - abs(w) ** 2) / (TWO_PI * np.abs(np.exp(1j * x) - w) ** 2)
    return float(out) if out.ndim == 0 else out


def mixture_pdf(x, m: MixtureCauchy):
    return (1 - m.t) * cauchy_pdf(x, m.gamma1) + m.t * cauchy_pdf(x, m.gamma2)


def mixture_cdf(x, m: MixtureCauchy):
    return (1 - m.t) * cauchy_cdf(x, m.gamma1) + m.t * cauchy_cdf(x, m.gamma2)


def pdf(spec: DistSpec, x):
    """Density of any :data:`DistSpec` variant."""
    if isinstance(spec, Cauchy):
        return cauchy_pdf(x, spec.gamma)
    if isinstance(spec, CircularCauchy):
        return circular_pdf(x, spec.w)
    if isinstance(spec, MixtureCauchy):
        return mixture_pdf(x, spec)
    raise TypeError(f"unsupported distribution {spec!r}")


def cdf(spec: DistSpec, x):
    if isinstance(spec, Cauchy):
        return cauchy_cdf(x, spec.gamma)
    if isinstance(spec, MixtureCauchy):
        return mixture_cdf(x, spec)
    raise TypeError(f"no CDF implemented for {spec!r}")


# ---------------------------------------------------------------------------
# sampling


def _uniform_open(rng: np.random.Generator, n: int) -> np.ndarray:
    u = rng.random(n)
    # rng.random is in [0, 1); 0 would hit the pole of tan
    return np.where(u == 0.0, 0.5, u)


def sample_values(spec: DistSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Raw draws from ``spec`` using an existing generator."""
    if isinstance(spec, Cauchy):
        return cauchy_quantile(_uniform_open(rng, n), spec.gamma)
    if isinstance(spec, CircularCauchy):
        u = np.exp(1j * TWO_PI * rng.random(n))
        w = spec.w
        z = (u + w) / (1 + w.conjugate() * u)
        angles = np.mod(np.angle(z), TWO_PI)
        return np.where(angles >= TWO_PI, 0.0, angles)
    if isinstance(spec, MixtureCauchy):
        second = rng.random(n) < spec.t
        u = _uniform_open(rng, n)
        x1 = cauchy_quantile(u, spec.gamma1)
        x2 = cauchy_quantile(u, spec.gamma2)
        return np.where(second, x2, x1)
    raise TypeError(f"unsupported distribution {spec!r}")


def sample(spec: DistSpec, n: int, seed: int, substream: int = 0) -> SampleSet:
    """Draw ``n`` equally weighted observations, deterministic in ``(spec, n, seed, substream)``.

    Circular-Cauchy draws are angles in ``[0, 2 pi)``, obtained as the Möbius
    image ``(u + w) / (1 + conj(w) u)`` of uniform points ``u`` on the circle.
    """
    if int(n) < 1:
        raise DomainError("sample size must be at least 1")
    rng = rng_stream(seed, substream)
    return SampleSet(sample_values(spec, int(n), rng))


def log_likelihood(s: SampleSet, spec: DistSpec) -> float:
    """Weighted mean log-density ``sum_i w_i log pdf(x_i)``.

    For equal weights this is the usual log-likelihood divided by ``n``.
    """
    return float(np.dot(s.weights, np.log(pdf(spec, s.values))))


# ---------------------------------------------------------------------------
# CSV I/O


def read_sample_csv(path) -> SampleSet:
    """Read one observation per line; blank lines and ``#`` comments are skipped."""
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                v = float(line)
            except ValueError:
                raise DomainError(f"{path}:{lineno}: not a number: {line!r}") from None
            if not math.isfinite(v):
                raise DomainError(f"{path}:{lineno}: non-finite value {line!r}")
            values.append(v)
    if not values:
        raise DomainError(f"{path}: no observations found")
    return SampleSet(np.array(values))


def format_sample_csv(values) -> str:
    return "".join(f"{float(v)!r}\n" for v in values)


def write_sample_csv(path, values):
    Path(path).write_text(format_sample_csv(values), encoding="utf-8")
