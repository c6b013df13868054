"""Transform statistics of a sample or of an analytic law.

Every statistic accepts either a :class:`~cauchychar.distributions.SampleSet`
(or a plain array of observations), evaluated by exact weighted summation,
or an analytic law, evaluated through :func:`cauchychar.oracle.expectation`.
"""

from __future__ import annotations

import cmath
import math
from typing import Callable

import numpy as np
from scipy.integrate import quad

from . import oracle
from .distributions import TWO_PI, SampleSet
from .errors import ConvergenceError, DomainError, NumericalError
from .halfplane import cpow, disk_param, halfplane_param

__all__ = [
    "as_sample",
    "mobius_stat",
    "mobius_field",
    "circular_stat",
    "angles_to_line",
    "mellin_empirical",
    "mellin_split_g",
    "g_closed_form",
    "poisson_smooth",
    "stieltjes_transform",
    "zero_atoms",
]


def as_sample(source) -> SampleSet:
    if isinstance(source, SampleSet):
        return source
    return SampleSet(np.asarray(source, dtype=float))


def _is_empirical(source) -> bool:
    return isinstance(source, (SampleSet, np.ndarray, list, tuple))


def _real_pow(x: float, a: complex) -> complex:
    """Scalar ``x ** a`` for real ``x`` under the principal branch, ``0 ** a = 0``."""
    if x > 0:
        return cmath.exp(a * math.log(x))
    if x < 0:
        return cmath.exp(a * complex(math.log(-x), math.pi))
    return 0j


def _check_exponent(a, allow_negative: bool) -> complex:
    a = complex(a)
    lo = -1.0 if allow_negative else 0.0
    if not (lo <= a.real < 1.0) or a.real == -1.0:
        raise DomainError(f"Mellin exponent needs Re(a) in [{lo:g}, 1) "
                          f"(negative values only with allow_negative), got {a!r}")
    return a


def zero_atoms(source) -> int:
    """Number of observations exactly equal to zero (they contribute ``0 ** a = 0``)."""
    return int(np.count_nonzero(as_sample(source).values == 0))


# ---------------------------------------------------------------------------
# Möbius statistic


def mobius_field(x, w, gammas):
    """Vectorized Möbius statistic ``F(g) = E[X/(X - conj g)] / E[1/(X - conj g)]``.

    ``x`` and ``w`` have shape ``(..., n)`` and ``gammas`` shape ``(..., k)``;
    the result has shape ``(..., k)``.

    Evaluated in the form ``F = a + dbar/(S (dbar^2 + b^2)) + i b V/(dbar^2 + b^2)``,
    where ``S = E[1/D]``, ``D = (X - a)^2 + b^2``, and ``dbar`` and ``V`` are the
    mean and variance of ``X - a`` under the tilted weights ``w / (D S)``. It
    is algebraically identical to the ratio, and keeps ``Im F >= 0`` exact in
    floating point, with equality only for a point mass.
    """
    x = np.asarray(x, dtype=float)[..., None, :]
    w = np.asarray(w, dtype=float)[..., None, :]
    g = np.asarray(gammas, dtype=complex)[..., :, None]
    a, b = g.real, g.imag
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        d = x - a
        q = w / (d * d + b * b)
        S = q.sum(axis=-1, keepdims=True)
        p = q / S
        m = (p * x).sum(axis=-1, keepdims=True)
        dbar = m - a
        # centre on m, not on a: shifting by a can erase tiny spreads
        var = (p * (x - m) ** 2).sum(axis=-1, keepdims=True)
        denom = dbar * dbar + b * b
        re = a + dbar / (S * denom)
        im = b * var / denom
    out = (re + 1j * im)[..., 0]
    if not np.all(np.isfinite(out)):
        raise NumericalError("Möbius statistic is not finite (vanishing denominator)")
    return out


def mobius_stat(source, gamma, *, cfg=None) -> complex:
    """Möbius statistic ``E[X/(X - conj g)] / E[1/(X - conj g)]``.

    Lies in the closed upper half-plane, and strictly inside it unless the
    law is a point mass. For ``X ~ C(alpha)`` it equals ``alpha`` for every
    ``gamma``. Its fixed points are the Cauchy maximum-likelihood estimates.
    """
    gamma = halfplane_param(gamma)
    if _is_empirical(source):
        s = as_sample(source)
        return complex(mobius_field(s.values, s.weights, [gamma])[0])
    gc = gamma.conjugate()
    m = oracle.expectation(lambda x: 1.0 / (x - gc), source, cfg)
    if m == 0:
        raise NumericalError("E[1/(X - conj(gamma))] vanished")
    num = oracle.expectation(lambda x: x / (x - gc), source, cfg)
    return num / m


# ---------------------------------------------------------------------------
# circular statistic


def _check_angles(angles) -> np.ndarray:
    x = np.asarray(angles, dtype=float)
    if np.any((x < 0) | (x >= TWO_PI)) or not np.all(np.isfinite(x)):
        raise DomainError("angles must lie in [0, 2*pi)")
    if np.any(x == 0):
        raise DomainError("angle exactly 0 present; the circular statistic assumes P(X != 0) = 1")
    return x


def circular_stat(source, eta, *, cfg=None) -> complex:
    """``G(eta) = E[e^{iX} / (1 - eta e^{iX})] / E[1 / (1 - eta e^{iX})]``.

    ``source`` is a sample of angles in ``(0, 2 pi)`` or an analytic circular
    law. Equals ``w`` identically in ``eta`` under the circular-Cauchy law
    with parameter ``w``.
    """
    eta = disk_param(eta)
    if _is_empirical(source):
        s = source if isinstance(source, SampleSet) else SampleSet(np.asarray(source, dtype=float))
        x = _check_angles(s.values)
        e = np.exp(1j * x)
        q = s.weights / (1 - eta * e)
        den = q.sum()
        if den == 0:
            raise NumericalError("E[1/(1 - eta e^{iX})] vanished")
        return complex((q * e).sum() / den)
    den = oracle.expectation(lambda x: 1.0 / (1 - eta * cmath.exp(1j * x)), source, cfg)
    if den == 0:
        raise NumericalError("E[1/(1 - eta e^{iX})] vanished")
    num = oracle.expectation(lambda x: cmath.exp(1j * x) / (1 - eta * cmath.exp(1j * x)),
                             source, cfg)
    return num / den


def angles_to_line(angles, gamma=1j) -> np.ndarray:
    """Map angles to the real line by ``x -> phi_gamma^{-1}(e^{ix})``.

    Circular-Cauchy(w) angles become Cauchy draws with parameter
    ``phi_gamma^{-1}(w)``. The angle 0 maps to the pole and is rejected.
    """
    gamma = halfplane_param(gamma)
    x = _check_angles(angles)
    u = np.exp(1j * x)
    y = (gamma - gamma.conjugate() * u) / (1 - u)
    # the image of the unit circle is real; drop the rounding residue
    return y.real


# ---------------------------------------------------------------------------
# Mellin transform


def mellin_empirical(source, a, *, allow_negative: bool = False, cfg=None) -> complex:
    """Mellin transform ``E[X^a]`` with complex powers of negative reals.

    Atoms at zero contribute nothing (``0 ** a = 0``). Negative ``Re(a)`` is
    accepted only with ``allow_negative=True``: sample values close to zero
    then dominate the sum and the estimate becomes unstable.
    """
    a = _check_exponent(a, allow_negative)
    if _is_empirical(source):
        s = as_sample(source)
        return complex(np.dot(s.weights, cpow(s.values, a)))
    cfg = (cfg or oracle.QuadratureConfig()).with_splits(0.0)
    return oracle.expectation(lambda x: _real_pow(x, a), source, cfg)


def mellin_split_g(source, a, *, allow_negative: bool = False, cfg=None) -> complex:
    """Split Mellin transform ``E[X^a; X > 0] + i E[(-X)^a; X < 0]``.

    For real ``a`` the full transform is recovered as
    ``Re(g) + Im(g) (cos(a pi) + i sin(a pi))``.
    """
    a = _check_exponent(a, allow_negative)
    if _is_empirical(source):
        s = as_sample(source)
        x, w = s.values, s.weights
        pos = x > 0
        neg = x < 0
        p = np.dot(w[pos], cpow(x[pos], a)) if pos.any() else 0j
        n = np.dot(w[neg], cpow(-x[neg], a)) if neg.any() else 0j
        return complex(p + 1j * n)
    cfg = (cfg or oracle.QuadratureConfig()).with_splits(0.0)
    p = oracle.expectation(lambda x: _real_pow(x, a) if x > 0 else 0j, source, cfg)
    n = oracle.expectation(lambda x: _real_pow(-x, a) if x < 0 else 0j, source, cfg)
    return p + 1j * n


def g_closed_form(gamma, a) -> complex:
    """Closed form of the split Mellin transform of ``C(gamma)``.

    With ``gamma = r e^{i theta}`` and ``s = sin(a theta) / sin(a pi)``:
    ``r^a (cos(a theta) - s cos(a pi) + i s)``. At ``a = 0`` the ratio is
    replaced by its limit ``theta / pi``, giving ``P(X > 0) + i P(X < 0)``.
    """
    gamma = halfplane_param(gamma)
    a = _check_exponent(a, allow_negative=False)
    r, theta = abs(gamma), cmath.phase(gamma)
    if a == 0:
        ratio = theta / math.pi
    else:
        sp = cmath.sin(a * math.pi)
        if sp == 0:
            raise NumericalError(f"sin(a*pi) vanishes at a = {a!r}")
        ratio = cmath.sin(a * theta) / sp
    ra = cmath.exp(a * math.log(r))
    return ra * (cmath.cos(a * theta) - ratio * cmath.cos(a * math.pi) + 1j * ratio)


# ---------------------------------------------------------------------------
# Poisson smoothing and the Cauchy-Stieltjes transform


def poisson_smooth(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10,
                   limit: int = 2000) -> float:
    """Poisson integral ``integral f(x) b / (pi ((x - a)^2 + b^2)) dx``.

    Computed as ``(1/pi) integral_{-pi/2}^{pi/2} f(a + b tan u) du``. ``f``
    should be continuous and vanish at infinity.

    Raises
    ------
    ConvergenceError
        If the quadrature error estimate exceeds ``tol``.
    """
    if not b > 0:
        raise DomainError("Poisson kernel width must be positive")
    val, err = quad(lambda u: f(a + b * math.tan(u)), -math.pi / 2, math.pi / 2,
                    epsabs=0.1 * tol * math.pi, epsrel=0.0, limit=limit, full_output=1)[:2]
    val /= math.pi
    err /= math.pi
    if not err <= tol:
        raise ConvergenceError(f"Poisson quadrature reached {err:.3g}, wanted {tol:.3g}",
                               value=val, achieved=err)
    return val


def stieltjes_transform(source, z, *, cfg=None) -> complex:
    """Cauchy-Stieltjes transform ``(1/pi) E[1 / (X - z)]`` for ``Im(z) > 0``.

    The imaginary part is the Poisson integral of the law at ``z`` and is
    nonnegative. For ``C(alpha)`` the value is ``1 / (pi (conj(alpha) - z))``.
    """
    z = complex(z)
    if not z.imag > 0:
        raise DomainError("the Stieltjes transform is evaluated at Im(z) > 0 only")
    if _is_empirical(source):
        s = as_sample(source)
        return complex(np.dot(s.weights, 1.0 / (s.values - z)) / math.pi)
    return oracle.expectation(lambda x: 1.0 / (x - z), source, cfg) / math.pi
