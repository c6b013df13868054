"""Estimators derived from the Möbius and Mellin characterizations."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize

from .distributions import Cauchy, MixtureCauchy, SampleSet, log_likelihood, rng_stream
from .errors import DegenerateSampleError, DomainError, EstimationError
from .halfplane import cpow, halfplane_param, mobius_to_disk
from .transforms import angles_to_line, as_sample, mellin_empirical, mobius_field, zero_atoms

__all__ = [
    "FixedPointConfig",
    "EstimateReport",
    "OutsideHalfPlaneWarning",
    "DEFAULT_EXPONENTS",
    "MIXTURE_SAMPLE_EXPONENTS",
    "initial_guess",
    "mle_fixed_point",
    "mle_fixed_point_batch",
    "loglik_gradient",
    "mellin_estimate",
    "mellin_consensus",
    "logmoment_estimate",
    "circular_fit",
    "mixture_fit",
    "mixture_fit_moments",
]

DEFAULT_EXPONENTS = tuple(k / 10 for k in range(1, 10))
# E|X|^(2a) is infinite for Cauchy data once a >= 1/2, so sample-based
# mixture fits stay below 1/2 where the empirical transform has finite variance
MIXTURE_SAMPLE_EXPONENTS = tuple(k / 20 for k in range(1, 10))


class OutsideHalfPlaneWarning(UserWarning):
    """A finite-sample estimate landed on or below the real axis."""


@dataclass(frozen=True)
class FixedPointConfig:
    tol: float = 1e-12
    max_iter: int = 500
    damping: float = 1.0
    init: Optional[complex] = None

    def __post_init__(self):
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be at least 1")
        if not 0 < self.damping <= 1:
            raise DomainError("damping must lie in (0, 1]")
        if self.init is not None:
            object.__setattr__(self, "init", halfplane_param(self.init))


@dataclass
class EstimateReport:
    """Outcome of an estimator.

    ``estimate`` is a complex half-plane point, a complex disk point
    (:func:`circular_fit`) or a :class:`MixtureCauchy` (:func:`mixture_fit`).
    ``residual`` is the fixed-point residual for iterative fits, the
    least-squares objective for mixture fits, and 0 for closed-form
    estimators.
    """

    estimate: object
    iterations: int
    converged: bool
    residual: float
    dispersion: Optional[float] = None
    loglik: Optional[float] = None
    flags: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        est = self.estimate
        if isinstance(est, MixtureCauchy):
            est_json = {
                "t": est.t,
                "gamma1": {"re": est.gamma1.real, "im": est.gamma1.imag},
                "gamma2": {"re": est.gamma2.real, "im": est.gamma2.imag},
            }
        elif est is None:
            est_json = None
        else:
            est = complex(est)
            est_json = {"re": est.real, "im": est.imag}
        return {
            "estimate": est_json,
            "iterations": self.iterations,
            "converged": self.converged,
            "residual": self.residual,
            "dispersion": self.dispersion,
            "loglik": self.loglik,
            "flags": list(self.flags),
        }


# ---------------------------------------------------------------------------
# maximum likelihood by fixed-point iteration


def initial_guess(s: SampleSet) -> complex:
    """Median plus ``i`` times half the interquartile range.

    Falls back to the mean absolute deviation about the median when the
    quartiles coincide, so the guess is in the half-plane for every sample
    with two distinct values.
    """
    med = s.quantile(0.5)
    half_iqr = 0.5 * (s.quantile(0.75) - s.quantile(0.25))
    if not half_iqr > 0:
        half_iqr = float(np.dot(s.weights, np.abs(s.values - med)))
    if not half_iqr > 0:
        raise DegenerateSampleError("sample is a point mass")
    return complex(med, half_iqr)


def _fixed_point_map(s: SampleSet, gamma: complex) -> complex:
    return complex(mobius_field(s.values, s.weights, [gamma])[0])


def mle_fixed_point(s, cfg: FixedPointConfig = FixedPointConfig()) -> EstimateReport:
    """Cauchy maximum likelihood as the fixed point ``g = F(g)`` of the Möbius statistic.

    Iterates ``g <- (1 - d) g + d F(g)``. A step that lowers the likelihood
    is rejected and ``d`` halved; ``d`` is also halved after any accepted
    step that fails to shrink the residual, which breaks the equal-likelihood
    2-cycles the undamped map can fall into. Convergence requires both the step length
    and ``|g - F(g)|`` to fall below ``cfg.tol``. Running out of iterations
    yields ``converged=False``, never a silent answer.
    """
    s = as_sample(s)
    s.require_nondegenerate()
    vals, idx = np.unique(s.values, return_inverse=True)
    heaviest = np.bincount(idx, weights=s.weights).max()
    if heaviest > 0.5 + 1e-12:
        raise DegenerateSampleError(
            f"one value carries weight {heaviest:.3g} > 1/2; the Cauchy likelihood is "
            "unbounded and has no maximizer in the half-plane"
        )
    gamma = cfg.init if cfg.init is not None else initial_guess(s)
    damping = cfg.damping
    ll = log_likelihood(s, Cauchy(gamma))
    ll0 = ll
    trace = [ll]
    F = _fixed_point_map(s, gamma)
    residual = abs(F - gamma)
    converged = False
    halvings = 0
    it = 0
    for it in range(1, cfg.max_iter + 1):
        cand = gamma + damping * (F - gamma)
        if not cand.imag > 0:
            raise EstimationError("fixed-point iterate left the half-plane", iterate=cand)
        ll_cand = log_likelihood(s, Cauchy(cand))
        if ll_cand < ll - 1e-14 * max(1.0, abs(ll)):
            damping *= 0.5
            halvings += 1
            if damping < 1e-12:
                break
            continue
        step = abs(cand - gamma)
        gamma, ll = cand, ll_cand
        trace.append(ll)
        F = _fixed_point_map(s, gamma)
        previous, residual = residual, abs(F - gamma)
        if step <= cfg.tol and residual <= cfg.tol:
            converged = True
            break
        if residual >= previous:
            damping *= 0.5
            halvings += 1
    flags = [] if converged else [f"no convergence after {it} iterations"]
    return EstimateReport(
        estimate=gamma,
        iterations=it,
        converged=converged,
        residual=residual,
        loglik=ll,
        flags=flags,
        details={"trace": trace, "initial_loglik": ll0, "damping": damping,
                 "halvings": halvings},
    )


def mle_fixed_point_batch(x: np.ndarray, tol: float = 1e-12, max_iter: int = 500,
                          chunk: int = 128):
    """Row-wise fixed-point MLE for an equally weighted ``(B, n)`` array of samples.

    Same iteration and safeguards as :func:`mle_fixed_point`. Returns
    ``(estimates, converged)`` arrays of shape ``(B,)``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    est = np.empty(x.shape[0], dtype=complex)
    ok = np.zeros(x.shape[0], dtype=bool)
    for lo in range(0, x.shape[0], chunk):
        est[lo:lo + chunk], ok[lo:lo + chunk] = _mle_rows(x[lo:lo + chunk], tol, max_iter)
    return est, ok


def _mean_loglik_rows(x, g):
    b = g.imag[:, None]
    return np.log(b[:, 0] / math.pi) - np.log((x - g.real[:, None]) ** 2 + b * b).mean(axis=1)


def _mle_rows(x, tol, max_iter):
    m, n = x.shape
    w = np.full((m, n), 1.0 / n)
    q1, med, q3 = np.quantile(x, [0.25, 0.5, 0.75], axis=1)
    spread = 0.5 * (q3 - q1)
    mad = np.abs(x - med[:, None]).mean(axis=1)
    spread = np.where(spread > 0, spread, mad)
    live = spread > 0
    gamma = med + 1j * np.where(live, spread, 1.0)
    damping = np.ones(m)
    ll = _mean_loglik_rows(x, gamma)
    F = mobius_field(x, w, gamma[:, None])[:, 0]
    residual = np.abs(F - gamma)
    done = ~live
    converged = np.zeros(m, dtype=bool)
    for _ in range(max_iter):
        act = ~done
        if not act.any():
            break
        idx = np.flatnonzero(act)
        cand = gamma[idx] + damping[idx] * (F[idx] - gamma[idx])
        ll_cand = _mean_loglik_rows(x[idx], cand)
        worse = ll_cand < ll[idx] - 1e-14 * np.maximum(1.0, np.abs(ll[idx]))
        damping[idx[worse]] *= 0.5
        stalled = idx[worse & (damping[idx] < 1e-12)]
        done[stalled] = True
        take = idx[~worse]
        if take.size == 0:
            continue
        step = np.abs(cand[~worse] - gamma[take])
        gamma[take] = cand[~worse]
        ll[take] = ll_cand[~worse]
        F[take] = mobius_field(x[take], w[take], gamma[take][:, None])[:, 0]
        res = np.abs(F[take] - gamma[take])
        fin = (step <= tol) & (res <= tol)
        converged[take[fin]] = True
        done[take[fin]] = True
        damping[take[~fin & (res >= residual[take])]] *= 0.5
        residual[take] = res
    return gamma, converged


def loglik_gradient(s: SampleSet, gamma: complex, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference gradient of the mean log-likelihood in ``(Re g, Im g)``."""
    gamma = halfplane_param(gamma)
    grad = np.empty(2)
    for k, e in enumerate((1.0, 1j)):
        up = log_likelihood(s, Cauchy(gamma + h * e))
        dn = log_likelihood(s, Cauchy(gamma - h * e))
        grad[k] = (up - dn) / (2 * h)
    return grad


# ---------------------------------------------------------------------------
# Mellin estimators


def mellin_estimate(source, a, *, allow_negative: bool = False, cfg=None) -> complex:
    """``E[X^a] ** (1/a)``, which equals ``g`` exactly when ``X ~ C(g)``.

    Issues :class:`OutsideHalfPlaneWarning` when the estimate has
    ``Im <= 0``, which finite samples can produce.
    """
    a = complex(a)
    if a.real == 0 and not allow_negative:
        raise DomainError("Mellin estimation needs Re(a) > 0")
    m = mellin_empirical(source, a, allow_negative=allow_negative, cfg=cfg)
    if m == 0:
        raise EstimationError(f"Mellin transform vanished at a = {a!r}; cannot take the 1/a root")
    est = cpow(m, 1.0 / a)
    if not est.imag > 0:
        warnings.warn(f"Mellin estimate at a = {a!r} lies outside the upper half-plane: {est!r}",
                      OutsideHalfPlaneWarning, stacklevel=2)
    return est


def _max_pairwise(z: np.ndarray) -> float:
    z = np.asarray(z, dtype=complex)
    if z.size < 2:
        return 0.0
    return float(np.abs(z[:, None] - z[None, :]).max())


def mellin_consensus(source, grid: Sequence[float] = DEFAULT_EXPONENTS, *, cfg=None) -> EstimateReport:
    """Combine per-exponent Mellin estimates over ``grid``.

    The estimate is the componentwise median of the per-exponent estimates
    that lie in the half-plane; ``dispersion`` is the largest pairwise
    distance among all of them, which vanishes for an exact Cauchy law.
    """
    grid = [float(a) for a in grid]
    if not grid or any(not 0 < a < 1 for a in grid):
        raise DomainError("exponent grid must be nonempty and inside (0, 1)")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OutsideHalfPlaneWarning)
        ests = np.array([mellin_estimate(source, a, cfg=cfg) for a in grid])
    inside = ests.imag > 0
    if not inside.any():
        raise EstimationError("no exponent produced a half-plane estimate",
                              estimates=ests.tolist())
    good = ests[inside]
    estimate = complex(np.median(good.real), np.median(good.imag))
    flags = []
    if inside.sum() * 2 < len(grid):
        flags.append(f"only {int(inside.sum())} of {len(grid)} exponents gave half-plane estimates")
    details = {"per_exponent": dict(zip(grid, ests.tolist()))}
    if isinstance(source, (SampleSet, np.ndarray, list, tuple)):
        details["zero_atoms"] = zero_atoms(source)
    return EstimateReport(estimate, len(grid), True, 0.0, dispersion=_max_pairwise(ests),
                          flags=flags, details=details)


def logmoment_estimate(s) -> EstimateReport:
    """``exp(E[log X]) = exp(E[log|X|]) exp(i pi P(X < 0))``.

    In the half-plane exactly when the sample has both signs.
    """
    s = as_sample(s)
    x, w = s.values, s.weights
    if np.any(x == 0):
        raise DomainError("log-moment estimation needs nonzero observations (P(X = 0) = 0)")
    mag = math.exp(float(np.dot(w, np.log(np.abs(x)))))
    p_neg = float(w[x < 0].sum())
    flags = []
    if 0 < p_neg < 1:
        estimate = mag * complex(math.cos(math.pi * p_neg), math.sin(math.pi * p_neg))
    else:
        estimate = complex(-mag if p_neg >= 1 else mag, 0.0)
        flags.append("boundary: sample has a single sign, estimate is real")
    return EstimateReport(estimate, 0, True, 0.0, flags=flags, details={"p_negative": p_neg})


# ---------------------------------------------------------------------------
# circular fit


def circular_fit(angles, cfg: FixedPointConfig = FixedPointConfig()) -> EstimateReport:
    """Circular-Cauchy parameter via the Cauchy MLE of the angles mapped to the line.

    Angles ``x`` become ``y = phi_i^{-1}(e^{ix})``. Their fixed-point MLE
    ``g`` maps back to ``w = phi_i(g)``.
    """
    if isinstance(angles, SampleSet):
        values, weights = angles.values, angles.weights
    else:
        values, weights = np.asarray(angles, dtype=float), None
    y = SampleSet(angles_to_line(values, 1j), weights)
    rep = mle_fixed_point(y, cfg)
    rep.details["line_estimate"] = rep.estimate
    rep.estimate = complex(mobius_to_disk(1j, rep.estimate))
    return rep


# ---------------------------------------------------------------------------
# mixture fit


def _unpack(theta):
    u, m1, l1, m2, l2 = theta
    t = 1.0 / (1.0 + math.exp(-u))
    return t, complex(m1, math.exp(l1)), complex(m2, math.exp(l2))


def _mixture_residuals(theta, grid, targets):
    t, g1, g2 = _unpack(theta)
    model = (1 - t) * cpow(g1, grid) + t * cpow(g2, grid)
    diff = targets - model
    return np.concatenate([diff.real, diff.imag])


def _objective(theta, grid, targets):
    r = _mixture_residuals(theta, grid, targets)
    return float(r @ r)


def _pack(t, g1, g2):
    return np.array([math.log(t / (1 - t)), g1.real, math.log(g1.imag),
                     g2.real, math.log(g2.imag)])


def mixture_fit_moments(targets, grid, starts: int = 8, seed: int = 0,
                        residual_ceiling: float = 1e-2) -> EstimateReport:
    """Fit ``(1 - t) g1^a + t g2^a`` to Mellin values ``targets`` at exponents ``grid``.

    Least squares over ``t = sigmoid(u)`` and ``g_k = m_k + i exp(l_k)``. Each
    of ``starts`` deterministic starting points runs a Nelder-Mead search
    followed by a Levenberg-Marquardt polish; the lowest objective wins,
    ties going to the lower start index.
    """
    grid = np.asarray(grid, dtype=float)
    targets = np.asarray(targets, dtype=complex)
    if grid.size < 5:
        raise DomainError("a mixture fit needs at least 5 exponents (5 real unknowns)")
    if targets.shape != grid.shape:
        raise DomainError("targets and grid differ in length")
    if starts < 1:
        raise DomainError("need at least one start")

    pilot = cpow(targets, 1.0 / grid)
    pilot = pilot[pilot.imag > 0]
    if pilot.size:
        mu, sigma = float(np.median(pilot.real)), float(np.median(pilot.imag))
    else:
        mu, sigma = 0.0, 1.0

    best = None
    for k in range(starts):
        if k == 0:
            theta0 = _pack(0.5, complex(mu - sigma, sigma), complex(mu + sigma, sigma))
        else:
            rng = rng_stream(seed, k)
            m1, m2 = mu + sigma * rng.normal(0.0, 2.0, 2)
            s1, s2 = sigma * np.exp(rng.normal(0.0, 0.5, 2))
            theta0 = _pack(float(rng.uniform(0.2, 0.8)), complex(m1, s1), complex(m2, s2))
        nm = minimize(_objective, theta0, args=(grid, targets), method="Nelder-Mead",
                      options={"xatol": 1e-10, "fatol": 1e-20, "maxiter": 5000,
                               "maxfev": 10000})
        try:
            lm = least_squares(_mixture_residuals, nm.x, args=(grid, targets), method="lm",
                               xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=5000)
            theta, obj = lm.x, float(2 * lm.cost)
        except (ValueError, OverflowError):
            theta, obj = nm.x, float(nm.fun)
        if not math.isfinite(obj) or obj > nm.fun:
            theta, obj = nm.x, float(nm.fun)
        if best is None or obj < best[1]:
            best = (theta, obj, k)

    theta, obj, k_best = best
    t, g1, g2 = _unpack(theta)
    flags = []
    scale = max(g1.imag, g2.imag)
    if abs(g1 - g2) <= 1e-3 * scale or min(t, 1 - t) <= 1e-3:
        flags.append("non-identifiable: components coincide or a weight is near 0")
    if min(g1.imag, g2.imag) <= 1e-6 * scale:
        flags.append("boundary: a component scale collapsed towards 0")
    try:
        estimate = MixtureCauchy(t, g1, g2)
    except DomainError:
        estimate = None
        flags.append("fit collapsed to a single component")
    converged = obj <= residual_ceiling and estimate is not None
    if obj > residual_ceiling:
        flags.append(f"fit failure: objective {obj:.3g} above ceiling {residual_ceiling:.3g}")
    return EstimateReport(estimate, starts, converged, obj, flags=flags,
                          details={"best_start": k_best})


def mixture_fit(s, grid: Sequence[float] = MIXTURE_SAMPLE_EXPONENTS, starts: int = 8, seed: int = 0,
                residual_ceiling: float = 1e-2) -> EstimateReport:
    """Mixture Cauchy fit matching empirical Mellin transforms on ``grid``.

    The default exponents ``0.05, ..., 0.45`` avoid the infinite-variance
    regime ``a >= 1/2`` of the empirical transform under Cauchy tails.
    """
    s = as_sample(s)
    grid = [float(a) for a in grid]
    if any(not 0 < a < 1 for a in grid):
        raise DomainError("exponent grid must lie inside (0, 1)")
    targets = [mellin_empirical(s, a) for a in grid]
    rep = mixture_fit_moments(targets, grid, starts, seed, residual_ceiling)
    if rep.estimate is not None:
        rep.loglik = log_likelihood(s, rep.estimate)
    return rep
