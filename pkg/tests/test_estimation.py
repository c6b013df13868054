import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize

from cauchychar import DegenerateSampleError, DomainError, EstimationError
from cauchychar.distributions import (
    Cauchy,
    CircularCauchy,
    MixtureCauchy,
    SampleSet,
    log_likelihood,
    mixture_cdf,
    sample,
)
from cauchychar.estimation import (
    FixedPointConfig,
    OutsideHalfPlaneWarning,
    circular_fit,
    initial_guess,
    loglik_gradient,
    mellin_consensus,
    mellin_estimate,
    mixture_fit,
    mixture_fit_moments,
    logmoment_estimate,
    mle_fixed_point,
    mle_fixed_point_batch,
)
from cauchychar.halfplane import cpow


def direct_mle(x):
    """Independent MLE: Nelder-Mead on the negative log-likelihood."""
    def nll(p):
        mu, log_s = p
        s = math.exp(log_s)
        return -np.sum(np.log(s / (math.pi * ((x - mu) ** 2 + s * s))))
    q1, q3 = np.percentile(x, [25, 75])
    res = optimize.minimize(nll, [np.median(x), math.log((q3 - q1) / 2)], method="Nelder-Mead",
                            options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
    return complex(res.x[0], math.exp(res.x[1]))


def test_two_point_mle():
    rep = mle_fixed_point(SampleSet([-1.0, 1.0]))
    assert rep.converged
    assert abs(rep.estimate - 1j) <= 1e-12
    assert rep.residual <= 1e-12 and rep.iterations <= 50


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_mle_matches_direct_optimizer(seed):
    x = sample(Cauchy(1 + 2j), 300, seed=seed).values
    rep = mle_fixed_point(x)
    assert rep.converged
    assert abs(rep.estimate - direct_mle(x)) < 1e-6
    assert np.linalg.norm(loglik_gradient(SampleSet(x), rep.estimate)) < 1e-6
    assert rep.loglik == pytest.approx(log_likelihood(SampleSet(x), Cauchy(rep.estimate)))


def test_mle_monotone_likelihood_trace():
    x = sample(Cauchy(-3 + 0.2j), 200, seed=4)
    rep = mle_fixed_point(x, FixedPointConfig(init=50 + 30j))
    assert rep.converged
    ll = rep.details["trace"]
    assert all(b >= a - 1e-12 for a, b in zip(ll, ll[1:]))


def test_mle_degenerate_inputs():
    with pytest.raises(DegenerateSampleError):
        mle_fixed_point(SampleSet([2.0, 2.0]))
    with pytest.raises(DegenerateSampleError):
        mle_fixed_point(SampleSet([0.0, 0.0, 0.0, 1.0]))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.1, 10), st.floats(-10, 10))
def test_mle_affine_equivariance(seed, scale, shift):
    x = sample(Cauchy(1j), 25, seed=seed).values
    g = mle_fixed_point(x).estimate
    h = mle_fixed_point(scale * x + shift).estimate
    assert abs(h - (scale * g + shift)) <= 1e-8 * scale * max(1.0, abs(g))


def test_mle_batch_agrees_with_scalar():
    rng = np.random.default_rng(5)
    x = 2 + 0.5 * rng.standard_cauchy((40, 100))
    est, ok = mle_fixed_point_batch(x)
    assert ok.all()
    for row, g in zip(x[:10], est[:10]):
        assert abs(mle_fixed_point(row).estimate - g) < 1e-10


def test_initial_guess():
    assert initial_guess(SampleSet([-1.0, 1.0])) == 1j
    assert initial_guess(SampleSet([-1.0, 0.0, 1.0])).imag > 0


def test_mellin_estimate_exact_law():
    for a in (0.2, 0.5, 0.8):
        assert abs(mellin_estimate(Cauchy(1 + 1j), a) - (1 + 1j)) < 1e-6


def test_mellin_estimate_warns_outside():
    with pytest.warns(OutsideHalfPlaneWarning):
        mellin_estimate(SampleSet([1.0, 2.0]), 0.5)
    with pytest.raises(DomainError):
        mellin_estimate(SampleSet([1.0, 2.0]), 0.0)
    with pytest.raises(EstimationError):
        mellin_estimate(SampleSet([0.0, 0.0]), 0.5)


def test_mellin_consensus():
    rep = mellin_consensus(Cauchy(-1 + 2j), [0.3, 0.6])
    assert abs(rep.estimate - (-1 + 2j)) < 1e-6 and rep.dispersion < 1e-5
    with pytest.raises(EstimationError):
        mellin_consensus(SampleSet([1.0, 2.0]))
    with pytest.raises(DomainError):
        mellin_consensus(SampleSet([1.0, -2.0]), [0.5, 1.5])


def test_logmoment_estimate():
    x = SampleSet([-2.0, 0.5])
    rep = logmoment_estimate(x)
    assert abs(rep.estimate - 1j) < 1e-15
    assert logmoment_estimate(SampleSet([1.0, 4.0])).flags
    with pytest.raises(DomainError):
        logmoment_estimate(SampleSet([0.0, 1.0]))


def test_estimators_agree():
    x = sample(Cauchy(1j), 100000, seed=0)
    ests = [mle_fixed_point(x).estimate, mellin_consensus(x).estimate,
            logmoment_estimate(x).estimate]
    assert max(abs(a - b) for a in ests for b in ests) <= 0.05


def test_circular_fit():
    w = 0.5 - 0.2j
    rep = circular_fit(sample(CircularCauchy(w), 20000, seed=1))
    assert rep.converged and abs(rep.estimate - w) < 0.02
    assert rep.details["line_estimate"].imag > 0


GRID = [k / 10 for k in range(1, 10)]


def test_mixture_noiseless_recovery():
    m = MixtureCauchy(0.5, -2 + 1j, 2 + 1j)
    targets = [(1 - m.t) * cpow(m.gamma1, a) + m.t * cpow(m.gamma2, a) for a in GRID]
    rep = mixture_fit_moments(targets, GRID)
    e = rep.estimate
    assert rep.converged
    assert abs(e.t - m.t) < 1e-4
    assert abs(e.gamma1 - m.gamma1) < 1e-4 and abs(e.gamma2 - m.gamma2) < 1e-4


def test_mixture_fit_is_seed_deterministic():
    x = sample(MixtureCauchy(0.5, -2 + 1j, 2 + 1j), 100000, seed=3)
    a = mixture_fit(x, seed=7).as_dict()
    b = mixture_fit(x, seed=7).as_dict()
    assert a == b
    # moment matching from noisy data is weakly conditioned: compare laws, not parameters
    grid = np.linspace(-30, 30, 6001)
    e = mixture_fit(x).estimate
    truth = MixtureCauchy(0.5, -2 + 1j, 2 + 1j)
    assert np.max(np.abs(mixture_cdf(grid, e) - mixture_cdf(grid, truth))) < 0.05


def test_mixture_boundary_fit_is_flagged():
    x = sample(MixtureCauchy(0.5, -2 + 1j, 2 + 1j), 100000, seed=2)
    rep = mixture_fit(x)
    assert any(f.startswith("boundary") for f in rep.flags)


def test_mixture_input_validation():
    with pytest.raises(DomainError):
        mixture_fit_moments([1j] * 3, [0.1, 0.2, 0.3])
    with pytest.raises(DomainError):
        mixture_fit(SampleSet([1.0, -1.0]), [0.5, 1.2, 0.3, 0.4, 0.6])


def test_mixture_single_component_flagged():
    g = 1 + 1j
    targets = [cpow(g, a) for a in GRID]
    rep = mixture_fit_moments(targets, GRID)
    assert rep.flags
