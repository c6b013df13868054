"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly as
``python3 tests/test_acceptance.py``. Criterion 7 runs 500 bootstrap tests
and takes several minutes on one core.
"""

import math
import sys
import time

import numpy as np
import pytest
from scipy import stats

from cauchychar.distributions import (
    Cauchy,
    CircularCauchy,
    MixtureCauchy,
    SampleSet,
    rng_stream,
    sample,
)
from cauchychar.estimation import (
    logmoment_estimate,
    loglik_gradient,
    mellin_consensus,
    mixture_fit_moments,
    mle_fixed_point,
)
from cauchychar.gof import cauchy_test_mellin, cauchy_test_mobius, logmoment_diagnostic
from cauchychar.halfplane import mobius_to_disk, mobius_to_halfplane
from cauchychar.oracle import expectation, verify_identities
from cauchychar.transforms import angles_to_line, circular_stat, mobius_field, poisson_smooth

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.acceptance


def report(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_c01_identity_suite():
    t0 = time.perf_counter()
    rep = verify_identities()
    elapsed = time.perf_counter() - t0
    worst = ", ".join(f"{r.family}={r.worst_error:.1e}" for r in rep.families)
    report(1, rep.passed and elapsed <= 60, f"all families within tolerance in {elapsed:.1f}s ({worst})")


def test_c02_two_point_mle():
    rep = mle_fixed_point(SampleSet([-1.0, 1.0]))
    ok = (rep.converged and abs(rep.estimate - 1j) <= 1e-12 and rep.residual <= 1e-12
          and rep.iterations <= 50)
    report(2, ok, f"estimate {rep.estimate}, residual {rep.residual:.1e}, "
                  f"{rep.iterations} iterations")


def test_c03_mle_consistency():
    s = sample(Cauchy(1j), 100000, seed=0)
    rep = mle_fixed_point(s)
    grad = float(np.linalg.norm(loglik_gradient(s, rep.estimate)))
    err = abs(rep.estimate - 1j)
    report(3, rep.converged and err <= 0.02 and grad <= 1e-4,
           f"|g - i| = {err:.4f}, gradient norm {grad:.1e}")


def test_c04_estimator_agreement():
    s = sample(Cauchy(1j), 100000, seed=0)
    ests = {"mle": mle_fixed_point(s).estimate, "mellin": mellin_consensus(s).estimate,
            "logmoment": logmoment_estimate(s).estimate}
    worst = max(abs(a - b) for a in ests.values() for b in ests.values())
    report(4, worst <= 0.05, f"largest pairwise distance {worst:.4f}")


def test_c05_counterexample_measure():
    r = math.pi / math.sqrt(3)
    s = SampleSet([-1.0, math.exp(r), math.exp(-r)])
    d = dict(logmoment_diagnostic(s, 3))
    want = 8 * math.pi ** 3 / 27
    report(5, d[2] <= 1e-12 and abs(d[3] - want) <= 1e-9,
           f"d2 = {d[2]:.1e}, |d3 - 8 pi^3/27| = {abs(d[3] - want):.1e}")


def test_c06_pushforward_law():
    angles = sample(CircularCauchy(0.5), 100000, seed=0).values
    y = angles_to_line(angles, 1j)
    g = mobius_to_halfplane(1j, 0.5)
    ks = stats.kstest(y, stats.cauchy(g.real, g.imag).cdf).statistic
    report(6, ks <= 0.01, f"KS distance {ks:.4f} against C({g})")


def _rejection_rates(make, reps, tests):
    rejected = {name: 0 for name in tests}
    for r in range(reps):
        s = make(r)
        for name, fn in tests.items():
            if fn(s, B=999, seed=r).p_value <= 0.05:
                rejected[name] += 1
    return {name: k / reps for name, k in rejected.items()}


def test_c07_gof_size_and_power():
    tests = {"mobius": cauchy_test_mobius, "mellin": cauchy_test_mellin}
    size = _rejection_rates(lambda r: sample(Cauchy(1j), 1000, seed=1000 + r), 200, tests)
    power = _rejection_rates(
        lambda r: SampleSet(rng_stream(2000 + r).standard_normal(1000)), 100, tests)
    ok = all(0.02 <= v <= 0.09 for v in size.values()) and all(v >= 0.9 for v in power.values())
    report(7, ok, "size " + ", ".join(f"{k}={v:.3f}" for k, v in size.items())
                  + "; power vs N(0,1) " + ", ".join(f"{k}={v:.2f}" for k, v in power.items()))


def test_c08_noiseless_mixture_recovery():
    m = MixtureCauchy(0.5, -2 + 1j, 2 + 1j)
    grid = [k / 10 for k in range(1, 10)]
    targets = [expectation(lambda x, a=a: complex(x) ** a if x >= 0 else
                           abs(x) ** a * complex(math.cos(a * math.pi), math.sin(a * math.pi)), m)
               for a in grid]
    e = mixture_fit_moments(targets, grid).estimate
    err = max(abs(e.t - m.t), abs(e.gamma1 - m.gamma1), abs(e.gamma2 - m.gamma2))
    report(8, err <= 1e-4, f"largest parameter error {err:.1e} ({e})")


def test_c09_poisson_convergence():
    f = lambda x: 1.0 / (1.0 + x * x)
    a_grid = np.linspace(-5, 5, 101)
    sups = {b: max(abs(poisson_smooth(f, a, b) - f(a)) for a in a_grid)
            for b in (1.0, 0.1, 0.01, 0.001)}
    seq = [sups[1.0], sups[0.1], sups[0.01]]
    centre = poisson_smooth(f, 0.0, 1.0)
    ok = seq[0] > seq[1] > seq[2] and sups[0.001] <= 2e-3 and abs(centre - 0.5) <= 1e-10
    report(9, ok, "sup errors " + ", ".join(f"b={b:g}: {v:.2e}" for b, v in sups.items())
                  + f"; |P f(0,1) - 0.5| = {abs(centre - 0.5):.1e}")


def test_c10_range_invariants():
    rng = np.random.default_rng(10)
    cases = 10000
    # Möbius statistic: rows of 2 to 9 values with at least two distinct
    n = 9
    x = rng.standard_cauchy((cases, n)) * 10 ** rng.uniform(-2, 2, (cases, 1))
    sizes = rng.integers(2, n + 1, cases)
    w = (np.arange(n)[None, :] < sizes[:, None]).astype(float)
    w /= w.sum(axis=1, keepdims=True)
    g = rng.uniform(-5, 5, (cases, 1)) + 1j * 10 ** rng.uniform(-2, 1, (cases, 1))
    im_ok = bool(np.all(mobius_field(x, w, g).imag > 0))
    # circular statistic on random angle sets
    disk_ok = True
    for _ in range(cases):
        ang = rng.uniform(1e-6, 2 * math.pi, int(rng.integers(2, 8)))
        eta = 0.99 * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform())
        disk_ok &= abs(circular_stat(ang, eta)) < 1
    # Möbius round trip
    worst = 0.0
    for _ in range(100):
        gam = complex(rng.uniform(-5, 5), rng.uniform(0.1, 5))
        z = rng.uniform(-5, 5, cases // 100) + 1j * rng.uniform(0.1, 5, cases // 100)
        worst = max(worst, float(np.max(np.abs(mobius_to_halfplane(gam, mobius_to_disk(gam, z)) - z))))
    report(10, im_ok and disk_ok and worst <= 1e-12,
           f"{cases} cases each: Im F > 0 {im_ok}, |G| < 1 {disk_ok}, round trip {worst:.1e}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
