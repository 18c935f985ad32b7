import numpy as np
import pytest

from skewmix.clt import (
    GreenKuboResult,
    NonRealObservable,
    birkhoff_kernel,
    birkhoff_sample,
    green_kubo_variance,
    ks_test,
    zn_samples,
)
from skewmix.mixing import correlation_exact
from skewmix.observables import (
    character_observable,
    coboundary_observable,
    constant_observable,
    indicator_observable,
    random_observable,
    single_block_observable,
)
from skewmix.shift import cocycle_many
from skewmix.su2 import haar_quaternions, qinv, qmul

SQRT5 = np.sqrt(5.0)
GOLDEN = (1.0 + SQRT5) / 2.0


def test_constant_observable_sums_exactly(lps5):
    f = constant_observable(0.75, k=3)
    rng = np.random.default_rng(2)
    for n in (1, 7, 100):
        assert abs(birkhoff_sample(f, n, rng, lps5) - 0.75 * n) < 1e-10


def test_indicator_mean(lps5):
    # E[S_n] = n / (2k) for the indicator of [1]
    f = indicator_observable((1,), k=3)
    n, trials = 50, 4000
    rng = np.random.default_rng(3)
    draws = np.array([birkhoff_sample(f, n, rng, lps5) for _ in range(trials)])
    expected = n / 6.0
    se = draws.std() / np.sqrt(trials)
    assert abs(draws.mean() - expected) < 3 * se


def test_incremental_cocycle_matches_recompute(lps5):
    n = 10_000
    rng = np.random.default_rng(4)
    symbols = rng.integers(1, 7, size=(3, n))
    g = haar_quaternions(rng, 3)
    f = character_observable(1, k=3)
    _, w_final, _ = birkhoff_kernel(f, symbols, g, lps5)
    # after n steps the group point is cocycle(word)^-1 * g
    expected = qmul(qinv(cocycle_many(symbols, lps5)), g)
    assert np.abs(w_final - expected).max() < 1e-10


def test_rejects_non_real_observable(lps5):
    f = single_block_observable(1, np.array([[1j, 0], [0, 0]]), k=3)
    with pytest.raises(NonRealObservable):
        zn_samples(f, 8, 32, lps5, seed=5)


def test_zn_constant_observable_centered(lps5):
    f = constant_observable(2.0, k=3)
    z = zn_samples(f, 16, 100, lps5, seed=6)
    assert np.abs(z).max() < 1e-12


def test_zn_seed_reproducibility_and_chunk_determinism(lps5):
    f = character_observable(1, k=3)
    a = zn_samples(f, 32, 700, lps5, seed=7, chunk=256)
    b = zn_samples(f, 32, 700, lps5, seed=7, chunk=256)
    assert np.array_equal(a, b)


def test_zn_sample_mean_near_zero(lps5):
    f = character_observable(1, k=3)
    z = zn_samples(f, 128, 2000, lps5, seed=8)
    sigma = np.sqrt(GOLDEN**2)
    assert abs(z.mean()) < 3 * sigma / np.sqrt(len(z))


def test_green_kubo_character_closed_form(lps5):
    # C_l = 5^(-l/2) exactly, so sigma^2 = 1 + 2*(1/sqrt5)/(1 - 1/sqrt5)
    f = character_observable(1, k=3)
    res = green_kubo_variance(f, lps5, tol=1e-12, max_lag=80)
    expected = 1.0 + 2.0 * (1 / SQRT5) / (1.0 - 1 / SQRT5)
    assert res.converged
    assert abs(res.sigma_sq - expected) < 1e-10
    assert abs(expected - GOLDEN**2) < 1e-12  # same number, golden-ratio form
    assert abs(res.rate - 1 / SQRT5) < 1e-3


def test_green_kubo_zero_observable(lps5):
    f = constant_observable(0.0, k=3)
    res = green_kubo_variance(f, lps5)
    assert res.sigma_sq == 0.0


def test_green_kubo_coboundary_vanishes(lps5):
    u = random_observable(k=3, depth=0, two_j_max=1, seed=11, real=True)
    f = coboundary_observable(u, lps5)
    assert f.depth == 1
    res = green_kubo_variance(f, lps5, tol=1e-12, max_lag=120)
    assert abs(res.raw_sum) < 1e-8
    # telescoping also shows in the sampled sums: S_n = u - u o skew^n,
    # so Var(Z_n) = (2 C_0(u) - 2 C_n(u)) / n exactly
    n = 256
    z = zn_samples(f, n, 400, lps5, seed=12)
    c0 = correlation_exact(u, u, 0, lps5).real
    expected = 2.0 * (c0 - correlation_exact(u, u, n, lps5).real) / n
    assert abs(z.var() - expected) < 0.5 * expected + 1e-12


def test_green_kubo_variance_matches_empirical(lps5):
    f = character_observable(1, k=3)
    res = green_kubo_variance(f, lps5)
    z = zn_samples(f, 1024, 4000, lps5, seed=13)
    assert abs(z.var() - res.sigma_sq) / res.sigma_sq < 0.1


def test_ks_on_true_gaussian():
    rng = np.random.default_rng(14)
    samples = rng.standard_normal(10_000)
    assert ks_test(samples, 1.0) < 0.02


def test_ks_constant_zero_samples():
    assert ks_test(np.zeros(100), 1.0) == 0.5


def test_ks_sigma_validation():
    with pytest.raises(ValueError, match="sigma"):
        ks_test(np.array([0.1, -0.2, 0.3]), 0.0)
    assert ks_test(np.zeros(10), 0.0) == 0.0


def test_clt_for_character_observable(lps5):
    f = character_observable(1, k=3)
    res = green_kubo_variance(f, lps5)
    z = zn_samples(f, 1024, 10_000, lps5, seed=15)
    sigma = np.sqrt(res.sigma_sq)
    assert ks_test(z, sigma) < 0.05


def test_zn_distribution_stable_in_n(lps5):
    # two-sample KS distance between n = 2^10 and n = 2^11 sample sets
    from scipy import stats

    f = character_observable(1, k=3)
    z10 = zn_samples(f, 1024, 4000, lps5, seed=16)
    z11 = zn_samples(f, 2048, 4000, lps5, seed=17)
    d = stats.ks_2samp(z10, z11).statistic
    assert d < 0.03
