"""Birkhoff sums along the skew product and their limit statistics.

A sample path starts at (xi, g) with xi Bernoulli and g Haar, and accumulates
F along the orbit of the skew map; the group point is updated incrementally
by left-multiplying the inverse generator of the current symbol (with
renormalization, so 10^4-step words stay unitary).  The normalized sums

    Z_n = (S_n(F) - n * mean(F)) / sqrt(n)

are tested for Gaussianity against the variance predicted by the
autocorrelation sum  sigma^2 = C_0 + 2 * sum_{l>=1} C_l,  computed from
exact correlations and truncated once the terms are negligible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ConfigError
from .mixing import CorrelationSeries, FitError, correlation_exact, decay_fit
from .shift import DEFAULT_CAP, LocallyConstantObservable, word_indices
from .su2 import GeneratorSet, haar_quaternions, qmul
from .wigner import block_dim, wigner_d_many

IMAG_TOL = 1e-10


class NonRealObservable(ConfigError):
    """The sampled observable produced a non-negligible imaginary part.

    An input problem (the runs require real-valued F), so it maps to the
    configuration exit code.
    """

    def __init__(self, message):
        super().__init__("observable", message)


def _eval_at_indices(obs, idx, quats):
    out = obs.means[idx].astype(np.complex128)
    for j, arr in obs.blocks.items():
        dmats = wigner_d_many(j, quats)
        out += block_dim(j) * np.einsum("nab,nba->n", arr[idx], dmats)
    return out


def birkhoff_kernel(obs: LocallyConstantObservable, symbols, g_quats, gens: GeneratorSet):
    """Accumulate n = (symbols.shape[1] - depth) terms of the Birkhoff sum.

    Returns (sums, final group points, largest imaginary residue seen).
    The group points returned are the ones the *next* term would use, which
    lets tests compare the incremental product against a fresh cocycle.
    """
    symbols = np.asarray(symbols)
    n = symbols.shape[1] - obs.depth
    if n < 1:
        raise ValueError("symbol array too short for one Birkhoff term")
    inv_table = gens.inverse_symbol_table()
    w = np.array(g_quats, dtype=np.float64, copy=True)
    sums = np.zeros(symbols.shape[0])
    max_imag = 0.0
    for i in range(n):
        vals = _eval_at_indices(
            obs, word_indices(symbols[:, i : i + obs.depth], obs.k), w
        )
        max_imag = max(max_imag, float(np.abs(vals.imag).max()))
        sums += vals.real
        w = qmul(inv_table[symbols[:, i]], w)
    return sums, w, max_imag


def birkhoff_sample(obs: LocallyConstantObservable, n: int, rng, gens: GeneratorSet) -> float:
    """One draw of the n-term Birkhoff sum."""
    two_k = 2 * gens.k
    symbols = rng.integers(1, two_k + 1, size=(1, n + obs.depth))
    g = haar_quaternions(rng, 1)
    sums, _, max_imag = birkhoff_kernel(obs, symbols, g, gens)
    if max_imag > IMAG_TOL:
        raise NonRealObservable(f"imaginary residue {max_imag:.3e} exceeds {IMAG_TOL}")
    return float(sums[0])


def zn_samples(
    obs: LocallyConstantObservable,
    n: int,
    n_samples: int,
    gens: GeneratorSet,
    seed: int,
    chunk: int = 8192,
) -> np.ndarray:
    """n_samples independent draws of Z_n, deterministic for a fixed seed.

    Chunks have a fixed size with per-chunk spawned streams, so the result
    is independent of how the chunks are scheduled.
    """
    mean = obs.integral()
    if abs(mean.imag) > IMAG_TOL:
        raise NonRealObservable(f"observable mean {mean} is not real")
    two_k = 2 * gens.k
    out = np.empty(n_samples)
    done = 0
    chunk_idx = 0
    while done < n_samples:
        b = min(chunk, n_samples - done)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk_idx,)))
        symbols = rng.integers(1, two_k + 1, size=(b, n + obs.depth))
        g = haar_quaternions(rng, b)
        sums, _, max_imag = birkhoff_kernel(obs, symbols, g, gens)
        if max_imag > IMAG_TOL:
            raise NonRealObservable(
                f"imaginary residue {max_imag:.3e} exceeds {IMAG_TOL}"
            )
        out[done : done + b] = (sums - n * mean.real) / np.sqrt(n)
        done += b
        chunk_idx += 1
    return out


@dataclass
class GreenKuboResult:
    """Autocorrelation-sum variance with its truncation bookkeeping."""

    sigma_sq: float  # clipped at 0
    raw_sum: float  # the untruncated partial sum as computed
    n_terms: int  # number of lags included (0..n_terms-1)
    converged: bool  # terms fell below the tolerance before max_lag
    tail_bound: float | None  # geometric estimate of the dropped tail
    rate: float | None  # fitted decay rate of |C_l|, if available
    correlations: list  # the C_l actually summed


def green_kubo_variance(
    obs: LocallyConstantObservable,
    gens: GeneratorSet,
    tol: float = 1e-10,
    max_lag: int = 256,
    cap: int = DEFAULT_CAP,
) -> GreenKuboResult:
    """sigma^2 = C_0 + 2 sum_{l>=1} C_l from exact correlations.

    Truncates after two consecutive |C_l| below tol (a single zero crossing
    must not stop the sum) or at max_lag, whichever comes first, and reports
    a geometric bound for the dropped tail.
    """
    mean = obs.integral()
    if abs(mean.imag) > IMAG_TOL:
        raise NonRealObservable(f"observable mean {mean} is not real")
    corr = []
    total = 0.0
    small_run = 0
    for lag in range(max_lag):
        c = correlation_exact(obs, obs, lag, gens, cap=cap)
        if abs(c.imag) > 1e-8:
            raise NonRealObservable(f"correlation at lag {lag} has imag part {c.imag:.3e}")
        corr.append(c.real)
        total += c.real if lag == 0 else 2.0 * c.real
        if lag > 0:
            small_run = small_run + 1 if abs(c.real) < tol else 0
            if small_run >= 2:
                break
    converged = small_run >= 2
    rate = None
    tail_bound = None
    try:
        fit = decay_fit(
            CorrelationSeries(
                list(range(len(corr))), corr, ["exact"] * len(corr), [None] * len(corr)
            ),
            floor=tol,
        )
        rate = fit.gamma_hat
        if 0.0 < rate < 1.0:
            tail_bound = 2.0 * abs(corr[-1]) * rate / (1.0 - rate)
    except FitError:
        pass
    return GreenKuboResult(
        sigma_sq=max(total, 0.0),
        raw_sum=total,
        n_terms=len(corr),
        converged=converged,
        tail_bound=tail_bound,
        rate=rate,
        correlations=corr,
    )


def ks_test(samples, sigma: float) -> float:
    """Kolmogorov-Smirnov statistic of the samples against N(0, sigma^2)."""
    samples = np.asarray(samples, dtype=np.float64)
    if sigma <= 0.0:
        if np.ptp(samples) == 0.0 and (samples.size == 0 or samples[0] == 0.0):
            return 0.0  # degenerate limit: point mass matches point mass
        raise ValueError("sigma <= 0 with nonconstant samples (coboundary or bad truncation?)")
    return float(stats.kstest(samples, "norm", args=(0.0, sigma)).statistic)
