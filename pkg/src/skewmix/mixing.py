"""Twisted transfer operator, correlation functions, and decay-rate fitting.

The twisted transfer operator averages an observable over all n-symbol
prepends while translating the group argument by the word's cocycle:

    (Ln G)(x, g) = (2k)^-n  sum_{|alpha| = n}  G(alpha x, cocycle(alpha) g).

Because the symbol value depends only on the first coordinate, the cocycle
of a prepend is a function of the word alone, and two consequences shape the
implementation:

* for n >= depth(G) the operator factors exactly through the averaging
  operator: the result is a single band-limited function whose blocks are
  the depth-step average right-multiplied by S_j^(n - depth).  This makes
  exact correlations cheap at every lag;
* the full word sum remains available as `twisted_transfer_word_sum`, the
  independent oracle the tests compare against.

Correlations use the pairing  C_n = <F o skew^n, G> - <F, 1><1, G>  with F
entering conjugated, so C_0(F, F) is the (nonnegative) variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapExceeded, SkewmixError
from .hecke import hecke_block
from .shift import (
    DEFAULT_CAP,
    LocallyConstantObservable,
    cocycle_many,
    obs_inner,
    norm_theta_G,
    word_index,
    word_indices,
    words_array,
)
from .su2 import GeneratorSet, haar_quaternions, qinv, qmul
from .wigner import BandLimitedFunction, block_dim, wigner_d_many


class FitError(SkewmixError):
    """Raised when a decay fit has no usable points."""


def _depth_average(obs: LocallyConstantObservable, gens: GeneratorSet, cap: int):
    """Apply the twisted operator exactly depth-many times: a depth-0 result."""
    m = obs.depth
    words = words_array(m, gens.k, cap=cap)
    quats = cocycle_many(words, gens)
    mean = complex(obs.means.mean())
    blocks = {}
    for j, arr in obs.blocks.items():
        dmats = wigner_d_many(j, quats)
        blocks[j] = np.einsum("wab,wbc->ac", arr, dmats) / len(words)
    return mean, blocks


def twisted_transfer(
    obs: LocallyConstantObservable, n: int, gens: GeneratorSet, cap: int = DEFAULT_CAP
) -> LocallyConstantObservable:
    """n-th power of the twisted transfer operator, as an observable of
    depth max(depth - n, 0)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return obs
    m = obs.depth
    two_k = 2 * gens.k
    if n >= m:
        mean, blocks = _depth_average(obs, gens, cap)
        for j in blocks:
            s = hecke_block(gens, j).mat
            blocks[j] = blocks[j] @ np.linalg.matrix_power(s, n - m)
        return LocallyConstantObservable(
            k=gens.k,
            depth=0,
            two_j_max=obs.two_j_max,
            means=np.array([mean]),
            blocks={j: b[None, :, :] for j, b in blocks.items()},
        )
    words = words_array(n, gens.k, cap=cap)
    quats = cocycle_many(words, gens)
    n_pre = len(words)
    out_cyl = two_k ** (m - n)
    means = obs.means.reshape(n_pre, out_cyl).mean(axis=0)
    blocks = {}
    for j, arr in obs.blocks.items():
        d = block_dim(j)
        dmats = wigner_d_many(j, quats)
        blocks[j] = (
            np.einsum("pwab,pbc->wac", arr.reshape(n_pre, out_cyl, d, d), dmats) / n_pre
        )
    return LocallyConstantObservable(
        k=gens.k, depth=m - n, two_j_max=obs.two_j_max, means=means, blocks=blocks
    )


def twisted_transfer_apply(
    obs: LocallyConstantObservable,
    n: int,
    x_cyl,
    gens: GeneratorSet,
    cap: int = DEFAULT_CAP,
) -> BandLimitedFunction:
    """Value of (Ln obs)(x, .) on the cylinder [x_cyl]."""
    out = twisted_transfer(obs, n, gens, cap=cap)
    if len(x_cyl) < out.depth:
        raise ValueError(
            f"cylinder of length {len(x_cyl)} cannot pin a depth-{out.depth} value"
        )
    return out.value_at(tuple(x_cyl))


def twisted_transfer_word_sum(
    obs: LocallyConstantObservable,
    n: int,
    x_cyl,
    gens: GeneratorSet,
    cap: int = DEFAULT_CAP,
) -> BandLimitedFunction:
    """Brute-force word enumeration of (Ln obs)(x, .) on [x_cyl].

    Always sums all (2k)^n prepends; kept as the independent oracle for
    twisted_transfer's factorized paths.
    """
    m = obs.depth
    if len(x_cyl) < max(m - n, 0):
        raise ValueError("cylinder too short for this depth")
    two_k = 2 * gens.k
    words = words_array(n, gens.k, cap=cap)
    quats = cocycle_many(words, gens)
    if n >= m:
        idx = word_indices(words[:, :m], gens.k)
    else:
        tail = word_index(tuple(x_cyl)[: m - n], gens.k)
        idx = word_indices(words, gens.k) * two_k ** (m - n) + tail
    mean = complex(obs.means[idx].mean())
    blocks = {}
    for j, arr in obs.blocks.items():
        dmats = wigner_d_many(j, quats)
        blocks[j] = np.einsum("nab,nbc->ac", arr[idx], dmats) / len(words)
    return BandLimitedFunction(mean, obs.two_j_max, blocks)


def correlation_exact(
    f: LocallyConstantObservable,
    g: LocallyConstantObservable,
    n: int,
    gens: GeneratorSet,
    cap: int = DEFAULT_CAP,
) -> complex:
    """Correlation of the skew product at lag n, exact up to roundoff."""
    transferred = twisted_transfer(g, n, gens, cap=cap)
    raw = obs_inner(f, transferred)
    return raw - np.conj(f.integral()) * g.integral()


def correlation_direct(
    f: LocallyConstantObservable,
    g: LocallyConstantObservable,
    n: int,
    gens: GeneratorSet,
    cap: int = DEFAULT_CAP,
    chunk: int = 1 << 15,
) -> complex:
    """Direct enumeration of the covariance along the skew orbit.

    Never routes through the transfer operator: it enumerates all words of
    length max(n + depth F, depth G), pairs F composed with the n-th skew
    iterate against G, and integrates the group variable by Schur
    orthogonality.  Test oracle for correlation_exact.
    """
    m_f, m_g = f.depth, g.depth
    length = max(n + m_f, m_g)
    two_k = 2 * gens.k
    count = two_k**length
    if count > cap:
        raise CapExceeded(count, cap)
    common = sorted(set(f.blocks) & set(g.blocks))
    total = 0.0 + 0.0j
    for start in range(0, count, chunk):
        idx = np.arange(start, min(start + chunk, count), dtype=np.int64)
        words = np.empty((len(idx), length), dtype=np.int64)
        rest = idx.copy()
        for pos in range(length - 1, -1, -1):
            rest, digit = np.divmod(rest, two_k)
            words[:, pos] = digit + 1
        c_inv = qinv(cocycle_many(words[:, :n], gens))
        fi = word_indices(words[:, n : n + m_f], gens.k)
        gi = word_indices(words[:, :m_g], gens.k)
        vals = np.conj(f.means[fi]) * g.means[gi]
        for j in common:
            dmats = wigner_d_many(j, c_inv)
            translated = np.einsum("nab,nbc->nac", f.blocks[j][fi], dmats)
            vals = vals + block_dim(j) * np.einsum(
                "nab,nab->n", np.conj(translated), g.blocks[j][gi]
            )
        total += vals.sum()
    return total / count - np.conj(f.integral()) * g.integral()


def _eval_at_words(obs, words, quats):
    idx = word_indices(words, obs.k)
    out = obs.means[idx].astype(np.complex128)
    for j, arr in obs.blocks.items():
        dmats = wigner_d_many(j, quats)
        out += block_dim(j) * np.einsum("nab,nba->n", arr[idx], dmats)
    return out


def correlation_mc(
    f: LocallyConstantObservable,
    g: LocallyConstantObservable,
    n: int,
    gens: GeneratorSet,
    n_samples: int,
    seed: int,
    chunk: int = 1 << 15,
    translate=None,
):
    """Monte Carlo correlation estimate and its standard error.

    Samples the first max(n + depth F, depth G) symbols from the Bernoulli
    measure and the group point from Haar; the skew iterate left-multiplies
    by the inverse cocycle.  Streams are spawned per fixed-size chunk from
    the root seed, so results do not depend on scheduling.

    translate, if given, replaces every Haar sample g by translate * g; by
    Haar invariance this must not move the estimate beyond its error bar,
    which the tests exploit as a self-check.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    length = max(n + f.depth, g.depth)
    two_k = 2 * gens.k
    acc = 0.0 + 0.0j
    acc_sq = 0.0
    done = 0
    chunk_idx = 0
    while done < n_samples:
        b = min(chunk, n_samples - done)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk_idx,)))
        symbols = rng.integers(1, two_k + 1, size=(b, length))
        gq = haar_quaternions(rng, b)
        if translate is not None:
            gq = qmul(translate.q[None, :], gq)
        w = qmul(qinv(cocycle_many(symbols[:, :n], gens)), gq)
        f_vals = _eval_at_words(f, symbols[:, n : n + f.depth], w)
        g_vals = _eval_at_words(g, symbols[:, : g.depth], gq)
        vals = np.conj(f_vals) * g_vals
        acc += vals.sum()
        acc_sq += float((np.abs(vals) ** 2).sum())
        done += b
        chunk_idx += 1
    mean_raw = acc / n_samples
    var = max(acc_sq / n_samples - abs(mean_raw) ** 2, 0.0)
    if n_samples > 1:
        var *= n_samples / (n_samples - 1)
    se = float(np.sqrt(var / n_samples))
    estimate = mean_raw - np.conj(f.integral()) * g.integral()
    return complex(estimate), se


@dataclass
class CorrelationSeries:
    """Correlation values over a range of lags with per-point provenance."""

    n_values: list
    values: list
    methods: list  # "exact" or "mc"
    errors: list  # standard error for mc points, None for exact


def correlation_series(
    f,
    g,
    n_values,
    gens: GeneratorSet,
    cap: int = DEFAULT_CAP,
    mc_samples: int = 0,
    seed: int = 0,
) -> CorrelationSeries:
    """Exact correlations where the enumeration fits the cap, Monte Carlo
    beyond; mc_samples > 0 forces an MC estimate at every lag for
    cross-checking."""
    values, methods, errors = [], [], []
    for n in n_values:
        try:
            c = correlation_exact(f, g, n, gens, cap=cap)
            method, se = "exact", None
        except CapExceeded:
            if mc_samples <= 0:
                raise
            c, se = correlation_mc(f, g, n, gens, mc_samples, seed + n)
            method = "mc"
        values.append(c)
        methods.append(method)
        errors.append(se)
    return CorrelationSeries(list(n_values), values, methods, errors)


@dataclass
class DecayFit:
    """Least-squares geometric rate of a correlation series."""

    gamma_hat: float
    raw_slope: float
    n_used: int
    window: tuple
    residual: float
    bound_rate: float | None = None
    floor: float = 1e-12


def decay_fit(series: CorrelationSeries, bound_rate=None, floor: float = 1e-12) -> DecayFit:
    """Fit log|C_n| = slope * n + const over points above the floor."""
    ns = np.asarray(series.n_values, dtype=np.float64)
    mags = np.abs(np.asarray(series.values, dtype=np.complex128))
    keep = mags > floor
    if keep.sum() < 4:
        raise FitError(f"no usable points: {int(keep.sum())} above floor {floor}")
    x, y = ns[keep], np.log(mags[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    gamma = float(np.exp(slope))
    return DecayFit(
        gamma_hat=min(max(gamma, 0.0), 1.0),
        raw_slope=float(slope),
        n_used=int(keep.sum()),
        window=(int(ns[keep].min()), int(ns[keep].max())),
        residual=resid,
        bound_rate=bound_rate,
        floor=floor,
    )


@dataclass
class SplitBoundCheck:
    """Measured transfer-operator deviation against the two-term split bound."""

    n: int
    n1: int
    n2: int
    lhs: float  # sup_x || (Ln G)(x,.) - mean ||_{L2(G)}
    rhs: float  # ||G|| * (theta^n1 + 2 rho^n2)
    theta_term: float
    hecke_term: float
    norm_g: float
    rho: float


def proposition_split_check(
    g: LocallyConstantObservable,
    n: int,
    gens: GeneratorSet,
    theta: float,
    n1=None,
    rho=None,
    cap: int = DEFAULT_CAP,
) -> SplitBoundCheck:
    """Deviation of the n-th twisted transfer power vs theta^n1 + 2 rho^n2.

    n splits as n1 + n2 (default n1 = n // 2): the first part pays the
    locally-constant approximation, the second the block spectral gap.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n1 is None:
        n1 = n // 2
    if not 0 <= n1 <= n:
        raise ValueError("n1 must lie in 0..n")
    n2 = n - n1
    if rho is None:
        rho = _max_block_norm(g, gens)
    transferred = twisted_transfer(g, n, gens, cap=cap)
    i_g = g.integral()
    dev_sq = np.abs(transferred.means - i_g) ** 2
    for j, arr in transferred.blocks.items():
        dev_sq = dev_sq + block_dim(j) * np.einsum("wab,wab->w", np.conj(arr), arr).real
    lhs = float(np.sqrt(dev_sq.max()))
    norm_g = norm_theta_G(g, theta)
    theta_term = theta**n1
    hecke_term = 2.0 * rho**n2
    return SplitBoundCheck(
        n=n,
        n1=n1,
        n2=n2,
        lhs=lhs,
        rhs=norm_g * (theta_term + hecke_term),
        theta_term=theta_term,
        hecke_term=hecke_term,
        norm_g=norm_g,
        rho=float(rho),
    )


def _max_block_norm(obs: LocallyConstantObservable, gens: GeneratorSet) -> float:
    from .hecke import block_norm

    labels = sorted(obs.blocks)
    if not labels:
        return 0.0
    return max(block_norm(hecke_block(gens, j)) for j in range(1, max(labels) + 1))


def cylinder_sample_error(
    f: LocallyConstantObservable, n: int, gens: GeneratorSet, theta: float
):
    """Error of the one-point-per-cylinder quadrature against the bound
    ||F|| * theta^n.

    The sample point of [alpha] is alpha continued by the symbol 1, the
    lexicographically smallest extension.
    """
    m = f.depth
    two_k = 2 * gens.k
    i_f = f.integral()
    if n >= m:
        avg = complex(f.means.mean())
    else:
        idx = np.arange(two_k**n, dtype=np.int64) * two_k ** (m - n)
        avg = complex(f.means[idx].mean())
    lhs = abs(avg - i_f)
    bound = norm_theta_G(f, theta) * theta**n
    return lhs, bound
