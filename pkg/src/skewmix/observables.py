"""Constructors for the observables the experiments run on.

Everything returns a LocallyConstantObservable; the CLI/service reference
them through compact spec strings (see from_spec).
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .shift import LocallyConstantObservable, load_observable, word_index, words_array
from .su2 import GeneratorSet, GroupElement
from .wigner import block_dim, wigner_d

EPS = GroupElement(np.array([0.0, 0.0, 1.0, 0.0]))  # [[0, 1], [-1, 0]]


def constant_observable(value, k: int, two_j_max: int = 0) -> LocallyConstantObservable:
    return LocallyConstantObservable.constant(value, k=k, two_j_max=two_j_max)


def character_observable(two_j: int, k: int) -> LocallyConstantObservable:
    """f(x, g) = tr D(two_j, g): real, mean zero, unit L2 norm, depth 0."""
    if two_j < 1:
        raise ValueError("two_j must be >= 1")
    d = block_dim(two_j)
    return LocallyConstantObservable(
        k=k,
        depth=0,
        two_j_max=two_j,
        means=np.zeros(1),
        blocks={two_j: (np.eye(d) / d)[None, :, :]},
    )


def single_block_observable(
    two_j: int, coeff, k: int, mean=0.0, two_j_max=None
) -> LocallyConstantObservable:
    """Depth-0 observable with one prescribed Fourier block."""
    d = block_dim(two_j)
    coeff = np.asarray(coeff, dtype=np.complex128).reshape(d, d)
    return LocallyConstantObservable(
        k=k,
        depth=0,
        two_j_max=two_j_max or two_j,
        means=np.array([mean]),
        blocks={two_j: coeff[None, :, :]},
    )


def indicator_observable(word, k: int) -> LocallyConstantObservable:
    """Indicator of the cylinder [word], constant in the group variable."""
    n_cyl = (2 * k) ** len(word)
    means = np.zeros(n_cyl)
    means[word_index(tuple(word), k)] = 1.0
    return LocallyConstantObservable(k=k, depth=len(word), two_j_max=0, means=means)


def conjugate_observable(obs: LocallyConstantObservable) -> LocallyConstantObservable:
    """Pointwise complex conjugate, cylinder by cylinder."""
    blocks = {}
    for j, arr in obs.blocks.items():
        e = wigner_d(j, EPS)
        blocks[j] = np.einsum("ab,wbc,cd->wad", e.conj().T, np.conj(arr), e)
    return LocallyConstantObservable(
        k=obs.k,
        depth=obs.depth,
        two_j_max=obs.two_j_max,
        means=np.conj(obs.means),
        blocks=blocks,
    )


def real_part(obs: LocallyConstantObservable) -> LocallyConstantObservable:
    return (obs + conjugate_observable(obs)) * 0.5


def random_observable(
    k: int,
    depth: int,
    two_j_max: int,
    seed: int,
    real: bool = False,
    mean_zero: bool = False,
) -> LocallyConstantObservable:
    """Observable with iid Gaussian coefficients on every cylinder and block."""
    rng = np.random.default_rng(seed)
    n_cyl = (2 * k) ** depth
    means = rng.standard_normal(n_cyl) + 1j * rng.standard_normal(n_cyl)
    blocks = {}
    for j in range(1, two_j_max + 1):
        d = block_dim(j)
        blocks[j] = rng.standard_normal((n_cyl, d, d)) + 1j * rng.standard_normal(
            (n_cyl, d, d)
        )
    obs = LocallyConstantObservable(
        k=k, depth=depth, two_j_max=max(two_j_max, 1), means=means, blocks=blocks
    )
    if real:
        obs = real_part(obs)
    if mean_zero:
        obs = obs + constant_observable(-obs.integral(), k, obs.two_j_max)
    return obs


def compose_with_skew(
    obs: LocallyConstantObservable, gens: GeneratorSet
) -> LocallyConstantObservable:
    """u o skew: (x, g) -> u(sigma x, tau(x)^-1 g), one depth deeper than u."""
    if gens.k != obs.k:
        raise ValueError("generator set alphabet does not match the observable")
    two_k = 2 * gens.k
    m = obs.depth
    n_out = two_k ** (m + 1)
    means = np.tile(obs.means, two_k)
    blocks = {
        j: np.empty((n_out, block_dim(j), block_dim(j)), dtype=np.complex128)
        for j in obs.blocks
    }
    inv_table = gens.inverse_symbol_table()
    stride = two_k**m
    for a in range(1, two_k + 1):
        tau_inv = GroupElement(inv_table[a])
        sl = slice((a - 1) * stride, a * stride)
        for j, arr in obs.blocks.items():
            blocks[j][sl] = arr @ wigner_d(j, tau_inv)
    return LocallyConstantObservable(
        k=obs.k, depth=m + 1, two_j_max=obs.two_j_max, means=means, blocks=blocks
    )


def coboundary_observable(
    u: LocallyConstantObservable, gens: GeneratorSet
) -> LocallyConstantObservable:
    """F = u - u o skew; its Birkhoff sums telescope, so the CLT variance is 0."""
    return u - compose_with_skew(u, gens)


def from_spec(spec: str, k: int) -> LocallyConstantObservable:
    """Parse an observable spec string.

    Forms:
      constant:VALUE
      character:TWO_J
      block:TWO_J[:SEED]          identity coefficients, or Gaussian from SEED
      indicator:s1,s2,...         cylinder indicator
      random:depth=D,two_j_max=J,seed=S[,real=1][,mean_zero=1]
      file:PATH                   JSON observable file
    """
    try:
        kind, _, rest = spec.partition(":")
        if kind == "constant":
            return constant_observable(complex(rest), k)
        if kind == "character":
            return character_observable(int(rest), k)
        if kind == "block":
            parts = rest.split(":")
            two_j = int(parts[0])
            d = block_dim(two_j)
            if len(parts) > 1:
                rng = np.random.default_rng(int(parts[1]))
                coeff = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            else:
                # normalized identity block: unit L2 norm
                coeff = np.eye(d) / d
            return single_block_observable(two_j, coeff, k)
        if kind == "indicator":
            word = tuple(int(tok) for tok in rest.split(","))
            return indicator_observable(word, k)
        if kind == "random":
            kv = dict(item.split("=", 1) for item in rest.split(","))
            return random_observable(
                k=k,
                depth=int(kv["depth"]),
                two_j_max=int(kv["two_j_max"]),
                seed=int(kv["seed"]),
                real=kv.get("real", "0") not in ("0", "false"),
                mean_zero=kv.get("mean_zero", "0") not in ("0", "false"),
            )
        if kind == "file":
            obs = load_observable(rest)
            if obs.k != k:
                raise ConfigError(
                    "observable", f"{rest}: alphabet k={obs.k} does not match run k={k}"
                )
            return obs
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError("observable", f"cannot parse {spec!r}: {exc}") from exc
    raise ConfigError("observable", f"unknown observable kind in {spec!r}")
