"""Block decomposition and spectral-norm scan of the generator averaging operator.

On the Fourier block with label two_j the averaging operator acts by the
Hermitian matrix

    S_j = (1/2k) * sum_l ( D(two_j, tau_l) + D(two_j, tau_l^-1) ),

and the truncated gap estimate rho_J is the largest block norm over
1 <= two_j <= 2J.  The scan also reports the free-group reference value
sqrt(2k-1)/k: for free generators the spectrum fills that whole segment, so
rho can never fall below it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .su2 import GeneratorSet
from .shift import cocycle_many, words_array
from .wigner import block_dim, wigner_d_many

MAX_BLOCK_DIM = 501


@dataclass(frozen=True)
class HeckeBlock:
    """One Hermitian block of the averaging operator."""

    two_j: int
    mat: np.ndarray


@dataclass(frozen=True)
class GapReport:
    """Per-block norms and the truncated gap estimate of one scan."""

    k: int
    preset: str
    two_j_max: int
    norms: tuple  # norms[i] belongs to two_j = i + 1
    rho: float
    kesten: float

    def rows(self):
        return [
            (two_j, block_dim(two_j), nrm)
            for two_j, nrm in zip(range(1, self.two_j_max + 1), self.norms)
        ]


def hecke_block(gens: GeneratorSet, two_j: int) -> HeckeBlock:
    """Build S_j; the symmetrization (M + M^dagger)/2 strips roundoff asymmetry."""
    if two_j < 1:
        raise ValueError("two_j must be >= 1 (the trivial block is the eigenvalue 1)")
    table = gens.symbol_table()[1:]  # all 2k symbol values, generators then inverses
    mats = wigner_d_many(two_j, table)
    m = mats.mean(axis=0)
    return HeckeBlock(two_j=two_j, mat=(m + m.conj().T) / 2.0)


def block_norm(block: HeckeBlock) -> float:
    """Spectral norm = largest |eigenvalue| of the Hermitian block."""
    return float(np.abs(np.linalg.eigvalsh(block.mat)).max())


def gap_scan(gens: GeneratorSet, two_j_max: int, max_dim: int = MAX_BLOCK_DIM) -> GapReport:
    """Norms of every block with 1 <= two_j <= two_j_max and their maximum.

    Blocks are independent; they are computed in increasing two_j order so
    the aggregation is deterministic.
    """
    if two_j_max < 1:
        raise ValueError("two_j_max must be >= 1")
    if block_dim(two_j_max) > max_dim:
        raise ValueError(
            f"largest block dimension {block_dim(two_j_max)} exceeds limit {max_dim}"
        )
    norms = tuple(
        block_norm(hecke_block(gens, two_j)) for two_j in range(1, two_j_max + 1)
    )
    kesten = float(np.sqrt(2 * gens.k - 1) / gens.k)
    return GapReport(
        k=gens.k,
        preset=gens.name,
        two_j_max=two_j_max,
        norms=norms,
        rho=max(norms),
        kesten=kesten,
    )


def power_word_sum(gens: GeneratorSet, two_j: int, n: int, cap: int = 10_000_000):
    """Word expansion of the n-th operator power on one block.

    Averages D(two_j, cocycle(word)) over all (2k)^n words; since the symbol
    value depends only on the first coordinate this must equal S_j^n, which
    the tests verify.
    """
    words = words_array(n, gens.k, cap=cap)
    mats = wigner_d_many(two_j, cocycle_many(words, gens))
    return mats.mean(axis=0)
