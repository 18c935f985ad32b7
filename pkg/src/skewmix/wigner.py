"""Irreducible unitary representations of SU(2) and band-limited Fourier calculus.

Blocks are labelled by the integer ``two_j`` (twice the spin), so the block
dimension is ``two_j + 1`` and no half-integer floating point labels ever
need comparing.

Convention.  D(two_j, g) is the matrix of the action of g on homogeneous
polynomials of degree two_j in (z1, z2), written in the orthonormal monomial
basis ordered by decreasing z1-degree:

    basis index r  <->  z1^(two_j - r) * z2^r / sqrt((two_j - r)! r!)

With the substitution action (p -> p(M(g)^T z)) this pins down two anchors
that the tests enforce:

    D(1, g)  == matrix view of g, entry for entry;
    D(2, diag(e^{i phi}, e^{-i phi})) == diag(e^{2i phi}, 1, e^{-2i phi}).

The build is the two_j-fold symmetric power evaluated by iterated convolution
of the two linear factors, not a closed-form factorial formula.  For blocks
above ``_EXTENDED_ABOVE`` the convolution runs in 80-bit extended precision:
in double precision the worst-case cancellation grows like 2^(two_j/2) and
would eat into the 1e-9 residual budget near two_j = 50.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .su2 import GroupElement, qmatrix

_EXTENDED_ABOVE = 20


def block_dim(two_j: int) -> int:
    """Dimension of the irreducible block with label two_j."""
    return two_j + 1


def wigner_d_many(two_j: int, quats) -> np.ndarray:
    """Representation matrices for a batch of quaternions.

    quats: (N, 4) float array of unit quaternions.
    Returns (N, two_j+1, two_j+1) complex128.
    """
    q = np.atleast_2d(np.asarray(quats, dtype=np.float64))
    n = int(two_j)
    if n < 0:
        raise ValueError("two_j must be nonnegative")
    nelem = q.shape[0]
    if n == 0:
        return np.ones((nelem, 1, 1), dtype=np.complex128)
    if n == 1:
        return qmatrix(q)

    cdt = np.clongdouble if n > _EXTENDED_ABOVE else np.complex128
    rdt = np.longdouble if n > _EXTENDED_ABOVE else np.float64
    a, b, c, d = (q[:, i].astype(rdt) for i in range(4))
    alpha = (a + 1j * b).astype(cdt)
    beta = (c + 1j * d).astype(cdt)
    gamma = (-c + 1j * d).astype(cdt)
    delta = (a - 1j * b).astype(cdt)

    # coefficient arrays of (alpha z1 + gamma z2)^t and (beta z1 + delta z2)^t,
    # indexed by z2-degree
    upow = [np.ones((nelem, 1), dtype=cdt)]
    vpow = [np.ones((nelem, 1), dtype=cdt)]
    for t in range(1, n + 1):
        prev = upow[-1]
        cur = np.zeros((nelem, t + 1), dtype=cdt)
        cur[:, :t] += alpha[:, None] * prev
        cur[:, 1:] += gamma[:, None] * prev
        upow.append(cur)
        prev = vpow[-1]
        cur = np.zeros((nelem, t + 1), dtype=cdt)
        cur[:, :t] += beta[:, None] * prev
        cur[:, 1:] += delta[:, None] * prev
        vpow.append(cur)

    r = np.arange(n + 1)
    log_norm = 0.5 * (gammaln(r + 1.0) + gammaln(n - r + 1.0))
    out = np.empty((nelem, n + 1, n + 1), dtype=np.complex128)
    for m in range(n + 1):
        u = upow[n - m]
        v = vpow[m]
        col = np.zeros((nelem, n + 1), dtype=cdt)
        for s in range(m + 1):
            col[:, s : s + (n - m) + 1] += v[:, s : s + 1] * u
        scale = np.exp(log_norm - log_norm[m]).astype(rdt)
        out[:, :, m] = (col * scale[None, :]).astype(np.complex128)
    return out


def wigner_d(two_j: int, g: GroupElement) -> np.ndarray:
    """Representation matrix of a single group element."""
    return wigner_d_many(two_j, g.q[None, :])[0]


def character_many(two_j: int, traces_half) -> np.ndarray:
    """Characters from cos(theta/2) values via the Chebyshev U recurrence.

    The recurrence handles the class angles 0 and 2*pi without a special
    case (U_n(1) = n+1, U_n(-1) = (-1)^n (n+1)).
    """
    x = np.asarray(traces_half, dtype=np.float64)
    if two_j == 0:
        return np.ones_like(x)
    prev = np.ones_like(x)
    cur = 2.0 * x
    for _ in range(two_j - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur


def character(two_j: int, g: GroupElement) -> float:
    """tr D(two_j, g), evaluated through the class angle only."""
    return float(character_many(two_j, np.array([g.q[0]]))[0])


@dataclass
class BandLimitedFunction:
    """Function on SU(2) with finitely many Fourier blocks.

    f(g) = mean + sum_j (two_j+1) * tr(blocks[two_j] @ D(two_j, g)),
    where blocks maps 1 <= two_j <= two_j_max to a (two_j+1, two_j+1)
    coefficient matrix.  Parseval:  int |f|^2 dm = |mean|^2
    + sum_j (two_j+1) * ||blocks[two_j]||_F^2.
    """

    mean: complex
    two_j_max: int
    blocks: dict = field(default_factory=dict)

    def __post_init__(self):
        self.mean = complex(self.mean)
        clean = {}
        for two_j, mat in sorted(self.blocks.items()):
            two_j = int(two_j)
            if not 1 <= two_j <= self.two_j_max:
                raise ValueError(f"block label {two_j} outside 1..{self.two_j_max}")
            mat = np.asarray(mat, dtype=np.complex128)
            if mat.shape != (two_j + 1, two_j + 1):
                raise ValueError(f"block {two_j} has shape {mat.shape}")
            clean[two_j] = mat
        self.blocks = clean

    def block(self, two_j: int) -> np.ndarray:
        """Coefficient matrix for a label, zero if absent."""
        d = block_dim(two_j)
        return self.blocks.get(two_j, np.zeros((d, d), dtype=np.complex128))

    def __add__(self, other):
        _check_truncation(self, other)
        labels = set(self.blocks) | set(other.blocks)
        return BandLimitedFunction(
            self.mean + other.mean,
            self.two_j_max,
            {j: self.block(j) + other.block(j) for j in labels},
        )

    def __sub__(self, other):
        return self + (other * (-1.0))

    def __mul__(self, scalar):
        c = complex(scalar)
        return BandLimitedFunction(
            self.mean * c, self.two_j_max, {j: m * c for j, m in self.blocks.items()}
        )

    __rmul__ = __mul__


def _check_truncation(f: BandLimitedFunction, h: BandLimitedFunction):
    if f.two_j_max != h.two_j_max:
        raise ValueError(
            f"truncation mismatch: two_j_max {f.two_j_max} vs {h.two_j_max}"
        )


def evaluate_many(f: BandLimitedFunction, quats) -> np.ndarray:
    """Pointwise values of f at a batch of group elements, shape (N,)."""
    q = np.atleast_2d(np.asarray(quats, dtype=np.float64))
    out = np.full(q.shape[0], complex(f.mean), dtype=np.complex128)
    for two_j, mat in f.blocks.items():
        dmats = wigner_d_many(two_j, q)
        out += block_dim(two_j) * np.einsum("ab,nba->n", mat, dmats)
    return out


def evaluate(f: BandLimitedFunction, g: GroupElement) -> complex:
    """Pointwise value f(g)."""
    return complex(evaluate_many(f, g.q[None, :])[0])


def left_translate(f: BandLimitedFunction, tau: GroupElement) -> BandLimitedFunction:
    """Coefficients of g -> f(tau g); each block maps A -> A @ D(two_j, tau)."""
    return BandLimitedFunction(
        f.mean,
        f.two_j_max,
        {two_j: mat @ wigner_d(two_j, tau) for two_j, mat in f.blocks.items()},
    )


def l2_inner(f: BandLimitedFunction, h: BandLimitedFunction) -> complex:
    """Haar inner product int conj(f) h dm by Schur orthogonality.

    Conjugate-linear in the first argument, matching the Monte Carlo
    quadrature oracle used in the tests.
    """
    _check_truncation(f, h)
    total = np.conj(f.mean) * h.mean
    for two_j in set(f.blocks) & set(h.blocks):
        total += block_dim(two_j) * np.einsum(
            "ab,ab->", np.conj(f.blocks[two_j]), h.blocks[two_j]
        )
    return complex(total)


def l2_norm(f: BandLimitedFunction) -> float:
    """L2(G) norm of f."""
    return float(np.sqrt(max(l2_inner(f, f).real, 0.0)))


def conjugate(f: BandLimitedFunction) -> BandLimitedFunction:
    """Coefficients of conj(f).

    Uses the self-conjugacy of SU(2) blocks: conj(D(g)) = E D(g) E^-1 with
    E = D(eps) for eps = [[0, 1], [-1, 0]], so A -> E^-1 conj(A) E.
    """
    eps = GroupElement(np.array([0.0, 0.0, 1.0, 0.0]))
    blocks = {}
    for two_j, mat in f.blocks.items():
        e = wigner_d(two_j, eps)
        blocks[two_j] = e.conj().T @ np.conj(mat) @ e
    return BandLimitedFunction(np.conj(f.mean), f.two_j_max, blocks)
