"""SU(2) arithmetic on unit quaternions.

A group element q = a + b*i + c*j + d*k with a^2+b^2+c^2+d^2 = 1 is
identified with the special unitary matrix

    [[a+bi, c+di],
     [-c+di, a-bi]]

so that quaternion multiplication matches matrix multiplication.  Every
product is renormalized, which keeps long words (lengths up to ~10^4 in the
central limit runs) on the unit sphere to machine precision.

Batch helpers operate on arrays of shape (..., 4) so that random walks and
Monte Carlo sweeps stay vectorized.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

UNIT_TOL = 1e-12


def qmul(q1, q2):
    """Hamilton product of quaternion arrays of shape (..., 4), renormalized."""
    a1, b1, c1, d1 = q1[..., 0], q1[..., 1], q1[..., 2], q1[..., 3]
    a2, b2, c2, d2 = q2[..., 0], q2[..., 1], q2[..., 2], q2[..., 3]
    out = np.empty(np.broadcast(q1, q2).shape, dtype=np.float64)
    out[..., 0] = a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2
    out[..., 1] = a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2
    out[..., 2] = a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2
    out[..., 3] = a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2
    out /= np.linalg.norm(out, axis=-1, keepdims=True)
    return out


def qinv(q):
    """Conjugate (= inverse on the unit sphere) of quaternion arrays."""
    out = q.copy()
    out[..., 1:] *= -1.0
    return out


def qmatrix(q):
    """2x2 special unitary view of quaternion arrays; shape (..., 2, 2)."""
    a, b, c, d = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    m = np.empty(q.shape[:-1] + (2, 2), dtype=np.complex128)
    m[..., 0, 0] = a + 1j * b
    m[..., 0, 1] = c + 1j * d
    m[..., 1, 0] = -c + 1j * d
    m[..., 1, 1] = a - 1j * b
    return m


def haar_quaternions(rng, n):
    """Draw n Haar-uniform elements as an (n, 4) array (normalized Gaussians)."""
    q = rng.standard_normal((n, 4))
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    return q


@dataclass(frozen=True)
class GroupElement:
    """An SU(2) element stored as a unit quaternion (a, b, c, d)."""

    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=np.float64).reshape(4)
        nrm = float(np.linalg.norm(q))
        if abs(nrm - 1.0) > 1e-9:
            raise ValueError(f"quaternion norm {nrm} too far from 1")
        object.__setattr__(self, "q", q / nrm)

    @property
    def matrix(self):
        return qmatrix(self.q)

    def __repr__(self):
        a, b, c, d = self.q
        return f"GroupElement({a:+.6f}{b:+.6f}i{c:+.6f}j{d:+.6f}k)"


IDENTITY = GroupElement(np.array([1.0, 0.0, 0.0, 0.0]))


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    """Group product g*h."""
    return GroupElement(qmul(g.q, h.q))


def inverse(g: GroupElement) -> GroupElement:
    """Group inverse (quaternion conjugate)."""
    return GroupElement(qinv(g.q))


def haar_sample(rng) -> GroupElement:
    """One Haar-uniform element from a numpy Generator."""
    return GroupElement(haar_quaternions(rng, 1)[0])


def class_angle(g: GroupElement) -> float:
    """Conjugacy-class angle theta in [0, 2*pi] with tr(g) = 2*cos(theta/2)."""
    return 2.0 * float(np.arccos(np.clip(g.q[0], -1.0, 1.0)))


def from_matrix(m, tol=1e-9) -> GroupElement:
    """Convert a 2x2 complex matrix to a group element, checking SU(2) membership.

    Raises ValueError with the residuals if the matrix is not special unitary.
    """
    m = np.asarray(m, dtype=np.complex128)
    unit_res = float(np.abs(m.conj().T @ m - np.eye(2)).max())
    det_res = float(abs(np.linalg.det(m) - 1.0))
    if unit_res > tol or det_res > tol:
        raise ValueError(
            f"matrix is not in SU(2): unitarity residual {unit_res:.3e}, "
            f"determinant residual {det_res:.3e}"
        )
    a = m[0, 0].real
    b = m[0, 0].imag
    c = m[0, 1].real
    d = m[0, 1].imag
    return GroupElement(np.array([a, b, c, d]))


@dataclass(frozen=True)
class GeneratorSet:
    """The chosen tau_1..tau_k together with the symmetrized alphabet.

    Symbols 1..k act by tau_a, symbols k+1..2k by the inverse of tau_{a-k},
    so the alphabet always has size 2k.
    """

    k: int
    taus: tuple
    name: str = "custom"
    _table: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.k < 1 or len(self.taus) != self.k:
            raise ValueError(f"need k>=1 generators, got k={self.k}, {len(self.taus)} taus")
        # lookup row a holds the quaternion for symbol a (row 0 is unused)
        table = np.zeros((2 * self.k + 1, 4))
        table[0, 0] = 1.0
        for i, tau in enumerate(self.taus):
            table[1 + i] = tau.q
            table[1 + self.k + i] = qinv(tau.q)
        object.__setattr__(self, "_table", table)

    @property
    def alphabet_size(self):
        return 2 * self.k

    def symbol_table(self):
        """(2k+1, 4) quaternion lookup indexed by symbol; row 0 is the identity."""
        return self._table

    def inverse_symbol_table(self):
        """Same lookup but for the inverses tau(a)^-1."""
        return qinv(self._table)


_DIAGONAL_RE = re.compile(r"^diagonal\(\s*([-+0-9.eE]+)\s*\)$")


def preset(name: str) -> GeneratorSet:
    """Build a named generator set.

    ``lps5`` gives the three p=5 quaternionic generators
    (1+2i, 1+2j, 1+2k)/sqrt(5), whose averaging operator is Ramanujan.
    ``diagonal(phi)`` gives the single toral generator
    diag(e^{i*phi}, e^{-i*phi}); it exists as the no-gap counterexample.
    ``file:PATH`` loads a custom set, see :func:`load_generator_file`.
    """
    if name == "lps5":
        s = 1.0 / np.sqrt(5.0)
        taus = (
            GroupElement(np.array([s, 2 * s, 0.0, 0.0])),
            GroupElement(np.array([s, 0.0, 2 * s, 0.0])),
            GroupElement(np.array([s, 0.0, 0.0, 2 * s])),
        )
        return GeneratorSet(k=3, taus=taus, name="lps5")
    m = _DIAGONAL_RE.match(name)
    if m:
        phi = float(m.group(1))
        tau = GroupElement(np.array([np.cos(phi), np.sin(phi), 0.0, 0.0]))
        return GeneratorSet(k=1, taus=(tau,), name=name)
    if name.startswith("file:"):
        return load_generator_file(name[5:])
    raise ConfigError("preset", f"unknown generator preset {name!r}")


def load_generator_file(path) -> GeneratorSet:
    """Read generators from text: 8 reals per generator, row-major re/im pairs.

    Entries are whitespace separated; ``#`` starts a comment.  Each matrix is
    checked for unitarity and unit determinant, and rejected with the
    residuals otherwise.
    """
    numbers = []
    try:
        with open(path) as fh:
            for line in fh:
                line = line.split("#", 1)[0]
                numbers.extend(float(tok) for tok in line.split())
    except OSError as exc:
        raise ConfigError("generator_file", f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError("generator_file", f"bad number in {path}: {exc}") from exc
    if not numbers or len(numbers) % 8 != 0:
        raise ConfigError(
            "generator_file",
            f"{path}: expected 8 reals per generator, got {len(numbers)} numbers",
        )
    taus = []
    for i in range(0, len(numbers), 8):
        v = numbers[i : i + 8]
        m = np.array(
            [[v[0] + 1j * v[1], v[2] + 1j * v[3]], [v[4] + 1j * v[5], v[6] + 1j * v[7]]]
        )
        try:
            taus.append(from_matrix(m))
        except ValueError as exc:
            raise ConfigError("generator_file", f"{path}, generator {i // 8 + 1}: {exc}")
    return GeneratorSet(k=len(taus), taus=tuple(taus), name=f"file:{path}")
