"""The symbolic layer: words, cylinders, the metric, and locally constant observables.

The state space is the full one-sided shift on the alphabet {1, ..., 2k}
with the uniform Bernoulli measure mu([word]) = (2k)^-|word| (the measure of
maximal entropy).  Symbols 1..k map to the generators, k+1..2k to their
inverses, and the cocycle of a word is the ordered product of those values.

Observables live in the class (locally constant of finite depth in x) x
(band-limited on the group): a depth-m observable stores one band-limited
function per length-m cylinder.  Cylinders are indexed big-endian, so the
first symbol is the most significant digit; prepending symbols therefore
acts on the leading axis of the stored arrays.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import CapExceeded, ConfigError
from .su2 import GeneratorSet, GroupElement, qmul
from .wigner import BandLimitedFunction, block_dim

DEFAULT_CAP = 10_000_000


def d_theta(x, xi, theta: float) -> float:
    """Shift-space distance between two cylinder prefixes.

    1 on a first-symbol disagreement, theta^N after N agreeing leading
    symbols, 0 for equal words of the same length.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    n_common = min(len(x), len(xi))
    agree = 0
    while agree < n_common and x[agree] == xi[agree]:
        agree += 1
    if agree == n_common and len(x) == len(xi):
        return 0.0
    return theta**agree


def check_word(word, k: int):
    for s in word:
        if not 1 <= s <= 2 * k:
            raise ValueError(f"symbol {s} outside alphabet 1..{2 * k}")


def word_index(word, k: int) -> int:
    """Lexicographic index of a word among all words of its length."""
    idx = 0
    for s in word:
        idx = idx * 2 * k + (s - 1)
    return idx


def index_word(idx: int, length: int, k: int) -> tuple:
    symbols = []
    for _ in range(length):
        idx, digit = divmod(idx, 2 * k)
        symbols.append(digit + 1)
    return tuple(reversed(symbols))


def words_array(length: int, k: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """All words of a given length as an ((2k)^length, length) array.

    Symbols are stored in int16 so near-cap enumerations stay in memory.
    """
    count = (2 * k) ** length
    if count > cap:
        raise CapExceeded(count, cap)
    if length == 0:
        return np.zeros((1, 0), dtype=np.int16)
    idx = np.arange(count, dtype=np.int64)
    out = np.empty((count, length), dtype=np.int16)
    for pos in range(length - 1, -1, -1):
        idx, digit = np.divmod(idx, 2 * k)
        out[:, pos] = digit + 1
    return out


def word_indices(words: np.ndarray, k: int) -> np.ndarray:
    """Vectorized word_index for an (N, m) symbol array."""
    if words.shape[1] == 0:
        return np.zeros(words.shape[0], dtype=np.int64)
    weights = (2 * k) ** np.arange(words.shape[1] - 1, -1, -1, dtype=np.int64)
    return (words - 1) @ weights


def cylinder_measure(word, k: int) -> float:
    """Bernoulli measure of the cylinder [word]."""
    return float((2 * k) ** (-len(word)))


def tau_of_symbol(a: int, gens: GeneratorSet) -> GroupElement:
    """Generator value of a symbol: tau_a for a <= k, tau_{a-k}^-1 above."""
    if not 1 <= a <= 2 * gens.k:
        raise ValueError(f"symbol {a} outside alphabet 1..{2 * gens.k}")
    return GroupElement(gens.symbol_table()[a])


def cocycle_many(words: np.ndarray, gens: GeneratorSet) -> np.ndarray:
    """Ordered products tau(w_1) ... tau(w_n) for an (N, n) symbol array."""
    table = gens.symbol_table()
    out = np.zeros((words.shape[0], 4))
    out[:, 0] = 1.0
    for i in range(words.shape[1]):
        out = qmul(out, table[words[:, i]])
    return out


def cocycle(word, gens: GeneratorSet) -> GroupElement:
    """Ordered product along a single word (identity for the empty word)."""
    check_word(word, gens.k)
    w = np.asarray(word, dtype=np.int64).reshape(1, -1)
    return GroupElement(cocycle_many(w, gens)[0])


@dataclass(frozen=True)
class ShiftConfig:
    """Alphabet size, metric parameter, and generator set of one system."""

    k: int
    theta: float
    gens: GeneratorSet

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ConfigError("theta", "must lie in (0, 1)")
        if self.gens.k != self.k:
            raise ConfigError("k", f"config k={self.k} but generator set has k={self.gens.k}")


@dataclass
class LocallyConstantObservable:
    """Observable F(x, g) constant on depth-m cylinders and band-limited in g.

    means[w] is the trivial Fourier coefficient of F on cylinder index w;
    blocks[two_j][w] the corresponding (dim, dim) coefficient matrix.
    """

    k: int
    depth: int
    two_j_max: int
    means: np.ndarray
    blocks: dict = field(default_factory=dict)

    def __post_init__(self):
        n_cyl = (2 * self.k) ** self.depth
        self.means = np.asarray(self.means, dtype=np.complex128).reshape(n_cyl)
        clean = {}
        for two_j, arr in sorted(self.blocks.items()):
            two_j = int(two_j)
            if not 1 <= two_j <= self.two_j_max:
                raise ValueError(f"block label {two_j} outside 1..{self.two_j_max}")
            d = block_dim(two_j)
            clean[two_j] = np.asarray(arr, dtype=np.complex128).reshape(n_cyl, d, d)
        self.blocks = clean

    @property
    def n_cylinders(self) -> int:
        return (2 * self.k) ** self.depth

    @classmethod
    def constant(cls, value, k: int, two_j_max: int = 0):
        return cls(k=k, depth=0, two_j_max=two_j_max, means=np.array([value]))

    @classmethod
    def from_values(cls, values: dict, k: int):
        """Build from a map word -> BandLimitedFunction covering all cylinders."""
        if not values:
            raise ValueError("empty value map")
        depth = len(next(iter(values)))
        n_cyl = (2 * k) ** depth
        if len(values) != n_cyl:
            raise ValueError(f"need {n_cyl} cylinder values, got {len(values)}")
        two_j_max = next(iter(values.values())).two_j_max
        means = np.zeros(n_cyl, dtype=np.complex128)
        labels = sorted({j for f in values.values() for j in f.blocks})
        blocks = {
            j: np.zeros((n_cyl, block_dim(j), block_dim(j)), dtype=np.complex128)
            for j in labels
        }
        for word, f in values.items():
            if len(word) != depth or f.two_j_max != two_j_max:
                raise ValueError("inconsistent depth or truncation in value map")
            idx = word_index(word, k)
            means[idx] = f.mean
            for j, mat in f.blocks.items():
                blocks[j][idx] = mat
        return cls(k=k, depth=depth, two_j_max=two_j_max, means=means, blocks=blocks)

    def value_at(self, word) -> BandLimitedFunction:
        """Restriction F(x, .) on the cylinder [word] (word length >= depth)."""
        if len(word) < self.depth:
            raise ValueError(f"word of length {len(word)} shorter than depth {self.depth}")
        idx = word_index(tuple(word)[: self.depth], self.k)
        return self.value_at_index(idx)

    def value_at_index(self, idx: int) -> BandLimitedFunction:
        return BandLimitedFunction(
            self.means[idx],
            self.two_j_max,
            {j: arr[idx] for j, arr in self.blocks.items()},
        )

    def integral(self) -> complex:
        """Total integral against mu x m (cylinders are equidistributed)."""
        return complex(self.means.mean())

    def lift(self, depth: int):
        """The same observable viewed at a greater cylinder depth."""
        if depth < self.depth:
            raise ValueError("can only lift to a greater depth")
        reps = (2 * self.k) ** (depth - self.depth)
        if reps == 1 and depth == self.depth:
            return self
        return LocallyConstantObservable(
            k=self.k,
            depth=depth,
            two_j_max=self.two_j_max,
            means=np.repeat(self.means, reps),
            blocks={j: np.repeat(arr, reps, axis=0) for j, arr in self.blocks.items()},
        )

    def __add__(self, other):
        if self.k != other.k or self.two_j_max != other.two_j_max:
            raise ValueError("mismatched alphabet or truncation")
        depth = max(self.depth, other.depth)
        a, b = self.lift(depth), other.lift(depth)
        labels = set(a.blocks) | set(b.blocks)
        zeros = lambda j: np.zeros(
            (a.n_cylinders, block_dim(j), block_dim(j)), dtype=np.complex128
        )
        return LocallyConstantObservable(
            k=self.k,
            depth=depth,
            two_j_max=self.two_j_max,
            means=a.means + b.means,
            blocks={
                j: a.blocks.get(j, zeros(j)) + b.blocks.get(j, zeros(j)) for j in labels
            },
        )

    def __mul__(self, scalar):
        c = complex(scalar)
        return LocallyConstantObservable(
            k=self.k,
            depth=self.depth,
            two_j_max=self.two_j_max,
            means=self.means * c,
            blocks={j: arr * c for j, arr in self.blocks.items()},
        )

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (other * (-1.0))


def transfer_apply(obs: LocallyConstantObservable, n: int) -> LocallyConstantObservable:
    """Normalized transfer operator: average over all n-symbol prepends.

    Output depth is max(depth - n, 0); applying it to the constant 1 returns
    the constant 1.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return obs
    m = obs.depth
    out_depth = max(m - n, 0)
    lead = (2 * obs.k) ** (m - out_depth)
    means = obs.means.reshape(lead, -1).mean(axis=0)
    blocks = {
        j: arr.reshape(lead, -1, block_dim(j), block_dim(j)).mean(axis=0)
        for j, arr in obs.blocks.items()
    }
    return LocallyConstantObservable(
        k=obs.k, depth=out_depth, two_j_max=obs.two_j_max, means=means, blocks=blocks
    )


def _l2_sq_per_cylinder(obs: LocallyConstantObservable) -> np.ndarray:
    out = np.abs(obs.means) ** 2
    for j, arr in obs.blocks.items():
        out = out + block_dim(j) * np.einsum("wab,wab->w", np.conj(arr), arr).real
    return out


def _gram(obs: LocallyConstantObservable) -> np.ndarray:
    g = np.outer(np.conj(obs.means), obs.means)
    for j, arr in obs.blocks.items():
        g = g + block_dim(j) * np.einsum("uab,vab->uv", np.conj(arr), arr)
    return g


def norm_theta_parts(obs: LocallyConstantObservable, theta: float, pair_cap: int = 4096):
    """The two squared pieces of the mixed norm: sup of L2 masses and the
    squared Lipschitz seminorm of x -> F(x, .) in L2(G).

    Both suprema are maxima over depth-m cylinder pairs: any two points in
    distinct cylinders [u] != [v] are at the fixed distance theta^N0(u, v),
    N0 the number of agreeing leading symbols.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    sup_l2_sq = float(_l2_sq_per_cylinder(obs).max())
    m = obs.depth
    if m == 0:
        return sup_l2_sq, 0.0
    n_cyl = obs.n_cylinders
    if n_cyl > pair_cap:
        raise CapExceeded(n_cyl * n_cyl, pair_cap * pair_cap)
    gram = _gram(obs)
    diag = gram.diagonal().real
    sq_diff = diag[:, None] + diag[None, :] - 2.0 * gram.real
    words = words_array(m, obs.k)
    eq = words[:, None, :] == words[None, :, :]
    n0 = np.cumprod(eq, axis=2).sum(axis=2)
    np.fill_diagonal(n0, 0)  # diagonal has sq_diff 0 anyway
    lip_sq = float((sq_diff / theta ** (2.0 * n0)).max())
    return sup_l2_sq, max(lip_sq, 0.0)


def norm_theta_G(obs: LocallyConstantObservable, theta: float) -> float:
    """Mixed norm: sqrt(sup_x ||F(x,.)||^2 + Lipschitz-in-x seminorm^2)."""
    sup_l2_sq, lip_sq = norm_theta_parts(obs, theta)
    return float(np.sqrt(sup_l2_sq + lip_sq))


def obs_inner(f: LocallyConstantObservable, h: LocallyConstantObservable) -> complex:
    """Full pairing int int conj(F) H dmu dm over cylinders and the group."""
    depth = max(f.depth, h.depth)
    a, b = f.lift(depth), h.lift(depth)
    total = np.vdot(a.means, b.means)
    for j in set(a.blocks) & set(b.blocks):
        total += block_dim(j) * np.einsum("wab,wab->", np.conj(a.blocks[j]), b.blocks[j])
    return complex(total / a.n_cylinders)


def save_observable(obs: LocallyConstantObservable, path):
    """Write the observable as JSON (re/im pairs for every coefficient)."""
    payload = {
        "format": "skewmix-observable-v1",
        "k": obs.k,
        "depth": obs.depth,
        "two_j_max": obs.two_j_max,
        "means": [[z.real, z.imag] for z in obs.means],
        "blocks": {
            str(j): [
                [[z.real, z.imag] for z in row] for mat in arr for row in mat
            ]
            for j, arr in obs.blocks.items()
        },
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_observable(path) -> LocallyConstantObservable:
    """Load and validate an observable written by save_observable."""
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise ConfigError("observable_file", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("observable_file", f"{path} is not valid JSON: {exc}") from exc
    if payload.get("format") != "skewmix-observable-v1":
        raise ConfigError("observable_file", f"{path}: unknown format tag")
    try:
        k = int(payload["k"])
        depth = int(payload["depth"])
        two_j_max = int(payload["two_j_max"])
        n_cyl = (2 * k) ** depth
        means = np.array([complex(re, im) for re, im in payload["means"]])
        blocks = {}
        for key, flat in payload.get("blocks", {}).items():
            j = int(key)
            d = block_dim(j)
            mat = np.array(
                [[complex(re, im) for re, im in row] for row in flat]
            ).reshape(n_cyl, d, d)
            blocks[j] = mat
        return LocallyConstantObservable(
            k=k, depth=depth, two_j_max=two_j_max, means=means, blocks=blocks
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError("observable_file", f"{path}: {exc}") from exc
