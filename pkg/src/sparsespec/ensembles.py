"""Matrix ensembles: sparse adjacency models, diluted Wigner matrices, the
zero-diagonal Gaussian orthogonal ensemble, and the interpolating matrix flow.

All generators produce real symmetric matrices with an exactly zero diagonal,
entries normalized so the off-diagonal variance is 1/N, and are pure functions
of (parameters, stream): the same stream always reproduces the same matrix,
bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    InvalidParameter,
    UnsupportedCumulantOrder,
)

ENSEMBLE_KINDS = (
    "adjacency",
    "centered-er",
    "diluted-wigner",
    "sparse-generic",
    "goe-zero-diag",
    "flow",
)


@dataclass(frozen=True)
class RngStream:
    """Counter-based substream of a master seed.

    Streams with equal (master_seed, stream_index) yield identical draws;
    distinct indices yield statistically independent draws, so Monte Carlo
    samples can be farmed out to workers in any order.
    """

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.master_seed < 0 or self.master_seed >= 2**64:
            raise InvalidParameter("master_seed must fit in an unsigned 64-bit integer")
        if self.stream_index < 0:
            raise InvalidParameter("stream_index must be nonnegative")

    def sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(self.sequence())

    def derived_seed(self) -> int:
        """Stable 64-bit identifier of this substream (for run records)."""
        return int(self.sequence().generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SparsityProfile:
    """Resolved sparsity inputs: dimension, q, optional edge probability p,
    and the normalized third/fourth cumulants of the off-diagonal entry law."""

    N: int
    q: float
    p: float | None = None
    s3: float = 0.0
    s4: float = 1.0

    def __post_init__(self):
        if self.N < 2:
            raise InvalidParameter("N must be at least 2")
        if not self.q > 0:
            raise InvalidParameter("q must be positive")
        if self.q > math.sqrt(self.N) * (1 + 1e-12):
            raise InvalidParameter("q must not exceed sqrt(N)")
        if self.p is not None:
            if not 0 < self.p < 1:
                raise InvalidParameter("p must lie in (0, 1)")
            if abs(self.q**2 - self.N * self.p) > 1e-12 * self.N * self.p:
                raise InvalidParameter("q and p are inconsistent: q^2 must equal N*p")

    @classmethod
    def from_p(cls, N: int, p: float) -> "SparsityProfile":
        if not 0 < p < 1:
            raise InvalidParameter("p must lie in (0, 1)")
        return cls(N=N, q=math.sqrt(N * p), p=p, s3=exact_s_k(p, 3), s4=exact_s_k(p, 4))

    @classmethod
    def from_q(cls, N: int, q: float, s3: float = 0.0, s4: float = 1.0) -> "SparsityProfile":
        return cls(N=N, q=q, p=None, s3=s3, s4=s4)


@dataclass(frozen=True)
class MatrixSample:
    """A symmetric matrix draw tagged with its ensemble provenance.

    The entry array is frozen (read-only) after construction so samples can
    be shared freely between threads and workers.
    """

    N: int
    entries: np.ndarray = field(repr=False)
    kind: str
    seed: int
    t: float = 0.0

    def __post_init__(self):
        if self.kind not in ENSEMBLE_KINDS:
            raise InvalidParameter(f"unknown ensemble kind {self.kind!r}")
        e = np.asarray(self.entries, dtype=float)
        if e.shape != (self.N, self.N):
            raise DimensionMismatch(f"entries must be {self.N}x{self.N}, got {e.shape}")
        if np.any(np.diagonal(e) != 0.0):
            raise InvalidParameter("diagonal entries must be exactly zero")
        if not np.array_equal(e, e.T):
            raise InvalidParameter("entries must be exactly symmetric")
        if self.t < 0:
            raise InvalidParameter("flow time must be nonnegative")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)


def _check_np(N: int, p: float) -> None:
    if N < 2:
        raise InvalidParameter("N must be at least 2")
    if not 0 < p < 1:
        raise InvalidParameter("p must lie in (0, 1)")


def _symmetric_from_upper(N: int, values: np.ndarray) -> np.ndarray:
    h = np.zeros((N, N))
    h[np.triu_indices(N, k=1)] = values
    h += h.T
    return h


def _upper_count(N: int) -> int:
    return N * (N - 1) // 2


def sample_adjacency(N: int, p: float, stream: RngStream) -> MatrixSample:
    """Rescaled adjacency matrix of an Erdos-Renyi graph G(N, p).

    Off-diagonal entries are 1/sqrt(Np(1-p)) with probability p and 0
    otherwise, independent up to symmetry; the diagonal is zero.
    """
    _check_np(N, p)
    rng = stream.generator()
    hit = rng.random(_upper_count(N)) < p
    values = hit / math.sqrt(N * p * (1 - p))
    return MatrixSample(N, _symmetric_from_upper(N, values), "adjacency", stream.derived_seed())


def sample_centered_er(N: int, p: float, stream: RngStream) -> MatrixSample:
    """Centered Erdos-Renyi matrix: the adjacency law with its mean removed.

    Entries take the value (1-p)/sqrt(Np(1-p)) with probability p and
    -p/sqrt(Np(1-p)) otherwise, so the entry law has mean 0 and variance 1/N
    exactly.
    """
    _check_np(N, p)
    rng = stream.generator()
    hit = rng.random(_upper_count(N)) < p
    scale = math.sqrt(N * p * (1 - p))
    values = np.where(hit, (1 - p) / scale, -p / scale)
    return MatrixSample(N, _symmetric_from_upper(N, values), "centered-er", stream.derived_seed())


def sample_diluted_wigner(N: int, p: float, stream: RngStream) -> MatrixSample:
    """Diluted Wigner matrix: Bernoulli dilution times a +-1 value variable.

    Each off-diagonal entry is +-1/sqrt(Np) with probability p/2 each and 0
    otherwise, giving entry variance 1/N and vanishing odd moments.
    """
    _check_np(N, p)
    rng = stream.generator()
    u = rng.random(_upper_count(N))
    mag = 1.0 / math.sqrt(N * p)
    values = np.where(u < p / 2, mag, np.where(u < p, -mag, 0.0))
    return MatrixSample(N, _symmetric_from_upper(N, values), "diluted-wigner", stream.derived_seed())


def sample_sparse_generic(
    N: int, q: float, s3: float, s4: float, stream: RngStream
) -> MatrixSample:
    """Three-point entry law matched to prescribed normalized cumulants.

    Entries take values u > 0, -v < 0 or 0 with probabilities chosen so that
    the entry law has mean 0, variance 1/N, third cumulant s3/(N q) and
    fourth cumulant s4/(N q^2) exactly.  For s3 = 0 this reduces to the
    symmetric +-a law.
    """
    if N < 2:
        raise InvalidParameter("N must be at least 2")
    if not 0 < q <= math.sqrt(N):
        raise InvalidParameter("q must lie in (0, sqrt(N)]")
    # Moment matching in closed form: with S = u + v and D = u - v the
    # constraints reduce to D = s3/q and S^2 = 4*(s4/q^2 + 3/N) - 3*D^2.
    diff = s3 / q
    s_sq = 4 * (s4 / q**2 + 3.0 / N) - 3 * diff**2
    if s_sq <= diff**2:
        raise InvalidParameter("no three-point law matches (q, s3, s4): s4 too small")
    total = math.sqrt(s_sq)
    u_val = (total + diff) / 2
    v_val = (total - diff) / 2
    x = 1.0 / (N * total)  # common mass scale, x = r1*u = r2*v
    r1 = x / u_val
    r2 = x / v_val
    if r1 + r2 >= 1:
        raise InvalidParameter("no three-point law matches (q, s3, s4): masses exceed 1")
    rng = stream.generator()
    w = rng.random(_upper_count(N))
    values = np.where(w < r1, u_val, np.where(w < r1 + r2, -v_val, 0.0))
    return MatrixSample(N, _symmetric_from_upper(N, values), "sparse-generic", stream.derived_seed())


def sample_goe_zero_diag(N: int, stream: RngStream) -> MatrixSample:
    """Gaussian orthogonal ensemble with the diagonal forced to zero.

    Off-diagonal entries (i < j) are independent centered Gaussians of
    variance 1/N.
    """
    if N < 2:
        raise InvalidParameter("N must be at least 2")
    rng = stream.generator()
    values = rng.standard_normal(_upper_count(N)) / math.sqrt(N)
    return MatrixSample(N, _symmetric_from_upper(N, values), "goe-zero-diag", stream.derived_seed())


def dyson_flow(H0: MatrixSample, W: MatrixSample, t: float) -> MatrixSample:
    """Interpolating matrix flow exp(-t/2)*H0 + sqrt(1-exp(-t))*W.

    W must be a zero-diagonal GOE draw of the same dimension.  The result is
    deterministic given the inputs; entry variance stays 1/N for every t.
    """
    if W.kind != "goe-zero-diag":
        raise InvalidParameter("flow target W must be a goe-zero-diag sample")
    if H0.N != W.N:
        raise DimensionMismatch(f"dimension mismatch: H0 is {H0.N}, W is {W.N}")
    if t < 0:
        raise InvalidParameter("flow time must be nonnegative")
    entries = math.exp(-t / 2) * H0.entries + math.sqrt(1 - math.exp(-t)) * W.entries
    return MatrixSample(H0.N, entries, "flow", H0.seed, t=t)


def exact_s_k(p: float, k: int) -> float:
    """Exact normalized cumulant s^(k) of the centered Erdos-Renyi entry law.

    With q^2 = Np, the k-th cumulant of the two-point entry law scaled by
    N q^(k-2) is a function of p alone:

        s^(3) = (1 - 2p) / sqrt(1 - p)
        s^(4) = (1 - 6p + 6p^2) / (1 - p)

    Both tend to 1 as p -> 0 and s^(4) changes sign at large p.
    """
    if not 0 < p < 1:
        raise InvalidParameter("p must lie in (0, 1)")
    if k == 3:
        return (1 - 2 * p) / math.sqrt(1 - p)
    if k == 4:
        return (1 - 6 * p + 6 * p * p) / (1 - p)
    raise UnsupportedCumulantOrder(f"only k in {{3, 4}} supported, got {k}")


def empirical_s_k(entry_draws, k: int, N: int, q: float) -> float:
    """Sample estimate of the normalized cumulant s^(k) from entry draws.

    Computes the k-th sample cumulant of the draws (around the sample mean)
    and scales it by N q^(k-2).
    """
    x = np.asarray(entry_draws, dtype=float)
    if x.size == 0:
        raise EmptyInput("entry_draws must be nonempty")
    if k not in (3, 4):
        raise UnsupportedCumulantOrder(f"only k in {{3, 4}} supported, got {k}")
    c = x - x.mean()
    if k == 3:
        kappa = np.mean(c**3)
    else:
        kappa = np.mean(c**4) - 3 * np.mean(c**2) ** 2
    return float(N * q ** (k - 2) * kappa)


def offdiagonal_entries(sample: MatrixSample) -> np.ndarray:
    """The strict upper-triangle entries of a sample as a flat array."""
    return sample.entries[np.triu_indices(sample.N, k=1)]
