"""Monte Carlo harness for extremal-eigenvalue statistics: rescaled edge
samples, two-sample Kolmogorov-Smirnov comparison, the empirical GOE
reference distribution, adjacency outlier checks, and the community-detection
test statistic for ingested graphs.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import law as law_mod
from ._fileio import atomic_write_text
from .ensembles import (
    MatrixSample,
    RngStream,
    exact_s_k,
    sample_adjacency,
    sample_centered_er,
    sample_diluted_wigner,
    sample_goe_zero_diag,
    sample_sparse_generic,
)
from .errors import (
    DegenerateEdgeDensity,
    EmptyGraph,
    EmptyInput,
    InvalidParameter,
    ParseError,
    RegimeWarning,
    SampleFailure,
)

CENTERINGS = ("shifted-L", "unshifted-2", "adjacency-L-plus-a")
REFERENCE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class McConfig:
    """Configuration of one Monte Carlo run over independent matrix draws."""

    kind: str
    N: int
    samples: int
    master_seed: int
    p: float | None = None
    q: float | None = None
    s3: float = 0.0
    s4: float = 1.0
    workers: int = 1
    eigen_index: int = 1
    centering: str = "shifted-L"

    def __post_init__(self):
        if self.samples < 1:
            raise InvalidParameter("samples must be at least 1")
        if not 1 <= self.eigen_index <= self.N:
            raise InvalidParameter("eigen_index must lie in [1, N]")
        if self.centering not in CENTERINGS:
            raise InvalidParameter(f"unknown centering {self.centering!r}")
        if self.workers < 1:
            raise InvalidParameter("workers must be at least 1")
        if self.kind in ("adjacency", "centered-er", "diluted-wigner"):
            if self.p is None and self.q is None:
                raise InvalidParameter(f"kind {self.kind!r} needs p or q")
        if self.kind == "sparse-generic" and self.q is None:
            raise InvalidParameter("sparse-generic needs q")
        if self.p is not None and self.q is not None:
            if abs(self.q**2 - self.N * self.p) > 1e-12 * self.N * self.p:
                raise InvalidParameter("p and q are inconsistent: q^2 must equal N*p")

    def resolved_p(self) -> float:
        if self.p is not None:
            return self.p
        if self.q is not None:
            return self.q**2 / self.N
        raise InvalidParameter("no sparsity input given")

    def resolved_q(self) -> float:
        if self.q is not None:
            return self.q
        if self.p is not None:
            return math.sqrt(self.N * self.p)
        raise InvalidParameter("no sparsity input given")


def _draw_matrix(config: McConfig, stream: RngStream) -> MatrixSample:
    kind = config.kind
    if kind == "adjacency":
        return sample_adjacency(config.N, config.resolved_p(), stream)
    if kind == "centered-er":
        return sample_centered_er(config.N, config.resolved_p(), stream)
    if kind == "diluted-wigner":
        return sample_diluted_wigner(config.N, config.resolved_p(), stream)
    if kind == "sparse-generic":
        return sample_sparse_generic(config.N, config.resolved_q(), config.s3, config.s4, stream)
    if kind == "goe-zero-diag":
        return sample_goe_zero_diag(config.N, stream)
    raise InvalidParameter(f"kind {kind!r} is not a Monte Carlo ensemble")


def _mc_one(args) -> tuple[int, int, float]:
    config, j = args
    stream = RngStream(config.master_seed, j)
    try:
        H = _draw_matrix(config, stream)
        vals = np.linalg.eigvalsh(H.entries)
    except Exception as exc:
        raise SampleFailure(j, str(exc)) from exc
    lam = float(vals[-config.eigen_index])
    return j, stream.derived_seed(), lam


def _run_samples(config: McConfig) -> tuple[np.ndarray, np.ndarray]:
    """Raw extremal eigenvalues for every sample index, order-independent."""
    jobs = [(config, j) for j in range(config.samples)]
    raw = np.empty(config.samples)
    seeds = np.empty(config.samples, dtype=np.uint64)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = pool.map(_mc_one, jobs, chunksize=max(1, config.samples // (4 * config.workers)))
            for j, seed, lam in results:
                raw[j] = lam
                seeds[j] = seed
    else:
        for job in jobs:
            j, seed, lam = _mc_one(job)
            raw[j] = lam
            seeds[j] = seed
    return raw, seeds


@dataclass(frozen=True)
class EdgeSampleSet:
    """Rescaled extremal-eigenvalue statistics N^(2/3) * (lambda_k - center)."""

    values: np.ndarray = field(repr=False)
    config: McConfig
    center_used: float
    raw: np.ndarray = field(repr=False)
    seeds: np.ndarray = field(repr=False)

    def to_csv(self, path) -> None:
        lines = ["sample_index,seed,lambda_raw,rescaled"]
        for j in range(len(self.values)):
            lines.append(f"{j},{int(self.seeds[j])},{self.raw[j]!r},{self.values[j]!r}")
        atomic_write_text(path, "\n".join(lines) + "\n")


def resolve_center(config: McConfig, params: law_mod.LawParams) -> float:
    if config.centering == "unshifted-2":
        return 2.0
    L = law_mod.edge(params).L
    if config.centering == "shifted-L":
        return L
    _, a = adjacency_shift(config.N, params.q)
    return L + a


def mc_extreme(config: McConfig, params: law_mod.LawParams) -> EdgeSampleSet:
    """Monte Carlo sample of the rescaled k-th largest eigenvalue.

    Each sample j draws a fresh matrix on substream (master_seed, j), so the
    result is a pure function of the configuration and worker count never
    changes values.
    """
    center = resolve_center(config, params)
    raw, seeds = _run_samples(config)
    values = config.N ** (2 / 3) * (raw - center)
    return EdgeSampleSet(values, config, center, raw, seeds)


@dataclass(frozen=True)
class KsResult:
    statistic: float
    n1: int
    n2: int
    p_value: float


def _ks_p_value(d: float, n1: int, n2: int) -> float:
    # Asymptotic two-sided Kolmogorov-Smirnov tail with the standard
    # small-sample correction of the effective size.
    en = math.sqrt(n1 * n2 / (n1 + n2))
    lam = (en + 0.12 + 0.11 / en) * d
    if lam <= 0:
        return 1.0
    total = 0.0
    for k in range(1, 101):
        term = 2 * (-1) ** (k - 1) * math.exp(-2 * k * k * lam * lam)
        total += term
        if abs(term) < 1e-12:
            break
    return float(min(max(total, 0.0), 1.0))


def two_sample_ks(a, b) -> KsResult:
    """Exact sup-distance between two empirical CDFs, with asymptotic p-value."""
    x = np.sort(np.asarray(getattr(a, "values", a), dtype=float))
    y = np.sort(np.asarray(getattr(b, "values", b), dtype=float))
    if x.size == 0 or y.size == 0:
        raise EmptyInput("both sample sets must be nonempty")
    grid = np.concatenate([x, y])
    cdf_x = np.searchsorted(x, grid, side="right") / x.size
    cdf_y = np.searchsorted(y, grid, side="right") / y.size
    d = float(np.max(np.abs(cdf_x - cdf_y)))
    return KsResult(d, x.size, y.size, _ks_p_value(d, x.size, y.size))


@dataclass(frozen=True)
class ReferenceCdf:
    """Sorted rescaled GOE edge samples standing in for the limiting edge law."""

    values: np.ndarray = field(repr=False)
    N_ref: int
    M_ref: int
    seed: int
    version: int = REFERENCE_FORMAT_VERSION

    def cdf(self, x: float) -> float:
        return float(np.searchsorted(self.values, x, side="right")) / len(self.values)

    def quantile(self, p: float) -> float:
        if not 0 < p <= 1:
            raise InvalidParameter("quantile level must lie in (0, 1]")
        idx = max(0, math.ceil(p * len(self.values)) - 1)
        return float(self.values[idx])

    def save(self, path) -> None:
        header = (
            f"# reference_cdf version={self.version} N_ref={self.N_ref} "
            f"M_ref={self.M_ref} seed={self.seed}"
        )
        lines = [header] + [repr(float(v)) for v in self.values]
        atomic_write_text(path, "\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "ReferenceCdf":
        text = Path(path).read_text().strip().splitlines()
        if not text or not text[0].startswith("# reference_cdf"):
            raise ParseError(f"{path} is not a reference CDF file", line_number=1)
        meta = dict(kv.split("=") for kv in text[0].split()[2:])
        values = np.array([float(v) for v in text[1:]])
        if np.any(np.diff(values) < 0):
            raise ParseError(f"{path} values are not sorted", line_number=2)
        return cls(
            values,
            N_ref=int(meta["N_ref"]),
            M_ref=int(meta["M_ref"]),
            seed=int(meta["seed"]),
            version=int(meta["version"]),
        )


def build_reference_cdf(
    N_ref: int, M_ref: int, seed: int, path=None, workers: int = 1
) -> ReferenceCdf:
    """Empirical distribution of N^(2/3) * (lambda_1 - 2) for zero-diagonal GOE.

    Persisted (when a path is given) as the drop-in stand-in for the limiting
    edge distribution; rebuilding with the same seed reproduces the file.
    """
    if N_ref < 1000 or M_ref < 1000:
        raise InvalidParameter("reference requires N_ref >= 1000 and M_ref >= 1000")
    config = McConfig(
        kind="goe-zero-diag",
        N=N_ref,
        samples=M_ref,
        master_seed=seed,
        workers=workers,
        centering="unshifted-2",
    )
    raw, _ = _run_samples(config)
    values = np.sort(N_ref ** (2 / 3) * (raw - 2.0))
    ref = ReferenceCdf(values, N_ref, M_ref, seed)
    if path is not None:
        ref.save(path)
    return ref


def adjacency_shift(N: int, q: float) -> tuple[float, float]:
    """Rank-one shift constants of the non-centered adjacency matrix:
    f = q * (1 - q^2/N)^(-1/2) and a = f/N."""
    if q**2 >= N:
        raise InvalidParameter("adjacency shift requires q^2 < N")
    if q <= 0:
        raise InvalidParameter("q must be positive")
    f = q / math.sqrt(1 - q**2 / N)
    return f, f / N


@dataclass(frozen=True)
class OutlierSummary:
    mean: float
    stderr: float
    predicted: float
    values: np.ndarray = field(repr=False)


def adjacency_outlier_check(config: McConfig) -> OutlierSummary:
    """Monte Carlo mean of the adjacency outlier eigenvalue against the
    rank-one prediction f - a + 1/f."""
    if config.kind != "adjacency":
        raise InvalidParameter("outlier check requires kind='adjacency'")
    raw, _ = _run_samples(config)
    f, a = adjacency_shift(config.N, config.resolved_q())
    stderr = float(np.std(raw, ddof=1) / math.sqrt(len(raw))) if len(raw) > 1 else 0.0
    return OutlierSummary(float(np.mean(raw)), stderr, f - a + 1.0 / f, raw)


def rescaled_adjacency_from_raw(raw01: np.ndarray, seed: int = 0) -> MatrixSample:
    """Rescale a raw 0/1 adjacency matrix by its estimated edge density."""
    raw01 = np.asarray(raw01, dtype=float)
    n = raw01.shape[0]
    if n < 2:
        raise EmptyGraph("graph needs at least two vertices")
    n_edges = np.count_nonzero(np.triu(raw01, k=1))
    if n_edges == 0:
        raise EmptyGraph("graph has no edges")
    p_hat = 2 * n_edges / (n * (n - 1))
    if p_hat >= 1:
        raise DegenerateEdgeDensity("estimated edge density is 1: rescaling undefined")
    entries = raw01 / math.sqrt(n * p_hat * (1 - p_hat))
    return MatrixSample(n, entries, "adjacency", seed)


def edge_density(A: MatrixSample) -> float:
    """Estimated edge probability: fraction of nonzero off-diagonal entries."""
    n = A.N
    n_edges = np.count_nonzero(np.triu(A.entries, k=1))
    return 2 * n_edges / (n * (n - 1))


def ingest_graph(path) -> MatrixSample:
    """Read a whitespace-separated undirected edge list (0-based vertex ids).

    Self-loops and duplicate edges are dropped; the 0/1 adjacency matrix is
    rescaled by the estimated edge density.
    """
    edges = set()
    max_id = -1
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise ParseError(
                    f"line {lineno}: expected two vertex ids, got {line!r}", lineno
                )
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(
                    f"line {lineno}: vertex ids must be integers, got {line!r}", lineno
                ) from None
            if u < 0 or v < 0:
                raise ParseError(f"line {lineno}: vertex ids must be nonnegative", lineno)
            if u == v:
                continue
            edges.add((min(u, v), max(u, v)))
            max_id = max(max_id, u, v)
    if not edges:
        raise EmptyGraph(f"{path} contains no usable edges")
    n = max_id + 1
    raw = np.zeros((n, n))
    rows, cols = zip(*edges)
    raw[rows, cols] = 1.0
    raw[cols, rows] = 1.0
    return rescaled_adjacency_from_raw(raw)


def law_from_adjacency(A: MatrixSample) -> law_mod.LawParams:
    """Law parameters implied by an ingested graph: q from the estimated edge
    density and s4 from the exact centered Erdos-Renyi cumulant."""
    p_hat = edge_density(A)
    if not 0 < p_hat < 1:
        raise DegenerateEdgeDensity(f"estimated edge density {p_hat} unusable")
    q_hat = math.sqrt(A.N * p_hat)
    return law_mod.LawParams(s4=exact_s_k(p_hat, 4), q=q_hat, t=0.0)


@dataclass(frozen=True)
class CommunityResult:
    statistic: float
    p_value: float


def community_statistic(
    A: MatrixSample, params: law_mod.LawParams, ref: ReferenceCdf
) -> CommunityResult:
    """Edge-universality test statistic for community structure.

    T = N^(2/3) * (lambda_2 - L - a); the p-value is the right-tail mass of
    the reference edge distribution above T.  A large T indicates a second
    eigenvalue separated from the bulk edge, i.e. block structure.
    """
    n = A.N
    if params.q <= n ** (1 / 6):
        warnings.warn(
            f"q = {params.q:.3g} <= N^(1/6): outside the regime backing the "
            "edge-universality test",
            RegimeWarning,
            stacklevel=2,
        )
    vals = np.linalg.eigvalsh(A.entries)
    lam2 = float(vals[-2])
    L = law_mod.edge(params).L
    _, a = adjacency_shift(n, params.q)
    T = n ** (2 / 3) * (lam2 - L - a)
    return CommunityResult(T, 1.0 - ref.cdf(T))
