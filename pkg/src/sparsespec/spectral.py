"""Spectral observables of a single matrix draw: eigendecomposition, the
empirical Stieltjes transform, Green-matrix identity checks, local-law scans,
eigenvalue counting, and the law-polynomial statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import law as law_mod
from ._fileio import atomic_write_text
from .ensembles import MatrixSample
from .errors import (
    DimensionMismatch,
    InvalidParameter,
    MissingVectors,
    SizeLimitExceeded,
    SolverFailure,
)

GREEN_MATRIX_MAX_N = 500


@dataclass(frozen=True)
class SpectralSample:
    """Eigenvalues (sorted descending) and optional orthonormal eigenvectors."""

    N: int
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if ev.shape != (self.N,):
            raise DimensionMismatch("eigenvalues must be a length-N vector")
        if np.any(np.diff(ev) > 0):
            raise InvalidParameter("eigenvalues must be sorted descending")
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        if self.eigenvectors is not None:
            u = np.asarray(self.eigenvectors, dtype=float)
            if u.shape != (self.N, self.N):
                raise DimensionMismatch("eigenvectors must be an NxN column matrix")
            u.setflags(write=False)
            object.__setattr__(self, "eigenvectors", u)


def eigen(H: MatrixSample, want_vectors: bool = False) -> SpectralSample:
    """Full symmetric eigendecomposition, eigenvalues sorted descending.

    Eigenvectors, when requested, are returned as columns matching the
    eigenvalue order.
    """
    try:
        if want_vectors:
            vals, vecs = np.linalg.eigh(H.entries)
            return SpectralSample(H.N, vals[::-1].copy(), vecs[:, ::-1].copy())
        vals = np.linalg.eigvalsh(H.entries)
    except np.linalg.LinAlgError as exc:
        raise SolverFailure(f"symmetric eigensolver failed: {exc}") from exc
    return SpectralSample(H.N, vals[::-1].copy())


def empirical_stieltjes(spec: SpectralSample, z: complex) -> complex:
    """Stieltjes transform of the empirical spectral measure,
    (1/N) * sum_i 1/(lambda_i - z)."""
    z = complex(z)
    return complex(np.mean(1.0 / (spec.eigenvalues - z)))


@dataclass(frozen=True)
class GreenMatrix:
    """Resolvent G = (H - z)^(-1) with its normalized trace."""

    z: complex
    entries: np.ndarray = field(repr=False)
    m: complex


def green_matrix(H: MatrixSample, z: complex) -> GreenMatrix:
    """Dense resolvent (H - z)^(-1) via the eigendecomposition.

    Capped at N = 500: identity checks do not need large N and dense complex
    inversion is cubic.
    """
    if H.N > GREEN_MATRIX_MAX_N:
        raise SizeLimitExceeded(f"green_matrix supports N <= {GREEN_MATRIX_MAX_N}, got {H.N}")
    z = complex(z)
    if z.imag <= 0:
        raise InvalidParameter("green_matrix requires Im z > 0")
    try:
        vals, vecs = np.linalg.eigh(H.entries)
    except np.linalg.LinAlgError as exc:
        raise SolverFailure(f"symmetric eigensolver failed: {exc}") from exc
    G = (vecs / (vals - z)) @ vecs.T
    return GreenMatrix(z, G, complex(np.trace(G)) / H.N)


def ward_residual(G: GreenMatrix) -> float:
    """Worst-column violation of the resolvent column-sum identity
    (1/N) * sum_i |G_ik|^2 = Im G_kk / (N * eta)."""
    eta = G.z.imag
    n = G.entries.shape[0]
    lhs = np.sum(np.abs(G.entries) ** 2, axis=0) / n
    rhs = np.imag(np.diagonal(G.entries)) / (n * eta)
    return float(np.max(np.abs(lhs - rhs)))


def resolvent_identity_residual(H: MatrixSample, G: GreenMatrix) -> float:
    """Worst-row violation of the defining relation 1 + z*G_ii = (H G)_ii."""
    if H.N != G.entries.shape[0]:
        raise DimensionMismatch("H and G have different dimensions")
    diag_hg = np.einsum("ik,ki->i", H.entries, G.entries)
    res = 1.0 + G.z * np.diagonal(G.entries) - diag_hg
    return float(np.max(np.abs(res)))


@dataclass(frozen=True)
class LocalLawRow:
    E: float
    eta: float
    m: complex
    mtilde: complex
    lambda_err: float
    bound: float
    ratio: float


@dataclass(frozen=True)
class LocalLawReport:
    """Per-grid-point comparison of the empirical transform against the law."""

    rows: tuple[LocalLawRow, ...]

    CSV_HEADER = "E,eta,re_m,im_m,re_mtilde,im_mtilde,lambda_err,bound,ratio"

    def ratios(self) -> np.ndarray:
        return np.array([r.ratio for r in self.rows])

    def to_csv(self, path) -> None:
        lines = [self.CSV_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.E!r},{r.eta!r},{r.m.real!r},{r.m.imag!r},"
                f"{r.mtilde.real!r},{r.mtilde.imag!r},"
                f"{r.lambda_err!r},{r.bound!r},{r.ratio!r}"
            )
        atomic_write_text(path, "\n".join(lines) + "\n")


def default_grid(N: int, n_energy: int = 50, n_eta: int = 20) -> list[tuple[float, float]]:
    """Scan grid: uniform energies over (-3, 3), geometric eta from 1/N to 3."""
    energies = np.linspace(-3 + 1e-3, 3 - 1e-3, n_energy)
    etas = np.geomspace(1.0 / N, 3.0, n_eta)
    return [(float(E), float(eta)) for E in energies for eta in etas]


def local_law_scan(
    spec: SpectralSample,
    params: law_mod.LawParams,
    grid,
    mode: str = "strict",
) -> LocalLawReport:
    """Compare the empirical transform with the law on a grid of (E, eta).

    Each row records Lambda = |m - mtilde| together with the theoretical
    bound qt^(-2) + (N*eta)^(-1) and their ratio.
    """
    qt = params.qt
    rows = []
    for E, eta in grid:
        z = complex(E, eta)
        m = empirical_stieltjes(spec, z)
        mtilde = law_mod.stieltjes(params, z, mode=mode)
        lam = abs(m - mtilde)
        bound = qt**-2 + 1.0 / (spec.N * eta)
        rows.append(LocalLawRow(E, eta, m, mtilde, lam, bound, lam / bound))
    return LocalLawReport(tuple(rows))


def eigenvalue_counting(spec: SpectralSample, E1: float, E2: float) -> float:
    """Normalized eigenvalue count on (E1, E2]."""
    if not E1 < E2:
        raise InvalidParameter("need E1 < E2")
    ev = spec.eigenvalues
    return float(np.count_nonzero((ev > E1) & (ev <= E2))) / spec.N


def smoothed_count(spec: SpectralSample, E: float, eta: float) -> float:
    """Eigenvalue count smoothed by the scale-eta Cauchy kernel
    theta_eta(y) = eta / (pi * (y^2 + eta^2)).

    Equals Im m(E + i*eta) / pi by construction.
    """
    if not eta > 0:
        raise InvalidParameter("eta must be positive")
    y = spec.eigenvalues - E
    return float(np.mean(eta / (math.pi * (y * y + eta * eta))))


def law_residual_stat(params: law_mod.LawParams, z: complex, m: complex) -> complex:
    """Value of the law's defining quartic at an (empirical) transform m."""
    return law_mod.law_poly(params, z, m)


def delocalization_stat(spec: SpectralSample) -> float:
    """Largest eigenvector entry in absolute value, max over vectors and sites."""
    if spec.eigenvectors is None:
        raise MissingVectors("sample holds no eigenvectors")
    return float(np.max(np.abs(spec.eigenvectors)))
