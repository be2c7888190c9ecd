"""Deterministic refined spectral law for sparse symmetric random matrices.

The law is defined through the quartic self-consistent equation

    1 + z*w + w^2 + c4*w^4 = 0,        c4 = exp(-2t) * s4 / q^2,

whose upper-half-plane solution w(z) is the Stieltjes transform of a
symmetric probability measure supported on [-L, L].  At c4 = 0 the law
degenerates to the semicircle law with edge 2.  The upper edge L and the
stationary value tau = w(L) come from the inverse map
Q(w) = -1/w - w - c4*w^3 via Q'(tau) = 0, L = Q(tau).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import (
    AmbiguousRoot,
    BracketFailure,
    InvalidParameter,
    NoUpperRoot,
    QuadratureError,
    RootSelectionWarning,
)

# Largest quartic coefficient for which the disk |w| <= 5 contains exactly
# one upper-half-plane root (Rouche bound 625*c4 < 1).
STRICT_C4_MAX = 1.0 / 625.0

# Below this the quartic term is numerically invisible; fall back to the
# semicircle branch to avoid an ill-conditioned companion matrix.
_C4_FLOOR = 1e-20

ROOT_RADIUS = 5.0


@dataclass(frozen=True)
class LawParams:
    """Inputs of the refined law: fourth cumulant s4, sparsity q, flow time t."""

    s4: float
    q: float
    t: float = 0.0

    def __post_init__(self):
        if not self.q > 0:
            raise InvalidParameter("q must be positive")
        if self.t < 0:
            raise InvalidParameter("t must be nonnegative")
        if self.s4 < 0:
            raise InvalidParameter(
                "negative fourth cumulant is unsupported: the quartic "
                "coefficient must satisfy c4 >= 0"
            )

    @property
    def qt(self) -> float:
        """Time-dependent sparsity parameter q * exp(t/2)."""
        return self.q * math.exp(self.t / 2)

    @property
    def c4(self) -> float:
        """Quartic coefficient exp(-2t) * s4 / q^2."""
        return math.exp(-2 * self.t) * self.s4 / self.q**2

    def at_time(self, t: float) -> "LawParams":
        """Same initial law, advanced to flow time t."""
        return LawParams(self.s4, self.q, t)


@dataclass(frozen=True)
class RefinedLaw:
    """Edge data of the refined law: upper support edge L and tau = w(L)."""

    params: LawParams
    L: float
    tau: float


def in_domain(z: complex) -> bool:
    """Whether z lies in the validity domain: |Re z| < 3, 0 < Im z <= 3."""
    return abs(z.real) < 3 and 0 < z.imag <= 3


def semicircle_stieltjes(z: complex) -> complex:
    """Stieltjes transform of the semicircle law, (-z + sqrt(z^2-4))/2.

    The square-root branch is chosen so the result lies in the upper
    half-plane; it satisfies 1 + z*m + m^2 = 0.
    """
    z = complex(z)
    if z.imag <= 0:
        raise InvalidParameter("semicircle transform requires Im z > 0")
    s = cmath.sqrt(z * z - 4.0)
    m = (-z + s) / 2
    if m.imag <= 0:
        m = (-z - s) / 2
    return m


def law_poly(params: LawParams, z: complex, m: complex) -> complex:
    """Evaluate the law's defining quartic 1 + z*m + m^2 + c4*m^4 at m."""
    return 1.0 + z * m + m * m + params.c4 * m**4


def _quartic_roots(c4: float, z: complex) -> np.ndarray:
    return np.roots([c4, 0.0, 1.0, z, 1.0])


def _polish(c4: float, z: complex, w: complex) -> complex:
    # One Newton step on the quartic; skipped near double roots.
    dp = z + 2 * w + 4 * c4 * w**3
    if abs(dp) < 1e-8:
        return w
    return w - (1.0 + z * w + w * w + c4 * w**4) / dp


def _admissible(roots) -> list[complex]:
    return [complex(w) for w in roots if w.imag > 0 and abs(w) <= ROOT_RADIUS]


def _continuation_root(c4: float, z: complex) -> complex:
    # Track the physical branch from eta = 3 (where it hugs the semicircle
    # transform) down to the target, always taking the nearest root.
    E, eta_target = z.real, z.imag
    eta = 3.0
    roots = _quartic_roots(c4, complex(E, eta))
    w = complex(roots[np.argmin(np.abs(roots - semicircle_stieltjes(complex(E, 3.0))))])
    while eta > eta_target:
        eta = max(eta * 0.9, eta_target)
        roots = _quartic_roots(c4, complex(E, eta))
        w = complex(roots[np.argmin(np.abs(roots - w))])
    return w


def stieltjes(params: LawParams, z: complex, mode: str = "strict") -> complex:
    """The refined law's Stieltjes transform: the root w of the quartic with
    Im w > 0 and |w| <= 5.

    In strict mode (which requires c4 <= 1/625) that root is provably unique.
    In permissive mode, larger c4 is allowed and the root is selected by
    continuation in the imaginary part from 3 downward, with a warning.
    """
    z = complex(z)
    if z.imag <= 0:
        raise InvalidParameter("spectral parameter must satisfy Im z > 0")
    if mode not in ("strict", "permissive"):
        raise InvalidParameter(f"unknown mode {mode!r}")
    c4 = params.c4
    if c4 <= _C4_FLOOR:
        return semicircle_stieltjes(z)
    if mode == "strict" and c4 > STRICT_C4_MAX:
        raise InvalidParameter(
            f"c4 = {c4:.3g} exceeds the strict uniqueness bound 1/625; "
            "use permissive mode"
        )
    candidates = _admissible(_quartic_roots(c4, z))
    if mode == "strict":
        if not candidates:
            raise NoUpperRoot(f"no admissible root at z = {z}")
        if len(candidates) > 1:
            raise AmbiguousRoot(f"{len(candidates)} admissible roots at z = {z}")
        return _polish(c4, z, candidates[0])
    if len(candidates) == 1:
        return _polish(c4, z, candidates[0])
    if not candidates:
        raise NoUpperRoot(f"no admissible root at z = {z}")
    warnings.warn(
        f"c4 = {c4:.3g} is outside the uniqueness regime; selecting the root "
        "by continuation from Im z = 3",
        RootSelectionWarning,
        stacklevel=2,
    )
    w = _continuation_root(c4, z)
    if not (w.imag > 0 and abs(w) <= ROOT_RADIUS):
        raise NoUpperRoot(f"continuation left the admissible region at z = {z}")
    return _polish(c4, z, w)


def _q_map(c4: float, w: float) -> float:
    return -1.0 / w - w - c4 * w**3


def _q_prime(c4: float, w: float) -> float:
    return 1.0 / w**2 - 1.0 - 3 * c4 * w**2


@lru_cache(maxsize=None)
def edge(params: LawParams) -> RefinedLaw:
    """Upper edge of the law's support.

    Finds tau, the unique zero of Q' on (-1, -1 + 2*s4/qt^2), by safeguarded
    Newton iteration to 1e-13, then sets L = Q(tau).  For c4 = 0 the edge is
    exactly (L, tau) = (2, -1).
    """
    c4 = params.c4
    if c4 <= _C4_FLOOR:
        return RefinedLaw(params, 2.0, -1.0)
    half_width = 2 * params.s4 / params.qt**2
    if params.s4 / params.qt**2 < 1e-14:
        half_width *= 2
    lo, hi = -1.0, -1.0 + half_width
    f_lo, f_hi = _q_prime(c4, lo), _q_prime(c4, hi)
    if not (f_lo < 0 < f_hi):
        raise BracketFailure(
            f"Q' does not change sign on ({lo}, {hi}); c4 = {c4:.3g} is "
            "outside the supported regime"
        )
    tau = 0.5 * (lo + hi)
    for _ in range(200):
        f = _q_prime(c4, tau)
        if f < 0:
            lo = tau
        else:
            hi = tau
        dfdw = -2.0 / tau**3 - 6 * c4 * tau
        step = f / dfdw
        nxt = tau - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)  # bisection fallback
        if abs(nxt - tau) <= 1e-13:
            tau = nxt
            break
        tau = nxt
    L = _q_map(c4, tau)
    if not 2.0 <= L < 3.0:
        raise InvalidParameter(f"edge L = {L} outside [2, 3); c4 = {c4:.3g} too large")
    return RefinedLaw(params, L, tau)


def density(params: LawParams, E: float, mode: str = "strict") -> float:
    """Density of the refined law at real energy E.

    Inside the support (|E| < L) this is Im w / pi where w is the
    upper-half-plane member of the complex-conjugate root pair of the
    real-coefficient quartic at z = E; outside it is exactly 0.
    """
    E = float(E)
    c4 = params.c4
    L = edge(params).L
    if abs(E) >= L:
        return 0.0
    if c4 <= _C4_FLOOR:
        return math.sqrt(4.0 - E * E) / (2 * math.pi)
    candidates = _admissible(_quartic_roots(c4, complex(E, 0.0)))
    if len(candidates) != 1:
        if mode == "strict":
            raise AmbiguousRoot(
                f"{len(candidates)} admissible roots at E = {E}; "
                "density needs a unique conjugate pair"
            )
        anchor = stieltjes(params, complex(E, 1e-6), mode="permissive")
        if not candidates:
            raise NoUpperRoot(f"no admissible root at E = {E}")
        candidates.sort(key=lambda w: abs(w - anchor))
    w = _polish(c4, complex(E, 0.0), candidates[0])
    return w.imag / math.pi


def integrated_density(params: LawParams, E1: float, E2: float, mode: str = "strict") -> float:
    """Mass of the refined law on (E1, E2] by adaptive quadrature.

    The integration range is split at the support endpoints +-L so the
    square-root edge behavior sits at interval endpoints, where the adaptive
    rule subdivides; absolute tolerance 1e-8.
    """
    if not E1 < E2:
        raise InvalidParameter("need E1 < E2")
    L = edge(params).L
    lo, hi = max(E1, -L), min(E2, L)
    if lo >= hi:
        return 0.0
    # interior breakpoint at 0 keeps panels smooth and symmetric
    cuts = sorted({lo, hi} | ({0.0} if lo < 0.0 < hi else set()))
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        res = integrate.quad(
            lambda x: density(params, x, mode=mode),
            a,
            b,
            epsabs=1e-9,
            epsrel=1e-10,
            limit=300,
            full_output=True,
        )
        if len(res) > 3:
            raise QuadratureError(f"quadrature failed on ({a}, {b}): {res[3]}")
        total += res[0]
    return total


def l_dot(params: LawParams) -> float:
    """Time derivative of the upper edge along the matrix flow.

    Exactly 2*exp(-2t)*s4*tau^3/q^2 by stationarity of Q at tau; negative
    whenever s4 > 0.
    """
    if params.c4 <= _C4_FLOOR:
        return 0.0
    tau = edge(params).tau
    return 2 * math.exp(-2 * params.t) * params.s4 * tau**3 / params.q**2


def stability_margin(params: LawParams, z: complex, mode: str = "strict") -> float:
    """|z + w(z)|, the denominator controlling the law's local stability."""
    return abs(complex(z) + stieltjes(params, z, mode=mode))
