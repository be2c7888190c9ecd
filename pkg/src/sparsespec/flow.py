"""Trajectories along the interpolating matrix flow: the time-dependent
sparsity parameter, the moving spectral edge and its exact rate, and
local-law consistency of flowed matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import law as law_mod
from . import spectral
from ._fileio import atomic_write_text
from .ensembles import MatrixSample, dyson_flow
from .errors import InvalidParameter


@dataclass(frozen=True)
class FlowRow:
    t: float
    qt: float
    Lt: float
    Ldot: float


@dataclass(frozen=True)
class FlowTrajectory:
    """Edge data of the law along the flow, one row per time point."""

    rows: tuple[FlowRow, ...] = field(repr=False)

    CSV_HEADER = "t,qt,Lt,Ldot"

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def to_csv(self, path) -> None:
        lines = [self.CSV_HEADER]
        for r in self.rows:
            lines.append(f"{r.t!r},{r.qt!r},{r.Lt!r},{r.Ldot!r}")
        atomic_write_text(path, "\n".join(lines) + "\n")


def default_t_grid(N: int, points: int = 25) -> list[float]:
    """Times 0 plus a geometric ladder on [1e-3, 6*log(N)]."""
    return [0.0] + [float(t) for t in np.geomspace(1e-3, 6 * math.log(N), points)]


def trajectory(law0: law_mod.LawParams, t_grid) -> FlowTrajectory:
    """Evaluate qt, the upper edge and its time derivative along the flow."""
    t_grid = [float(t) for t in t_grid]
    if not t_grid or t_grid[0] != 0.0:
        raise InvalidParameter("t_grid must start at 0")
    if any(b <= a for a, b in zip(t_grid[:-1], t_grid[1:])):
        raise InvalidParameter("t_grid must be strictly ascending")
    rows = []
    for t in t_grid:
        params_t = law0.at_time(t)
        ed = law_mod.edge(params_t)
        rows.append(FlowRow(t, params_t.qt, ed.L, law_mod.l_dot(params_t)))
    return FlowTrajectory(tuple(rows))


def flow_local_law_check(
    H0: MatrixSample,
    W: MatrixSample,
    t_grid,
    law0: law_mod.LawParams,
    grid,
    mode: str = "strict",
) -> list[spectral.LocalLawReport]:
    """Local-law scan of the flowed matrix against the time-t law, per time.

    A single W is shared across the whole trajectory, matching the coupling
    used by the flow; rows for t = 0 coincide with a plain scan of H0.
    """
    reports = []
    for t in t_grid:
        Ht = dyson_flow(H0, W, float(t))
        spec = spectral.eigen(Ht)
        reports.append(spectral.local_law_scan(spec, law0.at_time(float(t)), grid, mode=mode))
    return reports
