"""Trajectory diagnostics: discrete energies, rate norms, difference
quotients, and the grid-refinement boundedness sweep.

The records mirror the quantities controlled by the scheme's a-priori
estimates.  Time derivatives are evaluated through the semi-discrete
right-hand side at the stored snapshot, which is exact for the
method-of-lines system and keeps time-integration error out of the records.
The sweep integrates the same scenario on nested grids and reports, for
each monitored quantity, the largest growth ratio between consecutive
levels; bounded quantities should keep that ratio near one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import (
    GridSpec,
    norm_macro,
    norm_macro_edge,
    norm_micro,
    norm_micro_edge,
)
from .integrator import TimeSpec, Trajectory, integrate
from .model import InitialData, ModelParams, State, project_initial, rhs
from .operators import grad_macro, grad_micro

MONITORED = (
    "energy_sup",            # sup_t of the four squared field norms
    "grad_integral",         # time integral of the three squared gradient norms
    "rate_sup",              # sup_t of the squared rate norms (fields 1..3)
    "rate_grad_integral",    # time integral of the squared rate-gradient norms
    "xdiff_sup",             # sup_t of the squared forward x-quotients (2, 3)
    "mixed_integral",        # time integral of the squared mixed quotients
)


@dataclass(frozen=True)
class EnergyRecord:
    t: float
    n1: float   # ||u1||^2 on the macro nodes
    n2: float   # ||u2||^2 on the cell nodes
    n3: float   # ||u3||^2
    n4: float   # ||u4||^2
    g1: float   # ||grad_x u1||^2
    g2: float   # ||grad_y u2||^2
    g3: float   # ||grad_y u3||^2

    def field_total(self) -> float:
        return self.n1 + self.n2 + self.n3 + self.n4

    def grad_total(self) -> float:
        return self.g1 + self.g2 + self.g3


@dataclass(frozen=True)
class DerivativeRecord:
    t: float
    d1n: float   # ||du1/dt||^2
    d2n: float   # ||du2/dt||^2
    d3n: float   # ||du3/dt||^2
    d4n: float   # ||du4/dt||^2 (reported, not part of the bounded set)
    dg1: float   # ||grad_x du1/dt||^2
    dg2: float   # ||grad_y du2/dt||^2
    dg3: float   # ||grad_y du3/dt||^2

    def rate_total(self) -> float:
        return self.d1n + self.d2n + self.d3n

    def rate_grad_total(self) -> float:
        return self.dg1 + self.dg2 + self.dg3


@dataclass(frozen=True)
class MixedQuotientRecord:
    t: float
    mx2: float    # h_x h_y sum (delta_x^+ u2)^2, all rows
    mx3: float
    mxy2: float   # h_x h_y sum (delta_x^+ delta_y^+ u2)^2
    mxy3: float

    def xdiff_total(self) -> float:
        return self.mx2 + self.mx3

    def mixed_total(self) -> float:
        return self.mxy2 + self.mxy3


def energy_record(grid: GridSpec, state: State) -> EnergyRecord:
    return EnergyRecord(
        t=state.t,
        n1=norm_macro(grid, state.u1) ** 2,
        n2=norm_micro(grid, state.u2) ** 2,
        n3=norm_micro(grid, state.u3) ** 2,
        n4=norm_macro(grid, state.u4) ** 2,
        g1=norm_macro_edge(grid, grad_macro(grid, state.u1)) ** 2,
        g2=norm_micro_edge(grid, grad_micro(grid, state.u2)) ** 2,
        g3=norm_micro_edge(grid, grad_micro(grid, state.u3)) ** 2,
    )


def derivative_record(grid: GridSpec, state: State,
                      params: ModelParams) -> DerivativeRecord:
    tend = rhs(state, params, grid)
    return DerivativeRecord(
        t=state.t,
        d1n=norm_macro(grid, tend.u1) ** 2,
        d2n=norm_micro(grid, tend.u2) ** 2,
        d3n=norm_micro(grid, tend.u3) ** 2,
        d4n=norm_macro(grid, tend.u4) ** 2,
        dg1=norm_macro_edge(grid, grad_macro(grid, tend.u1)) ** 2,
        dg2=norm_micro_edge(grid, grad_micro(grid, tend.u2)) ** 2,
        dg3=norm_micro_edge(grid, grad_micro(grid, tend.u3)) ** 2,
    )


def _forward_x_sq(grid: GridSpec, u: np.ndarray) -> float:
    quot = np.diff(u, axis=0) / grid.h_x
    return grid.h_x * grid.h_y * float(np.sum(quot**2))


def _mixed_sq(grid: GridSpec, u: np.ndarray) -> float:
    quot = np.diff(np.diff(u, axis=0), axis=1) / (grid.h_x * grid.h_y)
    return grid.h_x * grid.h_y * float(np.sum(quot**2))


def mixed_quotient_record(grid: GridSpec, state: State) -> MixedQuotientRecord:
    """Unweighted squared sums of forward and mixed difference quotients."""
    return MixedQuotientRecord(
        t=state.t,
        mx2=_forward_x_sq(grid, state.u2),
        mx3=_forward_x_sq(grid, state.u3),
        mxy2=_mixed_sq(grid, state.u2),
        mxy3=_mixed_sq(grid, state.u3),
    )


def trajectory_quantities(grid: GridSpec, traj: Trajectory,
                          params: ModelParams) -> dict[str, float]:
    """Aggregate the monitored quantities over the stored snapshots.

    Suprema are maxima over snapshots; time integrals use the trapezoid
    rule on the snapshot schedule.
    """
    times = traj.times()
    energies = [energy_record(grid, s) for s in traj.snapshots]
    rates = [derivative_record(grid, s, params) for s in traj.snapshots]
    mixed = [mixed_quotient_record(grid, s) for s in traj.snapshots]
    return {
        "energy_sup": max(e.field_total() for e in energies),
        "grad_integral": float(np.trapezoid([e.grad_total() for e in energies], times)),
        "rate_sup": max(r.rate_total() for r in rates),
        "rate_grad_integral": float(np.trapezoid([r.rate_grad_total() for r in rates], times)),
        "xdiff_sup": max(m.xdiff_total() for m in mixed),
        "mixed_integral": float(np.trapezoid([m.mixed_total() for m in mixed], times)),
    }


@dataclass
class SweepLevel:
    level: int
    n_x: int
    n_y: int
    quantities: dict[str, float]


@dataclass
class SweepResult:
    levels: list[SweepLevel]
    ratios: dict[str, float]      # worst consecutive-level growth per quantity
    threshold: float

    def passed(self) -> bool:
        return all(r <= self.threshold for r in self.ratios.values())


def refinement_sweep(grid: GridSpec, params: ModelParams, initial: InitialData,
                     timespec: TimeSpec, levels: int = 3,
                     ratio_threshold: float = 1.25) -> SweepResult:
    """Integrate the scenario on `levels` nested grids and compare the
    monitored quantities level to level.

    The ratio threshold is artifact policy (recorded in the result); the
    bounded quantities of a resolved scenario should not grow systematically
    under refinement.
    """
    if levels < 3:
        raise ValueError(f"refinement sweep needs at least 3 levels, got {levels}")
    rows: list[SweepLevel] = []
    for lvl in range(levels):
        g = grid.refine(2**lvl) if lvl else grid
        state0 = project_initial(initial, params, g)
        traj = integrate(state0, params, g, timespec)
        rows.append(SweepLevel(lvl, g.n_x, g.n_y,
                               trajectory_quantities(g, traj, params)))
    ratios: dict[str, float] = {}
    for name in MONITORED:
        worst = 0.0
        for a, b in zip(rows, rows[1:]):
            prev, cur = a.quantities[name], b.quantities[name]
            if prev <= 1e-30:
                worst = max(worst, 1.0 if cur <= 1e-30 else np.inf)
            else:
                worst = max(worst, cur / prev)
        ratios[name] = worst
    return SweepResult(rows, ratios, ratio_threshold)
