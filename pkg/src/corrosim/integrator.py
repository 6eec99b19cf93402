"""Method-of-lines time stepping for the semi-discrete system.

Two explicit modes: classical fourth-order Runge-Kutta with a fixed step
bounded by the diffusion stability limit, and an embedded 4(5) pair with
proportional-integral step control.  Both modes shorten steps to land
exactly on the requested snapshot times, so stored snapshots are states of
the integrated trajectory, not interpolants; `Trajectory.sample` offers
linear interpolation for times in between.

The pinned gas node at x = 0 carries zero tendency, and the integrator
re-asserts the pin after every accepted step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import GridSpec
from .model import ModelParams, SourceTerms, State, rhs

SAFETY = 0.4          # margin applied to the explicit diffusion limit
_RK_SAFETY = 0.9      # step controller safety factor
_FACMIN, _FACMAX = 0.2, 5.0
_ERR_ORDER = 5.0      # local error order of the embedded pair


class DivergedError(RuntimeError):
    """The trajectory left the finite range or the step size underflowed."""

    def __init__(self, message: str, last_state: State | None = None):
        super().__init__(message)
        self.last_state = last_state


@dataclass(frozen=True)
class TimeSpec:
    """Integration horizon, stepping mode and snapshot schedule."""

    t_end: float
    mode: str = "fixed"                 # "fixed" | "adaptive"
    dt: float | None = None             # fixed mode; None picks the stability limit
    rtol: float = 1e-6
    atol: float = 1e-9
    snapshot_times: tuple[float, ...] | None = None

    def __post_init__(self):
        if not (np.isfinite(self.t_end) and self.t_end > 0.0):
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.mode not in ("fixed", "adaptive"):
            raise ValueError(f"mode must be 'fixed' or 'adaptive', got {self.mode!r}")
        if self.dt is not None and not (np.isfinite(self.dt) and self.dt > 0.0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.mode == "adaptive" and not (self.rtol > 0.0 and self.atol > 0.0):
            raise ValueError("adaptive mode needs rtol > 0 and atol > 0")
        if self.snapshot_times is not None:
            times = tuple(float(t) for t in self.snapshot_times)
            if any(t < 0.0 or t > self.t_end for t in times):
                raise ValueError("snapshot times must lie within [0, t_end]")
            if list(times) != sorted(times):
                raise ValueError("snapshot times must be sorted")
            object.__setattr__(self, "snapshot_times", times)

    def snapshots(self) -> tuple[float, ...]:
        if self.snapshot_times is None:
            return (0.0, self.t_end)
        return self.snapshot_times


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0
    rhs_evals: int = 0
    last_dt: float = 0.0


@dataclass
class Trajectory:
    snapshots: list[State] = field(default_factory=list)
    stats: StepStats = field(default_factory=StepStats)

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    def sample(self, t: float) -> State:
        """Linear interpolation between the two bracketing snapshots."""
        times = self.times()
        if not (times[0] <= t <= times[-1]):
            raise ValueError(f"t={t} outside stored range [{times[0]}, {times[-1]}]")
        j = int(np.searchsorted(times, t, side="right"))
        if j == len(times):
            return self.snapshots[-1].copy()
        if times[j - 1] == t or j == 0:
            return self.snapshots[max(j - 1, 0)].copy()
        a, b = self.snapshots[j - 1], self.snapshots[j]
        lam = (t - a.t) / (b.t - a.t)
        mix = lambda p, q: (1.0 - lam) * p + lam * q
        return State(t, mix(a.u1, b.u1), mix(a.u2, b.u2),
                     mix(a.u3, b.u3), mix(a.u4, b.u4))


def stability_dt(params: ModelParams, grid: GridSpec) -> float:
    """Safe explicit step for the diffusion stencils.

    SAFETY * min(h_x^2 / (2 d1), h_y^2 / (2 max(d2, d3))).
    """
    macro = grid.h_x**2 / (2.0 * params.d1)
    micro = grid.h_y**2 / (2.0 * max(params.d2, params.d3))
    return SAFETY * min(macro, micro)


def _pack(state: State) -> np.ndarray:
    return np.concatenate([state.u1, state.u2.ravel(),
                           state.u3.ravel(), state.u4])


def _unpack(t: float, y: np.ndarray, grid: GridSpec) -> State:
    nm = grid.n_x + 1
    nf = nm * (grid.n_y + 1)
    u1 = y[:nm]
    u2 = y[nm:nm + nf].reshape(nm, grid.n_y + 1)
    u3 = y[nm + nf:nm + 2 * nf].reshape(nm, grid.n_y + 1)
    u4 = y[nm + 2 * nf:]
    return State(t, u1, u2, u3, u4)


def _error_norm(err: np.ndarray, y0: np.ndarray, y1: np.ndarray,
                atol: float, rtol: float) -> float:
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


# embedded Fehlberg 4(5) tableau; q (order 5) is propagated, q - w estimates
# the local error of the order-4 solution w
_FE_C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)
_FE_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_FE_B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)
_FE_B4 = (25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0)


def integrate(state0: State, params: ModelParams, grid: GridSpec,
              timespec: TimeSpec, sources: SourceTerms | None = None,
              include_diffusion: bool = True) -> Trajectory:
    """Advance the state to t_end, storing snapshots at the requested times.

    In fixed mode a supplied dt must respect the stability limit.  Raises
    DivergedError (carrying the last good state) on non-finite values or on
    step-size underflow.
    """
    state0.validate(grid)
    stats = StepStats()

    def f(t: float, y: np.ndarray) -> np.ndarray:
        stats.rhs_evals += 1
        tend = rhs(_unpack(t, y, grid), params, grid, sources=sources,
                   include_diffusion=include_diffusion)
        return np.concatenate([tend.u1, tend.u2.ravel(),
                               tend.u3.ravel(), tend.u4])

    t = float(state0.t)
    y = _pack(state0)
    t_end = float(timespec.t_end)
    targets = [s for s in timespec.snapshots() if s >= t]

    traj = Trajectory(stats=stats)

    def record_due(current_t: float, current_y: np.ndarray):
        while targets and targets[0] <= current_t + 1e-12 * max(1.0, abs(current_t)):
            s = _unpack(targets.pop(0), current_y.copy(), grid)
            traj.snapshots.append(s)

    record_due(t, y)

    limit = stability_dt(params, grid)
    if timespec.mode == "fixed":
        h_base = limit if timespec.dt is None else float(timespec.dt)
        if h_base > limit * (1.0 + 1e-9):
            raise ValueError(
                f"fixed dt={h_base:g} exceeds the stability limit {limit:g}")
    else:
        h_base = limit  # conservative start, the controller grows it

    err_prev = 1.0
    facmax = _FACMAX
    while t < t_end * (1.0 - 1e-14) and (t_end - t) > 1e-15 * max(1.0, t_end):
        h = min(h_base, t_end - t)
        if targets:
            h = min(h, targets[0] - t)
        if h < 1e-14 * max(1.0, abs(t)):
            raise DivergedError("step size underflow",
                                last_state=_unpack(t, y.copy(), grid))

        if timespec.mode == "fixed":
            k1 = f(t, y)
            k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
            k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
            k4 = f(t + h, y + h * k3)
            y_new = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(y_new)):
                raise DivergedError(f"non-finite state at t={t + h:g}",
                                    last_state=_unpack(t, y.copy(), grid))
            t += h
            y = y_new
            y[0] = 0.0
            stats.accepted += 1
            stats.last_dt = h
            record_due(t, y)
            continue

        # adaptive embedded pair
        ks = [f(t, y)]
        for i in range(1, 6):
            yi = y + h * sum(a * k for a, k in zip(_FE_A[i], ks))
            ks.append(f(t + _FE_C[i] * h, yi))
        y5 = y + h * sum(b * k for b, k in zip(_FE_B5, ks))
        y4 = y + h * sum(b * k for b, k in zip(_FE_B4, ks))
        finite = np.all(np.isfinite(y5)) and np.all(np.isfinite(y4))
        err = _error_norm(y5 - y4, y, y5, timespec.atol, timespec.rtol) \
            if finite else np.inf

        if finite and err <= 1.0:
            t += h
            y = y5
            y[0] = 0.0
            stats.accepted += 1
            stats.last_dt = h
            record_due(t, y)
            e = max(err, 1e-10)
            fac = _RK_SAFETY * e ** (-0.7 / _ERR_ORDER) * err_prev ** (0.4 / _ERR_ORDER)
            h_base = h * min(facmax, max(_FACMIN, fac))
            err_prev = e
            facmax = _FACMAX
        else:
            stats.rejected += 1
            if not finite:
                h_base = 0.5 * h
            else:
                fac = _RK_SAFETY * err ** (-0.7 / _ERR_ORDER)
                h_base = h * min(1.0, max(_FACMIN, fac))
            facmax = 1.0

    record_due(t_end, y)
    return traj
