"""Extensions of grid functions to almost-everywhere-defined functions, the
scalar-product identities they satisfy, and the manufactured-solution
convergence harness.

Two extensions are provided.  The piecewise-constant one lives on dual
cells: node i owns [x_i - h_x/2, x_i + h_x/2] clipped to the domain, so the
cell measures reproduce the trapezoid weights exactly.  The piecewise-linear
one lives on the intervals [x_i, x_{i+1}] (macro) and on the two triangles
splitting each grid rectangle along its anti-diagonal (micro); it is
continuous and interpolates the nodal values exactly.

With these choices the L2 products of constant extensions equal the
weighted discrete products, and the L2 products of the piecewise-linear
gradients equal the staggered-grid products, both as exact identities.
`extension_products` evaluates the L2 side by exact per-cell quadrature
through the evaluation maps, so agreement is a real cross-check of the
extension code against the discrete products.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import (
    GridSpec,
    check_macro,
    check_micro,
    ip_macro,
    ip_macro_edge,
    ip_micro,
    ip_micro_edge,
    norm_macro,
    norm_micro,
)
from .integrator import TimeSpec, integrate
from .model import (
    InitialData,
    ModelParams,
    SourceTerms,
    State,
    project_initial,
)
from .operators import grad_macro, grad_micro


def _axis_points(x: np.ndarray, length: float, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > length):
        raise ValueError(f"{what} coordinate outside [0, {length}]")
    return x


def _dual_index(x: np.ndarray, h: float, n: int) -> np.ndarray:
    # cell boundaries sit at (i + 1/2) h; a point exactly on a boundary
    # belongs to the lower-index cell
    boundaries = (np.arange(n) + 0.5) * h
    return np.searchsorted(boundaries, x, side="left")


def _interval_index(x: np.ndarray, h: float, n: int) -> np.ndarray:
    nodes = np.arange(n + 1) * h
    return np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, n - 1)


def dual_cell_bounds(grid: GridSpec, axis: str) -> np.ndarray:
    """Per-node dual cell intervals, clipped to the domain.

    Returns an array of shape (n + 1, 2) with rows (lo, hi); the measures
    hi - lo reproduce the trapezoid weights times the step size.
    """
    if axis == "x":
        n, h, length = grid.n_x, grid.h_x, grid.length
    elif axis == "y":
        n, h, length = grid.n_y, grid.h_y, grid.cell_length
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    centers = np.arange(n + 1) * h
    lo = np.maximum(centers - 0.5 * h, 0.0)
    hi = np.minimum(centers + 0.5 * h, length)
    return np.column_stack([lo, hi])


def pwc_eval_macro(grid: GridSpec, u: np.ndarray, x) -> np.ndarray:
    """Piecewise-constant extension of a macro field, evaluated at x."""
    u = check_macro(grid, u)
    x = _axis_points(x, grid.length, "x")
    return u[_dual_index(x, grid.h_x, grid.n_x)]


def pwc_eval_micro(grid: GridSpec, u: np.ndarray, x, y) -> np.ndarray:
    """Piecewise-constant extension of a micro field, evaluated at (x, y)."""
    u = check_micro(grid, u)
    x = _axis_points(x, grid.length, "x")
    y = _axis_points(y, grid.cell_length, "y")
    i = _dual_index(x, grid.h_x, grid.n_x)
    j = _dual_index(y, grid.h_y, grid.n_y)
    return u[i, j]


def pwl_eval_macro(grid: GridSpec, u: np.ndarray, x) -> np.ndarray:
    """Continuous piecewise-linear extension of a macro field."""
    u = check_macro(grid, u)
    x = _axis_points(x, grid.length, "x")
    i = _interval_index(x, grid.h_x, grid.n_x)
    xi = (x - i * grid.h_x) / grid.h_x
    return u[i] + (u[i + 1] - u[i]) * xi


def pwl_eval_micro(grid: GridSpec, u: np.ndarray, x, y) -> np.ndarray:
    """Continuous piecewise-linear extension of a micro field.

    Each grid rectangle splits along its anti-diagonal; the affine pieces
    interpolate the three triangle vertices, which makes the extension
    continuous across every shared edge.
    """
    u = check_micro(grid, u)
    x = _axis_points(x, grid.length, "x")
    y = _axis_points(y, grid.cell_length, "y")
    i = _interval_index(x, grid.h_x, grid.n_x)
    j = _interval_index(y, grid.h_y, grid.n_y)
    xi = (x - i * grid.h_x) / grid.h_x
    ups = (y - j * grid.h_y) / grid.h_y
    lower = (u[i, j]
             + (u[i + 1, j] - u[i, j]) * xi
             + (u[i, j + 1] - u[i, j]) * ups)
    upper = (u[i + 1, j + 1]
             + (u[i + 1, j + 1] - u[i, j + 1]) * (xi - 1.0)
             + (u[i + 1, j + 1] - u[i + 1, j]) * (ups - 1.0))
    return np.where(xi + ups <= 1.0, lower, upper)


def extension_products(grid: GridSpec, u_g: np.ndarray, v_g: np.ndarray,
                       u_f: np.ndarray, v_f: np.ndarray) -> dict[str, tuple[float, float]]:
    """Exact L2 products of the extensions next to the discrete products.

    Returns, for each identity, the pair (l2_value, discrete_value):

    * "macro_values":     constant extensions over the dual macro cells
    * "macro_gradients":  linear-extension slopes over the intervals
    * "micro_values":     constant extensions over the dual rectangles
    * "micro_gradients":  cell-axis slopes of the linear extension over the
                          triangle pairs

    The L2 side integrates piecewise-constant integrands cell by cell
    through the evaluation maps, so it is exact quadrature computed on an
    independent path.
    """
    u_g = check_macro(grid, u_g)
    v_g = check_macro(grid, v_g)
    u_f = check_micro(grid, u_f)
    v_f = check_micro(grid, v_f)
    hx, hy = grid.h_x, grid.h_y

    bounds_x = dual_cell_bounds(grid, "x")
    bounds_y = dual_cell_bounds(grid, "y")
    mx = bounds_x[:, 1] - bounds_x[:, 0]
    my = bounds_y[:, 1] - bounds_y[:, 0]
    cx = 0.5 * (bounds_x[:, 0] + bounds_x[:, 1])
    cy = 0.5 * (bounds_y[:, 0] + bounds_y[:, 1])

    macro_vals_l2 = float(np.sum(
        mx * pwc_eval_macro(grid, u_g, cx) * pwc_eval_macro(grid, v_g, cx)))

    CX, CY = np.meshgrid(cx, cy, indexing="ij")
    MX, MY = np.meshgrid(mx, my, indexing="ij")
    micro_vals_l2 = float(np.sum(
        MX * MY
        * pwc_eval_micro(grid, u_f, CX.ravel(), CY.ravel()).reshape(CX.shape)
        * pwc_eval_micro(grid, v_f, CX.ravel(), CY.ravel()).reshape(CX.shape)))

    # macro gradient: slope per interval recovered from endpoint evaluations
    nodes = grid.x_nodes()
    def macro_slopes(w):
        vals = pwl_eval_macro(grid, w, nodes)
        return np.diff(vals) / hx
    macro_grad_l2 = float(np.sum(hx * macro_slopes(u_g) * macro_slopes(v_g)))

    # micro cell-axis gradient: constant per triangle, recovered from the
    # vertex evaluations of each rectangle
    xi = np.arange(grid.n_x + 1) * hx
    yj = np.arange(grid.n_y + 1) * hy
    XI, YJ = np.meshgrid(xi, yj, indexing="ij")
    def corner_vals(w):
        return pwl_eval_micro(grid, w, XI.ravel(), YJ.ravel()).reshape(XI.shape)
    cu = corner_vals(u_f)
    cv = corner_vals(v_f)
    gy_low_u = (cu[:-1, 1:] - cu[:-1, :-1]) / hy   # left edge of each rectangle
    gy_low_v = (cv[:-1, 1:] - cv[:-1, :-1]) / hy
    gy_up_u = (cu[1:, 1:] - cu[1:, :-1]) / hy      # right edge
    gy_up_v = (cv[1:, 1:] - cv[1:, :-1]) / hy
    micro_grad_l2 = float(np.sum(
        0.5 * hx * hy * (gy_low_u * gy_low_v + gy_up_u * gy_up_v)))

    return {
        "macro_values": (macro_vals_l2, ip_macro(grid, u_g, v_g)),
        "macro_gradients": (macro_grad_l2,
                            ip_macro_edge(grid, grad_macro(grid, u_g),
                                          grad_macro(grid, v_g))),
        "micro_values": (micro_vals_l2, ip_micro(grid, u_f, v_f)),
        "micro_gradients": (micro_grad_l2,
                            ip_micro_edge(grid, grad_micro(grid, u_f),
                                          grad_micro(grid, v_f))),
    }


def extension_product_residuals(grid: GridSpec, u_g, v_g, u_f, v_f) -> dict[str, float]:
    """Relative residuals |l2 - discrete| / (1 + |l2| + |discrete|)."""
    pairs = extension_products(grid, u_g, v_g, u_f, v_f)
    return {name: abs(a - b) / (1.0 + abs(a) + abs(b))
            for name, (a, b) in pairs.items()}


# ---------------------------------------------------------------------------
# manufactured solutions


@dataclass(frozen=True)
class ManufacturedSolution:
    """Closed-form fields satisfying all boundary conditions exactly, with
    the volume sources that make them solve the system.

    The gas field is given in shifted form (zero at the inlet).  The cell
    boundary data are compatible by construction: the dissolved-gas trace at
    y = 0 equals the solubility ratio times the gas value, its slope
    vanishes there and at y = ell, and the acid profile cos(lam*y) satisfies
    the surface-reaction flux balance when k*c_bar = d3*lam*tan(lam*ell).
    """

    params: ModelParams
    length: float
    cell_length: float
    amp_x: float = 1.0      # 0 gives data without any x-variation
    lam: float = 0.0        # filled in __post_init__

    def __post_init__(self):
        object.__setattr__(self, "lam", np.pi / (4.0 * self.cell_length))

    # time envelopes
    @staticmethod
    def _a(t):
        return 0.3 + 0.2 * np.exp(-t)

    @staticmethod
    def _b(t):
        return 0.25 + 0.125 * np.exp(-t)

    @staticmethod
    def _c(t):
        return 0.4 + 0.2 * np.exp(-t)

    def _g2(self, x):
        return 1.5 + self.amp_x * np.cos(np.pi * x / self.length)

    def _g3(self, x):
        return 1.0 + 0.5 * self.amp_x * np.cos(np.pi * x / self.length)

    def u1(self, x, t):
        return self._a(t) * self.amp_x * np.sin(0.5 * np.pi * x / self.length)

    def u2(self, x, y, t):
        p = self.params
        psi = 1.0 - np.cos(2.0 * np.pi * y / self.cell_length)
        return p.henry * (self.u1(x, t) + p.u1_d) + self._b(t) * self._g2(x) * psi

    def u3(self, x, y, t):
        return self._c(t) * self._g3(x) * np.cos(self.lam * y)

    def u4(self, x, t):
        return 0.5 + 0.1 * (1.0 - np.exp(-t)) * self._g3(x)

    def f1(self, x, t):
        # the interfacial term vanishes on the exact solution
        p = self.params
        sin = np.sin(0.5 * np.pi * x / self.length)
        da = -0.2 * np.exp(-t)
        ddx = -self._a(t) * (0.5 * np.pi / self.length) ** 2 * sin
        return self.amp_x * (da * sin - p.d1 * ddx)

    def f2(self, x, y, t):
        p = self.params
        psi = 1.0 - np.cos(2.0 * np.pi * y / self.cell_length)
        ddy = (2.0 * np.pi / self.cell_length) ** 2 * np.cos(2.0 * np.pi * y / self.cell_length)
        db = -0.125 * np.exp(-t)
        du2_dt = p.henry * self.du1_dt(x, t) + db * self._g2(x) * psi
        alpha = float(np.asarray(p.alpha))
        beta = float(np.asarray(p.beta))
        exch = alpha * self.u2(x, y, t) - beta * self.u3(x, y, t)
        return du2_dt - p.d2 * self._b(t) * self._g2(x) * ddy + exch

    def f3(self, x, y, t):
        p = self.params
        dc = -0.2 * np.exp(-t)
        cos = np.cos(self.lam * y)
        du3_dt = dc * self._g3(x) * cos
        ddy = -self._c(t) * self.lam**2 * self._g3(x) * cos
        alpha = float(np.asarray(p.alpha))
        beta = float(np.asarray(p.beta))
        exch = alpha * self.u2(x, y, t) - beta * self.u3(x, y, t)
        return du3_dt - p.d3 * ddy - exch

    def f4(self, x, t):
        p = self.params
        du4_dt = 0.1 * np.exp(-t) * self._g3(x)
        surface = p.k * p.c_bar * self.u3(x, self.cell_length, t)
        return du4_dt - surface

    def du1_dt(self, x, t):
        return -0.2 * np.exp(-t) * self.amp_x * np.sin(0.5 * np.pi * x / self.length)

    def initial_data(self) -> InitialData:
        p = self.params
        return InitialData(
            u1=lambda x: self.u1(x, 0.0) + p.u1_d,
            u2=lambda x, y: self.u2(x, y, 0.0),
            u3=lambda x, y: self.u3(x, y, 0.0),
            u4=lambda x: self.u4(x, 0.0) + 0.0 * x,
        )

    def sources(self, grid: GridSpec) -> SourceTerms:
        x = grid.x_nodes()
        X = x[:, None]
        Y = grid.y_nodes()[None, :]
        return SourceTerms(
            f1=lambda t: np.broadcast_to(self.f1(x, t), x.shape).copy(),
            f2=lambda t: np.broadcast_to(self.f2(X, Y, t), (x.size, Y.size)).copy(),
            f3=lambda t: np.broadcast_to(self.f3(X, Y, t), (x.size, Y.size)).copy(),
            f4=lambda t: np.broadcast_to(self.f4(x, t), x.shape).copy(),
        )

    def exact_state(self, grid: GridSpec, t: float) -> State:
        x = grid.x_nodes()
        X = x[:, None]
        Y = grid.y_nodes()[None, :]
        shape = (x.size, Y.size)
        return State(
            t=t,
            u1=np.broadcast_to(self.u1(x, t), x.shape).copy(),
            u2=np.broadcast_to(self.u2(X, Y, t), shape).copy(),
            u3=np.broadcast_to(self.u3(X, Y, t), shape).copy(),
            u4=np.broadcast_to(self.u4(x, t), x.shape).copy(),
        )


def manufactured_default(length: float = 1.0, cell_length: float = 1.0,
                         amp_x: float = 1.0) -> ManufacturedSolution:
    """Smooth separable manufactured solution on the given domain."""
    lam = np.pi / (4.0 * cell_length)
    d3 = 0.1
    c_bar = 1.0
    params = ModelParams(
        d1=0.1, d2=0.1, d3=d3, bi_m=0.5, henry=0.8, u1_d=1.0,
        k=d3 * lam * np.tan(lam * cell_length) / c_bar,
        alpha=0.4, beta=0.3, c_bar=c_bar,
        r_kind="identity", q_kind="constant", m3=10.0, m4=2.0)
    return ManufacturedSolution(params, length, cell_length, amp_x=amp_x)


@dataclass(frozen=True)
class ConstantSolution:
    """Space- and time-constant fields, reproduced exactly by the scheme."""

    params: ModelParams
    u2_value: float
    u4_value: float = 0.7

    def initial_data(self) -> InitialData:
        p = self.params
        return InitialData(
            u1=lambda x: np.full_like(x, p.u1_d),
            u2=lambda x, y: self.u2_value + 0.0 * x * y,
            u3=lambda x, y: 0.0 * x * y,
            u4=lambda x: np.full_like(x, self.u4_value),
        )

    def sources(self, grid: GridSpec) -> SourceTerms:
        p = self.params
        alpha = float(np.asarray(p.alpha))
        nm, nf = grid.n_x + 1, grid.n_y + 1
        exch = alpha * self.u2_value
        return SourceTerms(
            f1=lambda t: np.zeros(nm),
            f2=lambda t: np.full((nm, nf), exch),
            f3=lambda t: np.full((nm, nf), -exch),
            f4=lambda t: np.zeros(nm),
        )

    def exact_state(self, grid: GridSpec, t: float) -> State:
        return State(
            t=t,
            u1=np.zeros(grid.n_x + 1),
            u2=np.full((grid.n_x + 1, grid.n_y + 1), self.u2_value),
            u3=np.zeros((grid.n_x + 1, grid.n_y + 1)),
            u4=np.full(grid.n_x + 1, self.u4_value),
        )


def manufactured_constant(length: float = 1.0, cell_length: float = 1.0) -> ConstantSolution:
    params = ModelParams(
        d1=0.1, d2=0.1, d3=0.1, bi_m=0.5, henry=0.8, u1_d=1.0,
        k=0.2, alpha=0.4, beta=0.3, c_bar=1.0,
        r_kind="identity", q_kind="constant")
    return ConstantSolution(params, u2_value=params.henry * params.u1_d)


@dataclass
class ConvergenceRow:
    level: int
    n_x: int
    n_y: int
    e_u1: float
    e_u2: float
    e_u3: float
    e_u4: float


@dataclass
class ConvergenceTable:
    rows: list[ConvergenceRow] = field(default_factory=list)
    orders: dict[str, list[float]] = field(default_factory=dict)

    FIELDS = ("u1", "u2", "u3", "u4")


def mms_convergence(solution, base_grid: GridSpec, levels: int,
                    t_end: float, refine_y_only: bool = False) -> ConvergenceTable:
    """Error table and observed orders under grid refinement.

    Integrates the forced system on `levels` nested grids (halving both
    steps per level, or only the cell step with refine_y_only) and reports
    the discrete L2 errors against the exact fields at t_end, plus the
    observed order log2(e_k / e_{k+1}) between consecutive levels.
    """
    if levels < 2:
        raise ValueError(f"order measurement needs at least 2 levels, got {levels}")
    table = ConvergenceTable()
    for lvl in range(levels):
        factor = 2**lvl
        if refine_y_only:
            g = GridSpec(base_grid.length, base_grid.cell_length,
                         base_grid.n_x, base_grid.n_y * factor)
        else:
            g = base_grid.refine(factor) if lvl else base_grid
        params = solution.params
        state0 = project_initial(solution.initial_data(), params, g)
        ts = TimeSpec(t_end=t_end, snapshot_times=(t_end,))
        traj = integrate(state0, params, g, ts, sources=solution.sources(g))
        final = traj.snapshots[-1]
        exact = solution.exact_state(g, t_end)
        table.rows.append(ConvergenceRow(
            level=lvl, n_x=g.n_x, n_y=g.n_y,
            e_u1=norm_macro(g, final.u1 - exact.u1),
            e_u2=norm_micro(g, final.u2 - exact.u2),
            e_u3=norm_micro(g, final.u3 - exact.u3),
            e_u4=norm_macro(g, final.u4 - exact.u4),
        ))
    for name in ConvergenceTable.FIELDS:
        errs = [getattr(r, f"e_{name}") for r in table.rows]
        orders = []
        for a, b in zip(errs, errs[1:]):
            if a > 0.0 and b > 0.0:
                orders.append(float(np.log2(a / b)))
            else:
                orders.append(float("nan"))
        table.orders[name] = orders
    return table
