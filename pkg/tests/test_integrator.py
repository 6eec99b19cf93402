import numpy as np
import pytest

from corrosim.grids import make_grid
from corrosim.integrator import (
    DivergedError,
    TimeSpec,
    Trajectory,
    integrate,
    stability_dt,
)
from corrosim.model import ModelParams, SourceTerms, State


def params(**overrides):
    base = dict(d1=1.0, d2=1.0, d3=1.0, bi_m=0.0, henry=1.0, u1_d=0.0,
                k=0.0, alpha=0.0, beta=0.0, c_bar=1.0,
                r_kind="identity", q_kind="constant")
    base.update(overrides)
    return ModelParams(**base)


def zero_state(grid):
    return State(0.0, grid.macro_field(), grid.micro_field(),
                 grid.micro_field(), grid.macro_field())


class TestTimeSpec:
    def test_defaults(self):
        ts = TimeSpec(t_end=2.0)
        assert ts.snapshots() == (0.0, 2.0)

    def test_bad_horizon(self):
        with pytest.raises(ValueError):
            TimeSpec(t_end=0.0)

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            TimeSpec(t_end=1.0, mode="implicit")

    def test_snapshots_outside_range(self):
        with pytest.raises(ValueError):
            TimeSpec(t_end=1.0, snapshot_times=(0.0, 2.0))

    def test_snapshots_unsorted(self):
        with pytest.raises(ValueError):
            TimeSpec(t_end=1.0, snapshot_times=(0.5, 0.2))


class TestStabilityLimit:
    def test_reference_value(self):
        g = make_grid(1.0, 1.0, 10, 10)  # h = 0.1
        assert stability_dt(params(), g) == pytest.approx(0.002)

    def test_micro_diffusivity_binds(self):
        g = make_grid(1.0, 1.0, 10, 10)
        base = stability_dt(params(), g)
        assert stability_dt(params(d2=10.0), g) == pytest.approx(base / 10.0)

    def test_quadratic_in_step(self):
        g = make_grid(1.0, 1.0, 10, 10)
        fine = g.refine(2)
        assert stability_dt(params(), fine) == pytest.approx(
            stability_dt(params(), g) / 4.0)


class TestFixedStep:
    def test_zero_state_stays_zero(self):
        g = make_grid(1.0, 1.0, 4, 4)
        traj = integrate(zero_state(g), params(), g,
                         TimeSpec(t_end=1.0, snapshot_times=(0.0, 0.5, 1.0)))
        assert [s.t for s in traj.snapshots] == [0.0, 0.5, 1.0]
        for s in traj.snapshots:
            assert np.all(s.u1 == 0.0) and np.all(s.u2 == 0.0)

    def test_gypsum_ode_linear_growth(self):
        # frozen acid trace (diffusion off), identity kernel, constant q:
        # the gypsum field grows exactly linearly
        g = make_grid(1.0, 1.0, 4, 4)
        p = params(k=1.0)
        st = zero_state(g)
        st.u3[:] = 1.0
        traj = integrate(st, p, g,
                         TimeSpec(t_end=2.0, snapshot_times=(0.0, 1.0, 2.0)),
                         include_diffusion=False)
        for s in traj.snapshots:
            assert np.allclose(s.u4, s.t, rtol=1e-12, atol=1e-12)
            assert np.allclose(s.u3, 1.0)

    def test_dirichlet_pin_held(self):
        g = make_grid(1.0, 1.0, 8, 4)
        p = params(bi_m=0.5, u1_d=1.0, alpha=0.2, beta=0.1, k=0.1)
        st = zero_state(g)
        st.u1 = np.sin(np.pi * g.x_nodes())
        st.u1[0] = 0.0
        traj = integrate(st, p, g, TimeSpec(t_end=0.5))
        assert traj.snapshots[-1].u1[0] == 0.0

    def test_eigenmode_decay_rate(self):
        # decoupled gas diffusion; the half-sine mode satisfies both boundary
        # closures, so its amplitude decays at the discrete rate, which is
        # within 1% of d1*(pi/2L)^2 at this resolution
        L = 1.0
        g = make_grid(L, 1.0, 16, 2)
        p = params(d1=0.1, d2=0.1, d3=0.1)
        st = zero_state(g)
        st.u1 = np.sin(np.pi * g.x_nodes() / (2 * L))
        t_end = 2.0
        traj = integrate(st, p, g, TimeSpec(t_end=t_end))
        final = traj.snapshots[-1]
        ratio = final.u1[8] / st.u1[8]
        rate = -np.log(ratio) / t_end
        exact = p.d1 * (np.pi / (2 * L)) ** 2
        assert rate == pytest.approx(exact, rel=0.01)

    def test_matches_matrix_exponential(self):
        # with k = 0 the whole right-hand side is linear; probe it into a
        # matrix and compare against the exact semi-discrete propagator
        expm = pytest.importorskip("scipy.linalg").expm
        from corrosim.integrator import _pack, _unpack
        from corrosim.model import rhs

        g = make_grid(1.0, 1.0, 8, 8)
        p = params(d1=0.2, d2=0.3, d3=0.1, bi_m=0.4, henry=1.0,
                   alpha=0.3, beta=0.2)
        dim = (g.n_x + 1) * 2 + 2 * (g.n_x + 1) * (g.n_y + 1)
        A = np.zeros((dim, dim))
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = 1.0
            tend = rhs(_unpack(0.0, e, g), p, g)
            A[:, j] = np.concatenate(
                [tend.u1, tend.u2.ravel(), tend.u3.ravel(), tend.u4])
        rng = np.random.default_rng(8)
        st = zero_state(g)
        st.u1 = rng.uniform(size=9)
        st.u1[0] = 0.0
        st.u2 = rng.uniform(size=(9, 9))
        st.u3 = rng.uniform(size=(9, 9))
        st.u4 = rng.uniform(size=9)
        t_end = 0.5
        traj = integrate(st, p, g, TimeSpec(t_end=t_end))
        got = _pack(traj.snapshots[-1])
        want = expm(A * t_end) @ _pack(st)
        assert np.linalg.norm(got - want) <= 1e-6 * np.linalg.norm(want)

    def test_rejects_unstable_step(self):
        g = make_grid(1.0, 1.0, 8, 8)
        p = params()
        limit = stability_dt(p, g)
        with pytest.raises(ValueError):
            integrate(zero_state(g), p, g,
                      TimeSpec(t_end=1.0, dt=2.0 * limit))

    def test_snapshots_are_deterministic(self):
        g = make_grid(1.0, 1.0, 8, 4)
        p = params(bi_m=0.3, u1_d=1.0, alpha=0.2, beta=0.1, k=0.2)
        ts = TimeSpec(t_end=1.0, snapshot_times=(0.0, 0.3, 1.0))

        def run():
            st = zero_state(g)
            st.u2[:] = 0.5
            return integrate(st, p, g, ts)

        a, b = run(), run()
        for sa, sb in zip(a.snapshots, b.snapshots):
            assert np.array_equal(sa.u1, sb.u1)
            assert np.array_equal(sa.u2, sb.u2)
            assert np.array_equal(sa.u3, sb.u3)
            assert np.array_equal(sa.u4, sb.u4)


class TestExchangeOnlyDynamics:
    def test_combined_micro_mass_conserved(self):
        # diffusion off, exchange on: the u2 + u3 sum is pointwise conserved,
        # so its weighted mass stays constant along the trajectory
        from corrosim.grids import ip_micro

        g = make_grid(1.0, 1.0, 6, 6)
        p = params(alpha=0.4, beta=0.15)
        rng = np.random.default_rng(12)
        st = zero_state(g)
        st.u2 = rng.uniform(size=(7, 7))
        st.u3 = rng.uniform(size=(7, 7))
        ones = np.ones((7, 7))
        m0 = ip_micro(g, st.u2 + st.u3, ones)
        traj = integrate(st, p, g,
                         TimeSpec(t_end=5.0, snapshot_times=(0.0, 2.5, 5.0)),
                         include_diffusion=False)
        for s in traj.snapshots:
            m = ip_micro(g, s.u2 + s.u3, ones)
            assert m == pytest.approx(m0, rel=1e-12)


class TestAdaptive:
    def test_agrees_with_fixed_mode(self):
        g = make_grid(1.0, 1.0, 8, 8)
        p = params(d1=0.05, d2=0.05, d3=0.05, bi_m=0.2, u1_d=1.0,
                   alpha=0.2, beta=0.05, k=0.1, q_kind="linear_cutoff", m4=1.0)
        st = zero_state(g)
        st.u1 = 1.0 - (1.0 - g.x_nodes()) ** 2  # zero at x = 0
        snaps = (0.0, 5.0, 10.0)
        rtol, atol = 1e-6, 1e-9
        fixed = integrate(st.copy(), p, g,
                          TimeSpec(t_end=10.0, snapshot_times=snaps))
        adaptive = integrate(st.copy(), p, g,
                             TimeSpec(t_end=10.0, mode="adaptive",
                                      rtol=rtol, atol=atol,
                                      snapshot_times=snaps))
        assert adaptive.stats.accepted > 0
        for sf, sa in zip(fixed.snapshots, adaptive.snapshots):
            for uf, ua in ((sf.u1, sa.u1), (sf.u2, sa.u2),
                           (sf.u3, sa.u3), (sf.u4, sa.u4)):
                assert np.all(np.abs(uf - ua) <= 10.0 * (atol + rtol * np.abs(uf)))

    def test_controller_grows_step(self):
        g = make_grid(1.0, 1.0, 8, 8)
        p = params(d1=0.05, d2=0.05, d3=0.05)
        st = zero_state(g)
        st.u2[:] = 1.0
        traj = integrate(st, p, g,
                         TimeSpec(t_end=5.0, mode="adaptive",
                                  rtol=1e-5, atol=1e-8))
        fixed_steps = int(np.ceil(5.0 / stability_dt(p, g)))
        assert traj.stats.accepted < fixed_steps


class TestDivergence:
    def test_nonfinite_source_detected(self):
        g = make_grid(1.0, 1.0, 4, 4)
        bomb = SourceTerms(
            f1=lambda t: np.full(5, np.inf if t > 0.5 else 0.0),
            f2=lambda t: np.zeros((5, 5)),
            f3=lambda t: np.zeros((5, 5)),
            f4=lambda t: np.zeros(5),
        )
        with pytest.raises(DivergedError) as err:
            integrate(zero_state(g), params(), g, TimeSpec(t_end=1.0),
                      sources=bomb)
        assert err.value.last_state is not None
        # last good state precedes the step whose stages saw the blow-up
        assert 0.4 <= err.value.last_state.t <= 0.5

    def test_adaptive_underflow(self):
        g = make_grid(1.0, 1.0, 4, 4)
        bomb = SourceTerms(
            f1=lambda t: np.full(5, np.nan),
            f2=lambda t: np.zeros((5, 5)),
            f3=lambda t: np.zeros((5, 5)),
            f4=lambda t: np.zeros(5),
        )
        with pytest.raises(DivergedError):
            integrate(zero_state(g), params(), g,
                      TimeSpec(t_end=1.0, mode="adaptive"), sources=bomb)


class TestTrajectorySampling:
    def test_linear_interpolation_between_snapshots(self):
        g = make_grid(1.0, 1.0, 4, 4)
        p = params(k=1.0)
        st = zero_state(g)
        st.u3[:] = 1.0
        traj = integrate(st, p, g,
                         TimeSpec(t_end=2.0, snapshot_times=(0.0, 2.0)),
                         include_diffusion=False)
        mid = traj.sample(1.0)
        assert np.allclose(mid.u4, 1.0, rtol=1e-12)

    def test_out_of_range_rejected(self):
        traj = Trajectory(snapshots=[State(0.0, np.zeros(2), np.zeros((2, 2)),
                                           np.zeros((2, 2)), np.zeros(2))])
        with pytest.raises(ValueError):
            traj.sample(1.0)
