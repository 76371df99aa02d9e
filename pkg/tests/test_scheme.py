import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasefield.potential import double_well, eval_f, polynomial, stability_bounds
from phasefield.scheme import (
    FieldState,
    GridSpec,
    InvalidInitialData,
    NewtonDivergence,
    NewtonParams,
    RandomUniform,
    SchemeParams,
    SineWave,
    TanhFront,
    make_initial,
    step_convex_splitting,
    step_explicit,
    step_semi_implicit,
)

DW = double_well()
# f = u(u^2-1)^2: vanishes at -1, 0, 1 like the double well but with max f' = 1.
SEXTIC = polynomial([0.0, 0.0, 0.5, 0.0, -0.5, 0.0, 1.0 / 6.0], -1.0, 1.0)
ZERO_F = polynomial([1.0], -1.0, 1.0)  # F constant, f identically zero

ALL_STEPPERS = [step_semi_implicit, step_explicit, step_convex_splitting]


def bisect_cubic_root(dt: float, target: float, lo: float, hi: float) -> float:
    """Root of x + dt*x^3 = target by bisection, independent of the solver."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid + dt * mid**3 < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestGridAndParams:
    def test_grid_from_length(self):
        g = GridSpec.from_length(8, 2.0)
        assert g.dx == 0.25
        assert np.array_equal(g.nodes(), 0.25 * np.arange(8))

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            GridSpec.from_length(2, 1.0)
        with pytest.raises(ValueError):
            GridSpec(J=4, dx=0.25, length=2.0)  # length != J*dx
        with pytest.raises(ValueError):
            GridSpec(J=4, dx=-0.25, length=-1.0)

    def test_params_lambda(self):
        g = GridSpec.from_length(10, 1.0)
        s = SchemeParams.for_grid(epsilon=0.2, dt=0.5, grid=g)
        assert s.lam == pytest.approx(0.04 * 0.5 / 0.01, rel=1e-15)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            SchemeParams(epsilon=-0.1, dt=0.1, lam=0.0)
        with pytest.raises(ValueError):
            SchemeParams(epsilon=0.1, dt=0.0, lam=0.0)

    def test_zero_epsilon_is_allowed(self):
        s = SchemeParams.for_grid(0.0, 0.1, GridSpec.from_length(4, 1.0))
        assert s.lam == 0.0


class TestInitialConditions:
    GRID = GridSpec.from_length(64, 1.0)

    def test_random_uniform_is_deterministic(self):
        a = make_initial(RandomUniform(seed=42), DW, self.GRID)
        b = make_initial(RandomUniform(seed=42), DW, self.GRID)
        assert np.array_equal(a.values, b.values)
        c = make_initial(RandomUniform(seed=43), DW, self.GRID)
        assert not np.array_equal(a.values, c.values)

    def test_random_uniform_respects_interval(self):
        st0 = make_initial(RandomUniform(seed=0), double_well(0.0, 1.0), self.GRID)
        assert st0.values.min() >= 0.0
        assert st0.values.max() <= 1.0

    def test_sine_wave_range(self):
        st0 = make_initial(SineWave(amplitude=0.9, modes=1), DW, self.GRID)
        assert st0.values.min() >= -0.9
        assert st0.values.max() <= 0.9

    def test_sine_wave_centered_on_asymmetric_interval(self):
        st0 = make_initial(SineWave(amplitude=0.4, modes=2), double_well(0.0, 1.0), self.GRID)
        assert st0.values.min() >= 0.1 - 1e-12
        assert st0.values.max() <= 0.9 + 1e-12

    def test_sine_wave_too_large_rejected(self):
        with pytest.raises(InvalidInitialData):
            make_initial(SineWave(amplitude=1.1), DW, self.GRID)

    def test_tanh_front_stays_strictly_inside(self):
        st0 = make_initial(TanhFront(center=0.5, width=0.05), DW, self.GRID)
        assert np.all(st0.values > -1.0)
        assert np.all(st0.values < 1.0)

    def test_tanh_front_needs_positive_width(self):
        with pytest.raises(InvalidInitialData):
            make_initial(TanhFront(center=0.5, width=0.0), DW, self.GRID)

    def test_initial_state_starts_at_step_zero(self):
        st0 = make_initial(RandomUniform(seed=1), DW, self.GRID)
        assert st0.step == 0
        assert st0.time == 0.0


class TestSemiImplicitStep:
    def test_constant_at_upper_bound_is_steady(self):
        g = GridSpec.from_length(16, 1.0)
        s = SchemeParams.for_grid(0.1, 0.3, g)
        state = FieldState(np.full(16, 1.0))
        out = step_semi_implicit(state, DW, g, s)
        assert np.max(np.abs(out.values - 1.0)) <= 1e-13

    def test_constant_field_scalar_reduction(self):
        g = GridSpec.from_length(16, 1.0)
        s = SchemeParams.for_grid(0.37, 0.1, g)
        out = step_semi_implicit(FieldState(np.full(16, 0.5)), DW, g, s)
        assert np.max(np.abs(out.values - 0.5375)) <= 1e-13

    def test_matches_hand_assembled_dense_solve(self):
        g = GridSpec.from_length(4, 2.0)
        s = SchemeParams.for_grid(0.2, 0.1, g)
        lam = s.lam
        v = np.array([1.0, 0.0, -1.0, 0.0])
        a = np.array(
            [
                [1 + 2 * lam, -lam, 0.0, -lam],
                [-lam, 1 + 2 * lam, -lam, 0.0],
                [0.0, -lam, 1 + 2 * lam, -lam],
                [-lam, 0.0, -lam, 1 + 2 * lam],
            ]
        )
        rhs = v - 0.1 * (v**3 - v)
        expected = np.linalg.solve(a, rhs)
        out = step_semi_implicit(FieldState(v), DW, g, s)
        assert np.max(np.abs(out.values - expected)) <= 1e-12

    def test_zero_lambda_reduces_to_pointwise_map(self):
        g = GridSpec.from_length(8, 1.0)
        s = SchemeParams.for_grid(0.0, 0.1, g)
        v = np.array([0.3, -0.8, 0.1, 0.9, -0.2, 0.0, 0.55, -0.44])
        out = step_semi_implicit(FieldState(v), DW, g, s)
        assert np.array_equal(out.values, v - 0.1 * eval_f(DW, v))

    def test_time_and_step_advance(self):
        g = GridSpec.from_length(8, 1.0)
        s = SchemeParams.for_grid(0.1, 0.25, g)
        state = FieldState(np.zeros(8))
        for n in range(1, 4):
            state = step_semi_implicit(state, DW, g, s)
            assert state.step == n
            assert state.time == pytest.approx(n * 0.25)

    def test_pure_diffusion_matches_fourier_symbol(self):
        # with f = 0 the step is backward Euler for the heat equation, whose
        # action on the grid mode cos(2 pi k x) is the exact scalar
        # 1 / (1 + 2*lam*(1 - cos(2 pi k / J)))
        J, k = 32, 5
        g = GridSpec.from_length(J, 1.0)
        s = SchemeParams.for_grid(0.4, 0.2, g)
        mode = np.cos(2.0 * np.pi * k * np.arange(J) / J)
        symbol = 1.0 / (1.0 + 2.0 * s.lam * (1.0 - math.cos(2.0 * math.pi * k / J)))
        out = step_semi_implicit(FieldState(mode), ZERO_F, g, s)
        assert np.max(np.abs(out.values - symbol * mode)) <= 1e-13

    @settings(max_examples=30, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        dt_frac=st.floats(min_value=0.01, max_value=1.0),
        J=st.integers(min_value=8, max_value=64),
        pot=st.sampled_from(["dw", "dw_right", "sextic"]),
    )
    def test_maximum_principle_property(self, seed, dt_frac, J, pot):
        p = {"dw": DW, "dw_right": double_well(0.0, 1.0), "sextic": SEXTIC}[pot]
        dt = dt_frac * stability_bounds(p).dt_max
        g = GridSpec.from_length(J, 1.0)
        s = SchemeParams.for_grid(0.05, dt, g)
        state = make_initial(RandomUniform(seed), p, g)
        tol = 1e-12 * (1.0 + max(abs(p.gamma_minus), abs(p.gamma_plus)))
        for _ in range(20):
            state = step_semi_implicit(state, p, g, s)
            assert state.values.min() >= p.gamma_minus - tol
            assert state.values.max() <= p.gamma_plus + tol


class TestExplicitStep:
    def test_constant_at_lower_bound_is_steady(self):
        g = GridSpec.from_length(16, 1.0)
        s = SchemeParams.for_grid(0.1, 0.3, g)
        out = step_explicit(FieldState(np.full(16, -1.0)), DW, g, s)
        assert np.max(np.abs(out.values + 1.0)) <= 1e-13

    def test_constant_field_scalar_reduction(self):
        g = GridSpec.from_length(16, 1.0)
        s = SchemeParams.for_grid(0.37, 0.1, g)
        out = step_explicit(FieldState(np.full(16, 0.5)), DW, g, s)
        assert np.max(np.abs(out.values - 0.5375)) <= 1e-13

    def test_three_point_stencil_with_wraparound(self):
        g = GridSpec.from_length(3, 1.0)
        s = SchemeParams(epsilon=0.5, dt=0.1, lam=0.25)
        out = step_explicit(FieldState(np.array([1.0, 0.0, 0.0])), ZERO_F, g, s)
        assert np.array_equal(out.values, [0.5, 0.25, 0.25])

    def test_pure_diffusion_matches_fourier_symbol(self):
        J, k = 32, 5
        g = GridSpec.from_length(J, 1.0)
        s = SchemeParams.for_grid(0.4, 0.2, g)
        mode = np.cos(2.0 * np.pi * k * np.arange(J) / J)
        symbol = 1.0 - 2.0 * s.lam * (1.0 - math.cos(2.0 * math.pi * k / J))
        out = step_explicit(FieldState(mode), ZERO_F, g, s)
        assert np.max(np.abs(out.values - symbol * mode)) <= 1e-13

    @settings(max_examples=25, deadline=None)
    @given(
        c=st.floats(min_value=-1.0, max_value=1.0),
        dt=st.floats(min_value=1e-4, max_value=0.5),
    )
    def test_constant_reduction_agrees_with_semi_implicit(self, c, dt):
        g = GridSpec.from_length(8, 1.0)
        s = SchemeParams.for_grid(0.2, dt, g)
        state = FieldState(np.full(8, c))
        expected = c - dt * (c**3 - c)
        a = step_semi_implicit(state, DW, g, s)
        b = step_explicit(state, DW, g, s)
        assert np.max(np.abs(a.values - expected)) <= 1e-13
        assert np.max(np.abs(b.values - expected)) <= 1e-13


class TestConvexSplittingStep:
    def test_fixed_points(self):
        g = GridSpec.from_length(8, 1.0)
        s = SchemeParams.for_grid(0.1, 0.2, g)
        for value in (1.0, 0.0, -1.0):
            out = step_convex_splitting(FieldState(np.full(8, value)), DW, g, s)
            assert np.max(np.abs(out.values - value)) <= 1e-13

    def test_constant_field_matches_scalar_cubic_root(self):
        g = GridSpec.from_length(8, 1.0)
        s = SchemeParams.for_grid(0.1, 0.1, g)
        out = step_convex_splitting(FieldState(np.full(8, 0.5)), DW, g, s)
        root = bisect_cubic_root(dt=0.1, target=0.55, lo=0.0, hi=1.0)
        assert np.max(np.abs(out.values - root)) <= 1e-12

    def test_requires_double_well(self):
        g = GridSpec.from_length(8, 1.0)
        s = SchemeParams.for_grid(0.1, 0.1, g)
        with pytest.raises(ValueError):
            step_convex_splitting(FieldState(np.zeros(8)), SEXTIC, g, s)

    def test_newton_divergence_is_reported(self):
        g = GridSpec.from_length(8, 1.0)
        s = SchemeParams.for_grid(0.1, 0.1, g)
        state = FieldState(np.linspace(-0.9, 0.9, 8))
        with pytest.raises(NewtonDivergence):
            step_convex_splitting(state, DW, g, s, NewtonParams(tol=1e-300, max_iters=1))

    def test_energy_decays_from_random_data(self):
        # Eyre-style splitting should dissipate for moderate dt
        from phasefield.diagnostics import discrete_energy

        g = GridSpec.from_length(32, 1.0)
        s = SchemeParams.for_grid(0.1, 0.5, g)
        state = make_initial(RandomUniform(seed=9), DW, g)
        e_prev = discrete_energy(state, DW, g, s)
        for _ in range(50):
            state = step_convex_splitting(state, DW, g, s)
            e = discrete_energy(state, DW, g, s)
            assert e <= e_prev + 1e-12 * (1.0 + abs(e_prev))
            e_prev = e


class TestSteadyStatesAllSteppers:
    @pytest.mark.parametrize("stepper", ALL_STEPPERS)
    @pytest.mark.parametrize("bound", [-1.0, 1.0])
    def test_interval_endpoints_are_fixed_points(self, stepper, bound):
        g = GridSpec.from_length(16, 1.0)
        s = SchemeParams.for_grid(0.01, 0.5, g)
        state = FieldState(np.full(16, bound))
        for _ in range(5):
            state = stepper(state, DW, g, s)
            assert np.max(np.abs(state.values - bound)) <= 1e-13
