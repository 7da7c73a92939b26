"""Unit tests for the fixed-step integrator."""
import math

import numpy as np
import pytest

from src.models.jet import JetState
from src.models.potential import PotentialSpec, PotentialSum
from src.solver.integrator import (
    IntegrationDivergenceError,
    IntegrationError,
    action_value,
    clip,
    integrate,
    necessary_condition_residual,
    ode_rhs,
)
from src.utils.manifold import euclidean_chart, sphere_chart

EMPTY = PotentialSum(terms=[])


def cubic(s0: JetState, t: float):
    """Closed-form flat solution with V ≡ 0."""
    q = s0.q + s0.v * t + s0.a * t ** 2 / 2 + s0.j * t ** 3 / 6
    v = s0.v + s0.a * t + s0.j * t ** 2 / 2
    a = s0.a + s0.j * t
    return q, v, a, s0.j


class TestFlatIntegration:
    """Test suite for the flat-space cubic oracle."""

    def test_rk4_matches_cubic(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(1, 4))
            s0 = JetState(*(rng.uniform(-2, 2, size=n) for _ in range(4)))
            traj = integrate(euclidean_chart(n), EMPTY, s0, 1.0, 1e-3, "rk4")
            for idx in (0, 250, 700, traj.num_samples - 1):
                q, v, a, j = cubic(s0, traj.times[idx])
                assert np.max(np.abs(traj.q[idx] - q)) < 1e-9
                assert np.max(np.abs(traj.v[idx] - v)) < 1e-9
                assert np.max(np.abs(traj.a[idx] - a)) < 1e-9

    def test_last_sample_lands_on_horizon(self):
        s0 = JetState([0.0], [1.0], [0.0], [0.0])
        traj = integrate(euclidean_chart(1), EMPTY, s0, 0.95, 0.1)
        assert traj.duration == 0.95
        assert traj.num_samples == 11

    def test_euler_first_order(self):
        s0 = JetState([0.0], [0.0], [1.0], [1.0])
        errors = []
        for h in (0.01, 0.005):
            traj = integrate(euclidean_chart(1), EMPTY, s0, 1.0, h, "euler")
            errors.append(abs(traj.q[-1, 0] - cubic(s0, 1.0)[0][0]))
        assert errors[0] / errors[1] == pytest.approx(2.0, rel=0.1)

    def test_rk4_fourth_order_with_potential(self):
        chart = euclidean_chart(1)
        potential = PotentialSum(terms=[PotentialSpec(center=[0.0], D=2.0, tau=1.0, k=1)])
        s0 = JetState([0.5], [0.3], [0.0], [0.0])
        reference = integrate(chart, potential, s0, 1.0, 1e-4, "rk4").q[-1, 0]
        errors = [abs(integrate(chart, potential, s0, 1.0, h, "rk4").q[-1, 0] - reference)
                  for h in (0.02, 0.01)]
        assert errors[0] / errors[1] == pytest.approx(16.0, rel=0.2)

    def test_euler_first_order_with_potential(self):
        chart = euclidean_chart(1)
        potential = PotentialSum(terms=[PotentialSpec(center=[0.0], D=2.0, tau=1.0, k=1)])
        s0 = JetState([0.5], [0.3], [0.0], [0.0])
        reference = integrate(chart, potential, s0, 1.0, 1e-4, "rk4").q[-1, 0]
        errors = [abs(integrate(chart, potential, s0, 1.0, h, "euler").q[-1, 0] - reference)
                  for h in (0.01, 0.005)]
        assert errors[0] / errors[1] == pytest.approx(2.0, rel=0.1)

    def test_potential_pushes_away(self):
        chart = euclidean_chart(1)
        potential = PotentialSum(terms=[PotentialSpec(center=[0.0], D=1.0, tau=10.0, k=1)])
        s0 = JetState([0.3], [0.0], [0.0], [0.0])
        traj = integrate(chart, potential, s0, 0.5, 1e-3)
        assert traj.q[-1, 0] > 0.3


class TestCurvedIntegration:
    """Test suite for the sphere chart."""

    def test_geodesic_follows_great_circle(self):
        chart = sphere_chart()
        q0 = np.array([math.pi / 2, 0.0])
        v0 = np.array([-0.6, 0.8])
        traj = integrate(chart, EMPTY, JetState(q0, v0, [0.0, 0.0], [0.0, 0.0]), 1.0, 1e-3, "rk4")
        p = chart.embed(q0)
        w = chart.embed_tangent(q0, v0)
        for idx in (100, 500, traj.num_samples - 1):
            t = traj.times[idx]
            expected = math.cos(t) * p + math.sin(t) * w
            assert np.linalg.norm(chart.embed(traj.q[idx]) - expected) < 1e-6
        assert np.allclose(traj.a[-1], 0.0, atol=1e-9)

    def test_rhs_matches_first_order_system(self):
        chart = sphere_chart()
        state = JetState([1.0, 0.2], [0.3, -0.4], [0.1, 0.2], [-0.5, 0.3])
        dq, dv, da, dj = ode_rhs(chart, EMPTY, state)
        gamma = chart.christoffel_at(state.q)
        assert np.allclose(dq, state.v)
        assert np.allclose(dv, state.a - np.einsum("ijk,j,k->i", gamma, state.v, state.v))
        expected_dj = (-chart.curvature_apply(state.q, state.a, state.v, state.v)
                       - np.einsum("ijk,j,k->i", gamma, state.v, state.j))
        assert np.allclose(dj, expected_dj)


class TestIntegratorErrors:
    """Test suite for invalid arguments and divergence."""

    @pytest.fixture
    def s0(self):
        return JetState([0.0], [1.0], [0.0], [0.0])

    @pytest.mark.parametrize("T, h, method", [(0.0, 0.1, "rk4"), (1.0, -0.1, "rk4"), (1.0, 0.1, "midpoint")])
    def test_invalid_arguments(self, s0, T, h, method):
        with pytest.raises(IntegrationError):
            integrate(euclidean_chart(1), EMPTY, s0, T, h, method)

    def test_dimension_mismatch(self, s0):
        with pytest.raises(IntegrationError):
            integrate(euclidean_chart(2), EMPTY, s0, 1.0, 0.1)

    def test_divergence_reports_time(self):
        s0 = JetState([0.0], [1e308], [1e308], [0.0])
        with pytest.raises(IntegrationDivergenceError) as info:
            integrate(euclidean_chart(1), EMPTY, s0, 2.0, 1.0, "euler")
        assert info.value.time == 1.0


class TestTrajectoryFunctionals:
    """Test suite for action, equation residual and clipping."""

    def test_action_of_pure_cubic(self):
        s0 = JetState([0.0], [0.0], [0.0], [6.0])
        traj = integrate(euclidean_chart(1), EMPTY, s0, 1.0, 1e-3)
        assert action_value(euclidean_chart(1), EMPTY, traj) == pytest.approx(6.0, abs=1e-4)

    def test_residual_vanishes_for_flat_cubic(self):
        s0 = JetState([0.0, 1.0], [1.0, 0.0], [0.5, -0.5], [1.0, 2.0])
        traj = integrate(euclidean_chart(2), EMPTY, s0, 1.0, 1e-2)
        assert necessary_condition_residual(euclidean_chart(2), EMPTY, traj) < 1e-9

    def test_residual_small_with_potential(self):
        chart = euclidean_chart(1)
        potential = PotentialSum(terms=[PotentialSpec(center=[0.0], D=2.0, tau=1.0, k=1)])
        traj = integrate(chart, potential, JetState([0.5], [0.3], [0.0], [0.0]), 1.0, 1e-3)
        assert necessary_condition_residual(chart, potential, traj) < 1e-3

    def test_clip_replaces_tail(self):
        s0 = JetState([0.0], [1.0], [0.0], [0.0])
        traj = integrate(euclidean_chart(1), EMPTY, s0, 1.0, 0.1)
        event = JetState([0.55], [1.0], [0.0], [0.0])
        clipped = clip(traj, 0.55, event)
        assert clipped.duration == 0.55
        assert clipped.num_samples == 7
        assert clipped.q[-1, 0] == 0.55

    def test_clip_outside_range_raises(self):
        traj = integrate(euclidean_chart(1), EMPTY, JetState([0.0], [1.0], [0.0], [0.0]), 1.0, 0.1)
        with pytest.raises(IntegrationError):
            clip(traj, 1.5, traj.final_state)
