"""Unit tests for the shooting solver."""
import math

import numpy as np
import pytest

from src.config.settings import IntegratorConfig, ShootingOptions
from src.models.boundary import BoundaryData
from src.models.jet import JetState
from src.models.potential import PotentialSpec, PotentialSum
from src.solver.integrator import integrate
from src.solver.shooting import (
    ShootingError,
    ShootingSolver,
    hermite_jets,
    hermite_position,
    shoot,
    terminal_residual,
)
from src.utils.manifold import euclidean_chart, sphere_chart

EMPTY = PotentialSum(terms=[])
INTEGRATOR = IntegratorConfig(method="rk4", step=1e-2)


@pytest.fixture
def random_boundary():
    """Twenty-five seeded flat boundary problems in R^3."""
    rng = np.random.default_rng(7)
    return [
        BoundaryData(q0=rng.uniform(-1, 1, 3), v0=rng.uniform(-1, 1, 3),
                     qT=rng.uniform(-1, 1, 3), vT=rng.uniform(-1, 1, 3), T=1.0)
        for _ in range(25)
    ]


class TestHermite:
    """Test suite for the flat cubic through the boundary data."""

    def test_hermite_jets_hit_boundary(self, random_boundary):
        for bd in random_boundary:
            a0, j0 = hermite_jets(bd)
            s0 = JetState(bd.q0, bd.v0, a0, j0)
            traj = integrate(euclidean_chart(3), EMPTY, s0, bd.T, 1e-3)
            assert np.allclose(traj.q[-1], bd.qT, atol=1e-10)
            assert np.allclose(traj.v[-1], bd.vT, atol=1e-10)

    def test_hermite_position_endpoints(self, random_boundary):
        bd = random_boundary[0]
        assert np.allclose(hermite_position(bd, 0.0), bd.q0)
        assert np.allclose(hermite_position(bd, bd.T), bd.qT)
        assert hermite_position(bd, [0.0, 0.5, 1.0]).shape == (3, 3)


class TestShootingSolver:
    """Test suite for ShootingSolver."""

    def test_recovers_flat_cubic_from_zero_start(self, random_boundary):
        chart = euclidean_chart(3)
        for bd in random_boundary:
            result = shoot(chart, EMPTY, bd, ShootingOptions(), INTEGRATOR)
            assert result.converged
            assert result.residual < 1e-6
            expected = hermite_position(bd, result.trajectory.times)
            assert np.max(np.abs(result.trajectory.q - expected)) < 1e-4

    def test_jets_coordinates_recover_flat_cubic(self, random_boundary):
        bd = random_boundary[3]
        options = ShootingOptions(coordinates="jets", max_restarts=3)
        result = shoot(euclidean_chart(3), EMPTY, bd, options, INTEGRATOR)
        a0, j0 = hermite_jets(bd)
        assert result.converged
        assert np.allclose(result.a0, a0, atol=1e-2)
        assert np.allclose(result.j0, j0, atol=1e-2)

    @pytest.mark.parametrize("chart,q0", [
        (euclidean_chart(3), [0.3, -0.2, 0.7]),
        (sphere_chart(), [1.0, 0.5]),
    ])
    def test_stationary_boundary_stays_put(self, chart, q0):
        bd = BoundaryData(q0=q0, v0=np.zeros(chart.dim), qT=q0, vT=np.zeros(chart.dim), T=2.0)
        result = ShootingSolver(chart, EMPTY, ShootingOptions(), INTEGRATOR).solve(bd)
        assert result.residual < 1e-12
        assert np.allclose(result.a0, 0.0, atol=1e-12)
        assert np.allclose(result.j0, 0.0, atol=1e-12)
        assert np.allclose(result.trajectory.q, q0)

    def test_search_coordinates_are_inverse_maps(self, random_boundary):
        bd = random_boundary[0]
        solver = ShootingSolver(euclidean_chart(3), EMPTY)
        x = np.arange(6, dtype=float) - 2.5
        assert np.allclose(solver.to_jets(bd, solver.to_search(bd, x)), x)
        aim = solver.to_search(bd, np.concatenate(hermite_jets(bd)))
        assert np.allclose(aim, np.concatenate([bd.qT, bd.vT]))

    def test_hermite_warm_start_is_immediate(self, random_boundary):
        bd = random_boundary[1]
        result = shoot(euclidean_chart(3), EMPTY, bd, ShootingOptions(warm_start="hermite"), INTEGRATOR)
        a0, j0 = hermite_jets(bd)
        assert result.converged
        assert result.evaluations <= 2
        assert np.max(np.abs(result.a0 - a0)) < 1e-4
        assert np.max(np.abs(result.j0 - j0)) < 1e-4

    def test_history_non_increasing(self, random_boundary):
        result = shoot(euclidean_chart(3), EMPTY, random_boundary[2], ShootingOptions(), INTEGRATOR)
        assert all(a >= b for a, b in zip(result.history, result.history[1:]))

    def test_budget_exhaustion_reports_not_converged(self, random_boundary):
        options = ShootingOptions(max_evaluations=3)
        result = shoot(euclidean_chart(3), EMPTY, random_boundary[0], options, INTEGRATOR)
        assert not result.converged
        assert result.residual >= options.tolerance

    def test_with_obstacle_converges(self):
        bd = BoundaryData(q0=[0.0, 0.0], v0=[1.0, 0.0], qT=[1.0, 0.0], vT=[1.0, 0.0], T=1.0)
        potential = PotentialSum(terms=[PotentialSpec(center=[0.5, 0.3], D=0.4, tau=2.0, k=1)])
        result = shoot(euclidean_chart(2), potential, bd,
                       ShootingOptions(warm_start="hermite"), INTEGRATOR)
        assert result.converged
        assert result.action > 0.0

    def test_sphere_geodesic_boundary(self):
        chart = sphere_chart()
        s0 = JetState([math.pi / 2, 0.0], [-0.3, 0.4], [0.0, 0.0], [0.0, 0.0])
        end = integrate(chart, EMPTY, s0, 1.0, 1e-2).final_state
        bd = BoundaryData(q0=s0.q, v0=s0.v, qT=end.q, vT=end.v, T=1.0)
        result = ShootingSolver(chart, EMPTY, ShootingOptions(), INTEGRATOR).solve(bd)
        assert result.converged
        assert np.allclose(result.a0, 0.0, atol=1e-4)
        assert np.allclose(result.trajectory.q[-1], end.q, atol=1e-5)

    def test_terminal_residual_weights(self):
        chart = euclidean_chart(1)
        traj = integrate(chart, EMPTY, JetState([0.0], [1.0], [0.0], [0.0]), 1.0, 0.1)
        bd = BoundaryData(q0=[0.0], v0=[1.0], qT=[2.0], vT=[3.0], T=1.0)
        assert terminal_residual(chart, traj, bd) == pytest.approx(1.0 + 4.0)
        assert terminal_residual(chart, traj, bd, 2.0, 0.5) == pytest.approx(2.0 + 2.0)

    def test_dimension_mismatch_raises(self):
        bd = BoundaryData(q0=[0.0], v0=[0.0], qT=[1.0], vT=[0.0], T=1.0)
        with pytest.raises(ShootingError):
            ShootingSolver(euclidean_chart(2), EMPTY).solve(bd)

    def test_bad_starting_jets_raise(self):
        bd = BoundaryData(q0=[0.0], v0=[0.0], qT=[1.0], vT=[0.0], T=1.0)
        with pytest.raises(ShootingError):
            ShootingSolver(euclidean_chart(1), EMPTY).solve(bd, x0=np.zeros(3))
