"""
Shooting solver for the two-point boundary-value problem.

The unknown initial covariant acceleration and jerk are found by a downhill
simplex search over R^{2n} that drives the terminal mismatch to zero. The
simplex runs either on the jets directly or on the aim point they induce.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from ..config.settings import IntegratorConfig, ShootingOptions
from ..models.boundary import BoundaryData, ShootingResult
from ..models.jet import JetState, Trajectory
from ..models.potential import PotentialSum
from ..utils.manifold import ManifoldChart, ManifoldError
from .integrator import IntegrationError, action_value, integrate
from .nelder_mead import NelderMead

logger = logging.getLogger(__name__)


class ShootingError(Exception):
    """Custom exception for shooting solver errors."""
    pass


def _cubic_jets(q0, v0, qT, vT, T: float) -> Tuple[np.ndarray, np.ndarray]:
    gap = qT - q0 - v0 * T
    dv = vT - v0
    a0 = (6.0 * gap - 2.0 * dv * T) / T ** 2
    j0 = (6.0 * dv * T - 12.0 * gap) / T ** 3
    return a0, j0


def _cubic_end(q0, v0, a0, j0, T: float) -> Tuple[np.ndarray, np.ndarray]:
    qT = q0 + v0 * T + 0.5 * a0 * T ** 2 + j0 * T ** 3 / 6.0
    vT = v0 + a0 * T + 0.5 * j0 * T ** 2
    return qT, vT


def hermite_jets(bd: BoundaryData) -> Tuple[np.ndarray, np.ndarray]:
    """
    Initial acceleration and jerk of the cubic matching the boundary data.

    In flat space this cubic is the exact solution with V ≡ 0.

    Args:
        bd: Boundary data

    Returns:
        (a0, j0)
    """
    return _cubic_jets(bd.q0, bd.v0, bd.qT, bd.vT, bd.T)


def hermite_position(bd: BoundaryData, t) -> np.ndarray:
    """
    Position of the boundary-data cubic at time(s) t.

    Args:
        bd: Boundary data
        t: Scalar time or array of times

    Returns:
        Array of shape (n,) or (len(t), n)
    """
    a0, j0 = hermite_jets(bd)
    t = np.asarray(t, dtype=float)
    tt = t[..., None]
    return bd.q0 + bd.v0 * tt + 0.5 * a0 * tt ** 2 + j0 * tt ** 3 / 6.0


def terminal_residual(
    chart: ManifoldChart,
    traj: Trajectory,
    bd: BoundaryData,
    position_weight: float = 1.0,
    velocity_weight: float = 1.0,
) -> float:
    """
    Terminal mismatch w_p·d(q(T), qT)² + w_v·‖v(T) − vT‖².

    Velocities are compared componentwise in chart coordinates.

    Args:
        chart: Chart of the trajectory
        traj: Integrated trajectory
        bd: Boundary data
        position_weight: Weight of the position term
        velocity_weight: Weight of the velocity term

    Returns:
        Non-negative residual
    """
    d = chart.distance(traj.q[-1], bd.qT)
    dv = traj.v[-1] - bd.vT
    return float(position_weight * d ** 2 + velocity_weight * np.dot(dv, dv))


class ShootingSolver:
    """
    Single shooting with a downhill simplex over the initial jets.

    With coordinates="aim" the simplex moves the end state (q̂T, v̂T) of the flat
    cubic sharing the trial jets instead of the jets themselves. The two are
    related by a fixed affine map, and in flat space with V ≡ 0 the aim point
    is exactly the integrated end state.
    """

    def __init__(
        self,
        chart: ManifoldChart,
        potential: PotentialSum,
        options: Optional[ShootingOptions] = None,
        integrator: Optional[IntegratorConfig] = None,
    ):
        """
        Initialize the solver.

        Args:
            chart: Chart of the configuration manifold
            potential: Potential sum V
            options: Simplex and residual settings
            integrator: Integration method and step
        """
        self.chart = chart
        self.potential = potential
        self.options = options or ShootingOptions()
        self.integrator = integrator or IntegratorConfig()

    def to_jets(self, bd: BoundaryData, z: np.ndarray) -> np.ndarray:
        """Stacked (a0, j0) for a point in the search coordinates."""
        if self.options.coordinates == "jets":
            return np.asarray(z, dtype=float)
        n = self.chart.dim
        a0, j0 = _cubic_jets(bd.q0, bd.v0, z[:n], z[n:], bd.T)
        return np.concatenate([a0, j0])

    def to_search(self, bd: BoundaryData, x: np.ndarray) -> np.ndarray:
        """Search coordinates of the stacked jets (a0, j0)."""
        x = np.asarray(x, dtype=float)
        if self.options.coordinates == "jets":
            return x
        n = self.chart.dim
        qT, vT = _cubic_end(bd.q0, bd.v0, x[:n], x[n:], bd.T)
        return np.concatenate([qT, vT])

    def _integrate(self, bd: BoundaryData, x: np.ndarray) -> Trajectory:
        n = self.chart.dim
        s0 = JetState(q=bd.q0, v=bd.v0, a=x[:n], j=x[n:])
        return integrate(
            self.chart, self.potential, s0, bd.T,
            self.integrator.step, self.integrator.method,
        )

    def _residual(self, traj: Trajectory, bd: BoundaryData) -> float:
        return terminal_residual(
            self.chart, traj, bd,
            self.options.position_weight, self.options.velocity_weight,
        )

    def objective(self, bd: BoundaryData):
        """
        Residual as a function of the search coordinates.

        Probes whose integration diverges or leaves the chart score +inf.
        """
        def residual_of(z: np.ndarray) -> float:
            try:
                return self._residual(self._integrate(bd, self.to_jets(bd, z)), bd)
            except (IntegrationError, ManifoldError, ValueError):
                return float("inf")
        return residual_of

    def initial_guess(self, bd: BoundaryData) -> np.ndarray:
        """Starting jets per the warm_start option."""
        if self.options.warm_start == "hermite":
            a0, j0 = hermite_jets(bd)
            return np.concatenate([a0, j0])
        return np.zeros(2 * self.chart.dim)

    def solve(self, bd: BoundaryData, x0: Optional[np.ndarray] = None) -> ShootingResult:
        """
        Solve the boundary-value problem.

        Args:
            bd: Boundary data
            x0: Optional starting jets (a0, j0) stacked; overrides warm_start

        Returns:
            ShootingResult with the best jets found; converged is False when the
            budget ran out first

        Raises:
            ShootingError: If the boundary data does not fit the chart
            IntegrationError: If even the best trial cannot be integrated
        """
        if bd.dim != self.chart.dim:
            raise ShootingError(
                f"Boundary data has dimension {bd.dim}, chart {self.chart.name} has {self.chart.dim}"
            )
        self.chart.check_point(bd.q0)
        self.chart.check_point(bd.qT)

        start = self.initial_guess(bd) if x0 is None else np.asarray(x0, dtype=float)
        if start.shape != (2 * self.chart.dim,):
            raise ShootingError(f"Starting jets must have length {2 * self.chart.dim}")

        opts = self.options
        simplex = NelderMead(
            reflection=opts.reflection,
            expansion=opts.expansion,
            contraction=opts.contraction,
            shrink=opts.shrink,
            initial_step=opts.initial_step,
            max_evaluations=opts.max_evaluations,
            target=opts.stop_tolerance,
            max_restarts=opts.max_restarts,
            workers=opts.workers,
        )
        search = simplex.minimize(self.objective(bd), self.to_search(bd, start))

        n = self.chart.dim
        jets = self.to_jets(bd, search.x)
        traj = self._integrate(bd, jets)
        residual = self._residual(traj, bd)
        converged = residual < opts.tolerance
        action = action_value(self.chart, self.potential, traj)

        if converged:
            logger.info(
                f"Shooting converged: residual={residual:.3e} after {search.evaluations} evaluations"
            )
        else:
            logger.warning(
                f"Shooting did not converge: residual={residual:.3e} after "
                f"{search.evaluations} evaluations ({search.reason})"
            )

        return ShootingResult(
            trajectory=traj,
            residual=residual,
            a0=jets[:n].copy(),
            j0=jets[n:].copy(),
            evaluations=search.evaluations,
            converged=converged,
            action=action,
            restarts=search.restarts,
            history=search.history,
        )


def shoot(
    chart: ManifoldChart,
    potential: PotentialSum,
    bd: BoundaryData,
    options: Optional[ShootingOptions] = None,
    integrator: Optional[IntegratorConfig] = None,
    x0: Optional[np.ndarray] = None,
) -> ShootingResult:
    """
    Solve a boundary-value problem by simplex shooting.

    Args:
        chart: Chart of the configuration manifold
        potential: Potential sum V
        bd: Boundary data
        options: Simplex and residual settings
        integrator: Integration method and step
        x0: Optional starting jets (a0, j0) stacked

    Returns:
        ShootingResult
    """
    return ShootingSolver(chart, potential, options, integrator).solve(bd, x0=x0)
