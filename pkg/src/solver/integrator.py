"""
Fixed-step integrator for the fourth-order spline equation.

The state is the covariant jet (q, v, a, j) with v = dq/dt, a = Dq̇/dt and
j = D²q̇/dt². In chart coordinates the equation

    D⁴q/dt⁴ + R(D²q/dt², dq/dt) dq/dt = −grad V(q)

becomes the first-order system

    dq/dt = v
    dv/dt = a − Γ(q; v, v)
    da/dt = j − Γ(q; v, a)
    dj/dt = −R(a, v)v − grad V(q) − Γ(q; v, j)
"""
import logging
import math
from typing import Tuple

import numpy as np
from scipy.integrate import trapezoid

from ..models.jet import JetState, Trajectory
from ..models.potential import PotentialSum
from ..utils.manifold import ManifoldChart
from ..utils.potential import sum_gradient, sum_value

logger = logging.getLogger(__name__)

METHODS = ("euler", "rk4")

# Slack when rounding T/h to a step count
STEP_ROUNDING = 1e-9


class IntegrationError(Exception):
    """Custom exception for integration errors."""
    pass


class IntegrationDivergenceError(IntegrationError):
    """Raised when the integrated state stops being finite."""

    def __init__(self, time: float, message: str = ""):
        self.time = float(time)
        super().__init__(message or f"Integration diverged: non-finite state at t={self.time:.9g}")


def _split(y: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    n = y.shape[0] // 4
    return y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:]


def rhs_vector(chart: ManifoldChart, potential: PotentialSum, y: np.ndarray) -> np.ndarray:
    """
    Time derivative of the stacked state (q, v, a, j).

    Args:
        chart: Chart of the configuration manifold
        potential: Potential sum V
        y: Stacked state of length 4n

    Returns:
        Stacked derivative of length 4n
    """
    q, v, a, j = _split(y)
    grad_v = sum_gradient(chart, potential, q)
    if chart.is_flat:
        return np.concatenate([v, a, j, -grad_v])

    gamma = chart.christoffel_at(q)
    gamma_vv = np.einsum("ijk,j,k->i", gamma, v, v)
    gamma_va = np.einsum("ijk,j,k->i", gamma, v, a)
    gamma_vj = np.einsum("ijk,j,k->i", gamma, v, j)
    curvature = chart.curvature_apply(q, a, v, v)
    return np.concatenate([
        v,
        a - gamma_vv,
        j - gamma_va,
        -curvature - grad_v - gamma_vj,
    ])


def ode_rhs(
    chart: ManifoldChart,
    potential: PotentialSum,
    state: JetState,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Coordinate derivatives of a jet state.

    Args:
        chart: Chart of the configuration manifold
        potential: Potential sum V
        state: Current jet

    Returns:
        (dq/dt, dv/dt, da/dt, dj/dt)

    Raises:
        ChartDomainError: If the state lies on the chart's singular set
    """
    return _split(rhs_vector(chart, potential, state.to_vector()))


def advance(
    chart: ManifoldChart,
    potential: PotentialSum,
    y: np.ndarray,
    h: float,
    method: str = "rk4",
) -> np.ndarray:
    """
    Take one step of the chosen method.

    Args:
        chart: Chart of the configuration manifold
        potential: Potential sum V
        y: Stacked state
        h: Step length
        method: "euler" or "rk4"

    Returns:
        Stacked state after the step
    """
    if method == "euler":
        return y + h * rhs_vector(chart, potential, y)
    k1 = rhs_vector(chart, potential, y)
    k2 = rhs_vector(chart, potential, y + 0.5 * h * k1)
    k3 = rhs_vector(chart, potential, y + 0.5 * h * k2)
    k4 = rhs_vector(chart, potential, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_count(T: float, h: float) -> int:
    """Number of uniform steps of length ≤ h covering [0, T]."""
    return max(1, int(math.ceil(T / h - STEP_ROUNDING)))


def integrate(
    chart: ManifoldChart,
    potential: PotentialSum,
    s0: JetState,
    T: float,
    h: float,
    method: str = "rk4",
) -> Trajectory:
    """
    Integrate the spline equation on [0, T] with a fixed step.

    The step count is ceil(T/h) and the actual step T/count, so the last
    sample lands exactly on T.

    Args:
        chart: Chart of the configuration manifold
        potential: Potential sum V
        s0: Initial jet
        T: Horizon (positive)
        h: Nominal step (positive)
        method: "euler" or "rk4"

    Returns:
        Trajectory holding all four jet levels at every sample

    Raises:
        IntegrationError: If T, h or method are invalid
        IntegrationDivergenceError: If the state becomes non-finite
    """
    if method not in METHODS:
        raise IntegrationError(f"Unknown integration method '{method}' (expected one of {METHODS})")
    if not T > 0:
        raise IntegrationError(f"Horizon must be positive, got T={T}")
    if not h > 0:
        raise IntegrationError(f"Step must be positive, got h={h}")
    if s0.dim != chart.dim:
        raise IntegrationError(f"Initial jet has dimension {s0.dim}, chart {chart.name} has {chart.dim}")

    n_steps = step_count(T, h)
    dt = T / n_steps
    times = np.linspace(0.0, T, n_steps + 1)
    states = np.empty((n_steps + 1, 4 * chart.dim))
    states[0] = s0.to_vector()

    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n_steps):
            nxt = advance(chart, potential, states[i], dt, method)
            if not np.all(np.isfinite(nxt)):
                raise IntegrationDivergenceError(times[i + 1])
            states[i + 1] = nxt

    logger.debug(f"Integrated {n_steps} {method} steps of {dt:.3g} on {chart.name}")
    n = chart.dim
    return Trajectory(
        times=times,
        q=states[:, :n],
        v=states[:, n:2 * n],
        a=states[:, 2 * n:3 * n],
        j=states[:, 3 * n:],
        chart_name=chart.name,
        method=method,
    )


def action_value(chart: ManifoldChart, potential: PotentialSum, traj: Trajectory) -> float:
    """
    Action J = ½ ∫ (‖Dq̇/dt‖² + V(q)) dt by the trapezoidal rule on the samples.

    Args:
        chart: Chart of the trajectory
        potential: Potential sum V
        traj: Sampled trajectory

    Returns:
        Non-negative action value
    """
    if traj.num_samples < 2:
        return 0.0
    if chart.is_flat:
        accel = np.einsum("ij,ij->i", traj.a, traj.a)
    else:
        accel = np.array([chart.inner(q, a, a) for q, a in zip(traj.q, traj.a)])
    if potential.is_empty:
        pot = np.zeros_like(accel)
    else:
        pot = np.array([sum_value(chart, potential, q) for q in traj.q])
    return float(0.5 * trapezoid(accel + pot, traj.times))


def necessary_condition_residual(
    chart: ManifoldChart,
    potential: PotentialSum,
    traj: Trajectory,
) -> float:
    """
    Defect of the stored samples in the jerk equation.

    The coordinate derivative of the stored jerk is estimated by second-order
    finite differences and compared with −R(a, v)v − grad V − Γ(v, j) at every
    interior sample.

    Args:
        chart: Chart of the trajectory
        potential: Potential sum V
        traj: Sampled trajectory

    Returns:
        Max over interior samples of the residual's Euclidean norm (0 for
        fewer than three samples)
    """
    if traj.num_samples < 3:
        return 0.0
    dj_fd = np.gradient(traj.j, traj.times, axis=0)
    worst = 0.0
    for i in range(1, traj.num_samples - 1):
        y = np.concatenate([traj.q[i], traj.v[i], traj.a[i], traj.j[i]])
        dj = _split(rhs_vector(chart, potential, y))[3]
        worst = max(worst, float(np.linalg.norm(dj_fd[i] - dj)))
    return worst


def clip(traj: Trajectory, time: float, state: JetState) -> Trajectory:
    """
    Truncate a trajectory at an event time.

    Samples at or after `time` are dropped and (time, state) becomes the last
    sample, so the last step is generally shorter than the others.

    Args:
        traj: Trajectory to truncate
        time: Event time in (0, T]
        state: Jet at the event time

    Returns:
        Truncated trajectory

    Raises:
        IntegrationError: If time lies outside (0, T]
    """
    if not 0.0 < time <= traj.duration:
        raise IntegrationError(f"Clip time {time} outside (0, {traj.duration}]")
    keep = int(np.searchsorted(traj.times, time, side="left"))
    return Trajectory(
        times=np.append(traj.times[:keep], time),
        q=np.vstack([traj.q[:keep], state.q]),
        v=np.vstack([traj.v[:keep], state.v]),
        a=np.vstack([traj.a[:keep], state.a]),
        j=np.vstack([traj.j[:keep], state.j]),
        chart_name=traj.chart_name,
        method=traj.method,
    )
