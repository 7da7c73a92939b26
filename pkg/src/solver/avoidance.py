"""
Obstacle-avoidance certificates and potential parameter selection.

A reference trajectory that stays in the safety region of every point
obstacle yields constants a, c and v; a potential whose lower bound on the
risk region exceeds c·v / (2(r* − r)) keeps every minimizer of the action
outside the collision region.
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from ..config.settings import AvoidanceConfig
from ..models.jet import Trajectory
from ..models.obstacle import Certificate, ObstacleCloud, ToleranceBands
from ..models.potential import PotentialSpec, PotentialSum
from ..utils.manifold import ManifoldChart
from ..utils.potential import profile_value

logger = logging.getLogger(__name__)

REGIONS = ("collision", "risk", "buffer", "safety")


class AvoidanceError(Exception):
    """Custom exception for avoidance certificate errors."""
    pass


class CertificatePreconditionError(AvoidanceError):
    """Raised when the reference trajectory leaves the safety region."""

    def __init__(self, time: float, message: str):
        self.time = float(time)
        super().__init__(message)


class InfeasibleParametersError(AvoidanceError):
    """Raised when no grid parameters certify avoidance."""

    def __init__(self, threshold: float, message: str):
        self.threshold = float(threshold)
        super().__init__(message)


def set_distance(chart: ManifoldChart, m, obs: ObstacleCloud) -> float:
    """
    Distance d(m, P) from a point to a sampled set.

    Args:
        chart: Chart holding m and the cloud
        m: Query point
        obs: Obstacle cloud standing in for P

    Returns:
        Minimum distance over the cloud points
    """
    return float(np.min(chart.distances(obs.points, m)))


def _sample_set_distances(chart: ManifoldChart, samples: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Distance from each sample to the nearest of `points`."""
    if chart.is_flat:
        return cdist(samples, points).min(axis=1)
    return np.array([np.min(chart.distances(points, s)) for s in samples])


def min_distance(chart: ManifoldChart, traj: Trajectory, obs: ObstacleCloud) -> Tuple[float, float]:
    """
    Closest approach of a trajectory to an obstacle.

    Args:
        chart: Chart of the trajectory
        traj: Sampled trajectory
        obs: Obstacle cloud

    Returns:
        (minimum of d(q(t), P) over the samples, first time it is attained)
    """
    dists = _sample_set_distances(chart, traj.q, obs.points)
    index = int(np.argmin(dists))
    return float(dists[index]), float(traj.times[index])


def classify_region(chart: ManifoldChart, q, center, bands: ToleranceBands) -> str:
    """
    Region of q relative to a point obstacle.

    Returns:
        "collision" (d < r), "risk" (d < r*), "buffer" (d < R) or "safety"
    """
    d = chart.distance(center, q)
    if d < bands.r:
        return "collision"
    if d < bands.r_star:
        return "risk"
    if d < bands.R:
        return "buffer"
    return "safety"


def certificate_constants(
    a: float,
    V_minus: float,
    T: float,
    v0_norm: float,
    bands: ToleranceBands,
) -> Tuple[float, float, float]:
    """
    The constant chain of the avoidance guarantee.

    Args:
        a: Max covariant acceleration norm along the reference
        V_minus: Upper bound of the potential on the safety region
        T: Horizon
        v0_norm: Norm of the initial velocity
        bands: Tolerance bands

    Returns:
        (c, v, threshold) with c = (a² + V⁻)T, v = √(cT) + √(cT + ‖v0‖²)
        and threshold = c·v / (2(r* − r))
    """
    c = (a * a + V_minus) * T
    v = math.sqrt(c * T) + math.sqrt(c * T + v0_norm * v0_norm)
    threshold = c * v / (2.0 * (bands.r_star - bands.r))
    return c, v, threshold


def safety_upper_bound(potential: PotentialSum, R: float) -> float:
    """
    Bound of the potential on the safety region d ≥ R of every center.

    Each term is bounded by its value at distance R (0 when D ≤ R).
    """
    return float(sum(profile_value(t, R) for t in potential.terms))


def risk_lower_bound(chart: ManifoldChart, potential: PotentialSum, r_star: float) -> float:
    """
    Lower bound of the potential on the risk ball of radius r* around any center.

    For center i the own term contributes its value at r*; every other term
    contributes its value at d(p_i, p_j) + r*, the farthest a risk-ball point
    can be from p_j.

    Returns:
        Minimum over centers of the bound (0 for an empty sum)
    """
    if potential.is_empty:
        return 0.0
    centers = potential.centers
    bounds = []
    for i, term in enumerate(potential.terms):
        pairwise = chart.distances(centers, term.center)
        total = profile_value(term, r_star)
        for j, other in enumerate(potential.terms):
            if j != i:
                total += profile_value(other, pairwise[j] + r_star)
        bounds.append(total)
    return float(min(bounds))


def _check_reference(chart: ManifoldChart, reference: Trajectory, centers: np.ndarray, R: float):
    dists = _sample_set_distances(chart, reference.q, centers)
    bad = np.nonzero(dists <= R)[0]
    if bad.size:
        t = float(reference.times[bad[0]])
        raise CertificatePreconditionError(
            t,
            f"Reference trajectory enters the R={R} ball of an obstacle at t={t:.6g} "
            f"(distance {dists[bad[0]]:.6g})",
        )


def _max_acceleration(chart: ManifoldChart, reference: Trajectory) -> float:
    if chart.is_flat:
        return float(np.max(np.linalg.norm(reference.a, axis=1)))
    return float(max(chart.norm(q, a) for q, a in zip(reference.q, reference.a)))


def certify(
    chart: ManifoldChart,
    reference: Trajectory,
    potential: PotentialSum,
    bands: ToleranceBands,
    v0_norm: float,
    T: float,
) -> Certificate:
    """
    Certificate that minimizers of the action avoid every center with tolerance r.

    Args:
        chart: Chart of the reference
        reference: Trajectory staying farther than R from every center
        potential: Avoidance potential (one term per center)
        bands: Tolerance bands r < r* < R
        v0_norm: Norm of the initial velocity
        T: Horizon

    Returns:
        Certificate with all constants

    Raises:
        CertificatePreconditionError: If the reference comes within R of a center
    """
    if not potential.is_empty:
        _check_reference(chart, reference, potential.centers, bands.R)

    a = _max_acceleration(chart, reference)
    V_minus = safety_upper_bound(potential, bands.R)
    c, v, threshold = certificate_constants(a, V_minus, T, v0_norm, bands)
    V_star = risk_lower_bound(chart, potential, bands.r_star)

    certificate = Certificate(
        a=a, V_minus=V_minus, c=c, v=v, threshold=threshold,
        V_star_lower=V_star, satisfied=V_star > threshold, bands=bands,
    )
    logger.debug(
        f"Certificate: a={a:.4g}, c={c:.4g}, v={v:.4g}, threshold={threshold:.4g}, "
        f"V*={V_star:.4g}, satisfied={certificate.satisfied}"
    )
    return certificate


def build_avoidance_potential(
    centers,
    R: float,
    tau: float,
    k: int,
    sensing_radius: Optional[float] = None,
) -> PotentialSum:
    """
    One potential term of support R per center.

    Args:
        centers: Array of shape (m, n), possibly empty
        R: Support radius shared by every term
        tau: Height
        k: Sharpness exponent
        sensing_radius: Optional sensing radius checked against R

    Returns:
        PotentialSum (V ≡ 0 when there are no centers)
    """
    centers = np.asarray(centers, dtype=float)
    if centers.size == 0:
        return PotentialSum(terms=[], sensing_radius=sensing_radius)
    terms = [PotentialSpec(center=c, D=R, tau=tau, k=k) for c in np.atleast_2d(centers)]
    return PotentialSum(terms=terms, sensing_radius=sensing_radius)


def sharpness_exponent(ratio: float, rel_eps: float, k_max: int = 100000) -> int:
    """
    Smallest k with profile(r*) ≥ (1 − rel_eps)·τ when r*/D = ratio.

    Args:
        ratio: r*/D in (0, 1)
        rel_eps: Allowed relative drop below τ, in (0, 1)
        k_max: Search limit

    Returns:
        The smallest such k

    Raises:
        AvoidanceError: If the arguments are out of range or k_max is too small
    """
    if not 0 < ratio < 1:
        raise AvoidanceError(f"Ratio r*/D must lie in (0, 1), got {ratio}")
    if not 0 < rel_eps < 1:
        raise AvoidanceError(f"Relative tolerance must lie in (0, 1), got {rel_eps}")
    unit = PotentialSpec(center=[0.0], D=1.0, tau=1.0, k=1)
    for k in range(1, k_max + 1):
        unit.k = k
        if profile_value(unit, ratio) >= 1.0 - rel_eps:
            return k
    raise AvoidanceError(f"No k ≤ {k_max} reaches {1 - rel_eps:g}·τ at r*/D={ratio}")


def select_parameters(
    chart: ManifoldChart,
    reference: Trajectory,
    centers,
    bands: ToleranceBands,
    v0_norm: float,
    T: float,
    sensing_radius: Optional[float] = None,
    config: Optional[AvoidanceConfig] = None,
    k_values: Optional[Sequence[int]] = None,
    tau_values: Optional[Sequence[float]] = None,
) -> Tuple[float, int, Certificate]:
    """
    Smallest grid parameters (in (k, τ) order) certifying avoidance with margin.

    Every term uses support D = R. A candidate is accepted when its certificate
    is satisfied and V* ≥ (1 + margin)·threshold. Passing a single k or τ pins
    that parameter and searches the other one only.

    Args:
        chart: Chart of the reference
        reference: Trajectory staying in the safety region
        centers: Point obstacles, shape (m, n)
        bands: Tolerance bands
        v0_norm: Norm of the initial velocity
        T: Horizon
        sensing_radius: Sensing radius h (requires R ≤ h)
        config: Grids and margin
        k_values: Exponents to try (default 1..k_grid_max)
        tau_values: Heights to try (default tau_grid)

    Returns:
        (tau, k, certificate)

    Raises:
        AvoidanceError: If R exceeds the sensing radius
        InfeasibleParametersError: If no grid point certifies
    """
    config = config or AvoidanceConfig()
    if sensing_radius is not None and bands.R > sensing_radius:
        raise AvoidanceError(
            f"Safety radius R={bands.R} exceeds the sensing radius h={sensing_radius}"
        )

    ks = list(k_values) if k_values is not None else list(range(1, config.k_grid_max + 1))
    taus = sorted(float(t) for t in tau_values) if tau_values is not None else list(config.tau_grid)
    if not ks or not taus:
        raise AvoidanceError("Parameter search needs at least one k and one tau")

    last: Optional[Certificate] = None
    for k in ks:
        for tau in taus:
            potential = build_avoidance_potential(centers, bands.R, tau, k, sensing_radius)
            certificate = certify(chart, reference, potential, bands, v0_norm, T)
            last = certificate
            if certificate.satisfied and certificate.V_star_lower >= (1.0 + config.margin) * certificate.threshold:
                logger.info(
                    f"Selected tau={tau:g}, k={k} (V*={certificate.V_star_lower:.4g}, "
                    f"threshold={certificate.threshold:.4g})"
                )
                return tau, k, certificate

    threshold = last.threshold if last is not None else math.inf
    raise InfeasibleParametersError(
        threshold,
        f"No (k, tau) on the grid certifies avoidance; threshold={threshold:.6g}, "
        f"largest tau={max(taus):g}, largest k={max(ks)}",
    )


def min_distances_to_centers(chart: ManifoldChart, traj: Trajectory, centers) -> List[Tuple[float, float]]:
    """
    Closest approach of a trajectory to each center separately.

    Returns:
        List of (distance, time) per center
    """
    report = []
    for center in np.atleast_2d(np.asarray(centers, dtype=float)):
        report.append(min_distance(chart, traj, ObstacleCloud(points=center[None, :])))
    return report
