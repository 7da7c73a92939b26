"""
Covering a set obstacle by finitely many point obstacles.

Given a sampled set P and radii r < R/2, the cover uses δ = (R − 2r)/2 and
r* = (2r + δ + R)/2. The boundary ∂B_r(P) is sampled by shooting geodesics of
length r from the cloud along low-discrepancy directions, thinned to a δ-net by
farthest-point insertion, and every net point contributes the cloud point it
was shot from as a center. A completion pass then promotes cloud points
farther than r* − r from every center, which makes
B_r(P) ⊂ ∪ B_{r*}(p_i) ⊂ B_R(P) hold for the sampled P.
"""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import norm, qmc

from ..config.settings import AvoidanceConfig
from ..models.obstacle import CoverResult, CoverVerification, ObstacleCloud
from ..utils.guards import patch_embedding
from ..utils.manifold import ManifoldChart

logger = logging.getLogger(__name__)


class CoveringError(Exception):
    """Custom exception for covering construction errors."""
    pass


def cover_radii(r: float, R: float) -> Tuple[float, float]:
    """
    δ and r* of the covering construction.

    Args:
        r: Tolerance radius
        R: Safety radius

    Returns:
        (delta, r_star)

    Raises:
        CoveringError: Unless 0 < r < R/2
    """
    if not 0 < r < R / 2:
        raise CoveringError(f"Covering needs 0 < r < R/2, got r={r}, R={R}")
    delta = (R - 2 * r) / 2
    r_star = (2 * r + delta + R) / 2
    return delta, r_star


def low_discrepancy_directions(dim: int, count: int, seed: Optional[int] = 0) -> np.ndarray:
    """
    Unit vectors from a scrambled Halton sequence pushed through the normal quantile.

    Args:
        dim: Ambient dimension
        count: Number of directions
        seed: Scrambling seed

    Returns:
        Array of shape (count, dim) with unit rows
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    sampler = qmc.Halton(d=dim, scramble=True, seed=seed)
    u = np.clip(sampler.random(count), 1e-12, 1 - 1e-12)
    gauss = norm.ppf(u)
    return gauss / np.linalg.norm(gauss, axis=1, keepdims=True)


def _nearest_distances(chart: ManifoldChart, samples: np.ndarray, points: np.ndarray) -> np.ndarray:
    if chart.is_flat:
        distances, _ = cKDTree(points).query(samples)
        return np.asarray(distances, dtype=float)
    return np.array([np.min(chart.distances(points, s)) for s in samples])


def _geodesic_offsets(
    chart: ManifoldChart,
    origins: np.ndarray,
    directions: np.ndarray,
    lengths: np.ndarray,
) -> np.ndarray:
    """exp_x(ℓ·u/‖u‖_g) for each (origin, direction, length) row."""
    if chart.is_flat:
        return origins + directions * lengths[:, None]
    out = np.empty_like(origins)
    for i, (x, u, length) in enumerate(zip(origins, directions, lengths)):
        out[i] = chart.exp_at(x, length * u / chart.norm(x, u))
    return out


def sample_boundary_shell(
    chart: ManifoldChart,
    obs: ObstacleCloud,
    r: float,
    directions: np.ndarray,
    rejection_epsilon: float = 1e-3,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Samples of ∂B_r(P).

    Every cloud point is offset by r along every direction; samples that end up
    closer than r(1 − ε) to the cloud are rejected.

    Args:
        chart: Chart holding the cloud
        obs: Obstacle cloud
        r: Offset radius
        directions: Unit directions, shape (d, n)
        rejection_epsilon: Relative rejection slack ε

    Returns:
        (samples, index of the cloud point each sample was shot from)
    """
    m, d = len(obs), directions.shape[0]
    origin_index = np.repeat(np.arange(m), d)
    origins = obs.points[origin_index]
    dirs = np.tile(directions, (m, 1))
    samples = _geodesic_offsets(chart, origins, dirs, np.full(m * d, r))
    keep = _nearest_distances(chart, samples, obs.points) >= r * (1 - rejection_epsilon)
    logger.debug(f"Boundary shell: kept {int(keep.sum())} of {m * d} offsets")
    return samples[keep], origin_index[keep]


def farthest_point_net(chart: ManifoldChart, samples: np.ndarray, delta: float) -> List[int]:
    """
    Greedy δ-net by farthest-point insertion.

    Starts from the first sample and inserts the sample farthest from the net
    until every sample is within δ of it.

    Args:
        chart: Chart holding the samples
        samples: Array of shape (m, n), m ≥ 1
        delta: Net radius

    Returns:
        Indices of the net points in insertion order
    """
    if samples.shape[0] == 0:
        raise CoveringError("Cannot build a net from an empty sample set")
    net = [0]
    gap = chart.distances(samples, samples[0])
    while True:
        idx = int(np.argmax(gap))
        if gap[idx] <= delta:
            break
        net.append(idx)
        gap = np.minimum(gap, chart.distances(samples, samples[idx]))
    return net


def sample_ball_cloud(
    chart: ManifoldChart,
    points: np.ndarray,
    radius: float,
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Random points of ∪ B_radius(p) over the given points.

    Each sample picks a point uniformly, a Gaussian direction and a length
    radius·U^{1/n}, so it lies strictly within radius of its point.

    Args:
        chart: Chart holding the points
        points: Array of shape (m, n)
        radius: Ball radius
        count: Number of samples
        rng: Random generator

    Returns:
        Array of shape (count, n)
    """
    points = np.atleast_2d(points)
    n = points.shape[1]
    origins = points[rng.integers(0, points.shape[0], size=count)]
    dirs = rng.standard_normal((count, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    lengths = radius * rng.random(count) ** (1.0 / n)
    return _geodesic_offsets(chart, origins, dirs, lengths)


def verify_cover(
    chart: ManifoldChart,
    samples: np.ndarray,
    centers: np.ndarray,
    radius: float,
) -> CoverVerification:
    """
    Check that every sample lies within radius of some center.

    Args:
        chart: Chart holding samples and centers
        samples: Array of shape (m, n)
        centers: Array of shape (c, n)
        radius: Covering radius (a sample at distance ≥ radius is a violation)

    Returns:
        CoverVerification with the violation count and the largest gap
    """
    gaps = _nearest_distances(chart, samples, np.atleast_2d(centers))
    return CoverVerification(
        samples=int(samples.shape[0]),
        violations=int(np.count_nonzero(gaps >= radius)),
        max_gap=float(np.max(gaps)) if gaps.size else 0.0,
        radius=float(radius),
    )


def check_cover(
    chart: ManifoldChart,
    obs: ObstacleCloud,
    centers: np.ndarray,
    r: float,
    r_star: float,
    R: float,
    samples: int = 10000,
    seed: Optional[int] = 0,
) -> Tuple[CoverVerification, CoverVerification]:
    """
    Monte-Carlo check of B_r(P) ⊂ ∪ B_{r*}(p_i) ⊂ B_R(P).

    Args:
        chart: Chart holding the cloud
        obs: Obstacle cloud
        centers: Candidate centers
        r: Tolerance radius
        r_star: Covering radius
        R: Safety radius
        samples: Samples per inclusion
        seed: Random seed

    Returns:
        (inner check against the centers, outer check against the cloud)
    """
    rng = np.random.default_rng(seed)
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    inner_samples = sample_ball_cloud(chart, obs.points, r, samples, rng)
    inner = verify_cover(chart, inner_samples, centers, r_star)
    outer_samples = sample_ball_cloud(chart, centers, r_star, samples, rng)
    outer = verify_cover(chart, outer_samples, obs.points, R)
    return inner, outer


def cover_obstacle(
    chart: ManifoldChart,
    obs: ObstacleCloud,
    r: float,
    R: float,
    config: Optional[AvoidanceConfig] = None,
    seed: Optional[int] = 0,
    verify: bool = True,
) -> CoverResult:
    """
    Finite collection of point obstacles covering a sampled set obstacle.

    Args:
        chart: Chart holding the cloud
        obs: Obstacle cloud
        r: Tolerance radius (0 < r < R/2)
        R: Safety radius
        config: Direction count, rejection slack and Monte-Carlo sample count
        seed: Seed for the directions and the verification samples
        verify: Run the Monte-Carlo inclusion checks

    Returns:
        CoverResult with centers, δ, r* and the verification outcome

    Raises:
        CoveringError: Unless 0 < r < R/2, or if the cloud dimension does not match the chart
    """
    config = config or AvoidanceConfig()
    delta, r_star = cover_radii(r, R)
    if obs.dim != chart.dim:
        raise CoveringError(f"Cloud has dimension {obs.dim}, chart {chart.name} has {chart.dim}")

    directions = low_discrepancy_directions(chart.dim, config.directions, seed)
    shell, origins = sample_boundary_shell(chart, obs, r, directions, config.rejection_epsilon)
    if shell.shape[0] == 0:
        raise CoveringError("Every boundary sample was rejected; increase the direction count")
    net = farthest_point_net(chart, shell, delta)

    generators: List[int] = []
    for idx in net:
        g = int(origins[idx])
        if g not in generators:
            generators.append(g)
    centers = obs.points[generators]

    # completion: every cloud point within r* − r of a center
    reach = r_star - r
    gap = _nearest_distances(chart, obs.points, centers)
    promoted = 0
    while True:
        idx = int(np.argmax(gap))
        if gap[idx] <= reach:
            break
        centers = np.vstack([centers, obs.points[idx]])
        gap = np.minimum(gap, chart.distances(obs.points, obs.points[idx]))
        promoted += 1

    result = CoverResult(
        centers=centers, r=float(r), R=float(R), r_star=r_star, delta=delta,
        net_size=len(net), completion_centers=promoted,
    )
    if verify:
        result.inner, result.outer = check_cover(
            chart, obs, centers, r, r_star, R, config.monte_carlo_samples, seed,
        )
    logger.info(
        f"Cover: {result.num_centers} centers ({len(net)} net points, {promoted} promoted), "
        f"delta={delta:g}, r*={r_star:g}"
    )
    return result


def sample_spherical_patch(
    phi_range: Tuple[float, float] = (0.0, math.pi / 4),
    theta_range: Tuple[float, float] = (0.0, math.pi / 2),
    n_phi: int = 40,
    n_theta: int = 60,
) -> ObstacleCloud:
    """
    Grid sample of a patch of the unit sphere embedded in R³.

    Points are (sin φ sin θ, sin φ cos θ, cos φ) over a closed grid of the
    two parameter ranges.

    Args:
        phi_range: Polar-angle range
        theta_range: Azimuth range
        n_phi: Grid size in φ
        n_theta: Grid size in θ

    Returns:
        ObstacleCloud in R³ (duplicate pole points removed)
    """
    phi, theta = np.meshgrid(
        np.linspace(phi_range[0], phi_range[1], n_phi),
        np.linspace(theta_range[0], theta_range[1], n_theta),
        indexing="ij",
    )
    points = patch_embedding(phi.ravel(), theta.ravel())
    points = np.unique(np.round(points, 15), axis=0)
    return ObstacleCloud(points=points, name="spherical_patch")


def patch_point(phi: float, theta: float) -> np.ndarray:
    """Point (sin φ sin θ, sin φ cos θ, cos φ) of the unit sphere."""
    return patch_embedding(phi, theta)
