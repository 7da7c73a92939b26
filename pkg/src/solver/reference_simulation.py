"""
Reference avoidance run around a spherical patch in R³.

Three point obstacles on the patch {(sin φ sin θ, sin φ cos θ, cos φ) :
0 < φ < π/4, 0 < θ < π/2} with support R = 0.3, k = 4 and τ = 100/e;
Euler integration with h = 0.001 and simplex shooting between fixed
boundary data.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from ..config.settings import Settings
from ..models.boundary import BoundaryData, ShootingResult
from ..models.obstacle import CoverResult, CoverVerification
from ..utils.manifold import euclidean_chart
from .avoidance import build_avoidance_potential, min_distances_to_centers
from .covering import cover_obstacle, patch_point, sample_spherical_patch, verify_cover
from .integrator import necessary_condition_residual
from .shooting import ShootingSolver

logger = logging.getLogger(__name__)

PATCH_PHI = (0.0, math.pi / 4)
PATCH_THETA = (0.0, math.pi / 2)
CENTER_ANGLES = ((math.pi / 12, math.pi / 4), (math.pi / 5, math.pi / 9), (math.pi / 5, math.pi / 3))
SUPPORT = 0.3
SHARPNESS = 4
HEIGHT = 100.0 / math.e
STEP = 0.001
RESTARTS = 10
BUDGET = 20000
COVER_TOLERANCE = 0.1

BOUNDARY = BoundaryData(
    q0=[0.0, 0.0, 0.0],
    v0=[0.125, 0.125, 0.45],
    qT=[0.2, 0.5, 1.8],
    vT=[0.3, 0.25, 0.5],
    T=1.0,
)


@dataclass
class ReferenceReport:
    """
    Outcome of the reference run.

    Attributes:
        centers: The three point obstacles
        center_cover: Whether the R-balls around the centers cover the sampled patch
        constructed_cover: Cover of the sampled patch built by the covering module
        shooting: Shooting result
        min_distances: (distance, time) of closest approach per center
        equation_residual: Defect of the samples in the jerk equation
    """
    centers: np.ndarray
    center_cover: CoverVerification
    constructed_cover: Optional[CoverResult]
    shooting: ShootingResult
    min_distances: List = field(default_factory=list)
    equation_residual: float = 0.0

    def to_dict(self) -> Dict:
        return {
            "centers": self.centers.tolist(),
            "center_cover": self.center_cover.to_dict(),
            "constructed_cover": self.constructed_cover.to_dict() if self.constructed_cover else None,
            "shooting": self.shooting.to_dict(),
            "min_distances": [{"distance": d, "time": t} for d, t in self.min_distances],
            "equation_residual": self.equation_residual,
            "boundary": BOUNDARY.to_dict(),
            "potential": {"R": SUPPORT, "k": SHARPNESS, "tau": HEIGHT},
        }


class ReferenceSimulation:
    """
    Runs the spherical-patch avoidance pipeline end to end.
    """

    def __init__(self, settings: Optional[Settings] = None, seed: Optional[int] = 0,
                 build_cover: bool = True):
        """
        Initialize the run.

        Args:
            settings: Shooting and covering settings (integration is fixed to Euler, h = 0.001)
            seed: Seed for the constructed cover
            build_cover: Also construct a cover of the sampled patch
        """
        self.settings = settings or Settings()
        self.seed = seed
        self.build_cover = build_cover
        self.chart = euclidean_chart(3)

    def run(self) -> ReferenceReport:
        """
        Execute the run.

        Returns:
            ReferenceReport
        """
        cloud = sample_spherical_patch(PATCH_PHI, PATCH_THETA)
        centers = np.array([patch_point(phi, theta) for phi, theta in CENTER_ANGLES])

        center_cover = verify_cover(self.chart, cloud.points, centers, SUPPORT)
        if not center_cover.passed:
            logger.warning(
                f"Point obstacles leave {center_cover.violations} of {center_cover.samples} patch "
                f"samples uncovered (largest gap {center_cover.max_gap:.4f} > R={SUPPORT})"
            )

        constructed = None
        if self.build_cover:
            constructed = cover_obstacle(
                self.chart, cloud, COVER_TOLERANCE, SUPPORT, self.settings.avoidance, seed=self.seed,
            )

        potential = build_avoidance_potential(centers, SUPPORT, HEIGHT, SHARPNESS)
        integrator = replace(self.settings.integrator, method="euler", step=STEP)
        options = replace(
            self.settings.solver,
            warm_start="hermite",
            coordinates="aim",
            max_restarts=max(self.settings.solver.max_restarts, RESTARTS),
            max_evaluations=max(self.settings.solver.max_evaluations, BUDGET),
        )
        result = ShootingSolver(self.chart, potential, options, integrator).solve(BOUNDARY)

        distances = min_distances_to_centers(self.chart, result.trajectory, centers)
        for i, (d, t) in enumerate(distances):
            logger.info(f"Closest approach to obstacle {i + 1}: {d:.4f} at t={t:.3f}")

        return ReferenceReport(
            centers=centers,
            center_cover=center_cover,
            constructed_cover=constructed,
            shooting=result,
            min_distances=distances,
            equation_residual=necessary_condition_residual(self.chart, potential, result.trajectory),
        )
