"""
Scenario model.
Everything one command-line run needs, resolved and validated.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Union

import numpy as np

from ..config.settings import Settings
from ..utils.manifold import ManifoldChart
from .boundary import BoundaryData
from .hybrid import HybridSystem, KnotSequence
from .jet import JetState, Trajectory
from .obstacle import ObstacleCloud, ToleranceBands
from .potential import PotentialSum

AUTO = "auto"


@dataclass
class ObstacleSpec:
    """
    Obstacle section of a scenario.

    Attributes:
        cloud: Sampled obstacle set (covered by point obstacles when centers is None)
        centers: Explicit point obstacles
        r: Collision radius
        R: Safety radius
        r_star: Risk radius (defaults to the covering radius)
        tau: Height or "auto"
        k: Sharpness or "auto"
    """
    r: float
    R: float
    cloud: Optional[ObstacleCloud] = None
    centers: Optional[np.ndarray] = None
    r_star: Optional[float] = None
    tau: Union[float, str] = AUTO
    k: Union[int, str] = AUTO

    def __post_init__(self):
        """Validate obstacle data."""
        if self.cloud is None and self.centers is None:
            raise ValueError("ObstacleSpec: need a cloud or explicit centers")
        if self.centers is not None:
            self.centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        if self.r_star is not None:
            ToleranceBands(self.r, self.r_star, self.R)
        if self.tau != AUTO and not float(self.tau) > 0:
            raise ValueError(f"ObstacleSpec: tau must be positive or 'auto', got {self.tau}")
        if self.k != AUTO and not int(self.k) >= 1:
            raise ValueError(f"ObstacleSpec: k must be >= 1 or 'auto', got {self.k}")

    @property
    def auto(self) -> bool:
        return self.tau == AUTO or self.k == AUTO


@dataclass
class HybridSpec:
    """
    Hybrid section of a scenario.

    Attributes:
        system: Hybrid system
        knots: Knot sequence
        guard_targets: Optional guard points per Case-2 segment index
    """
    system: HybridSystem
    knots: KnotSequence
    guard_targets: Dict[int, List] = field(default_factory=dict)


@dataclass
class Scenario:
    """
    A parsed scenario.

    Attributes:
        path: Source file
        chart: Chart of the configuration manifold
        settings: Configuration with scenario overrides applied
        seed: Seed for every sampling step
        boundary: Boundary data (shoot, certify)
        initial: Initial jet (integrate)
        horizon: Integration horizon (integrate)
        potential: Explicit potential terms
        obstacle: Obstacle section (cover, certify, shoot)
        reference: Reference trajectory (certify)
        sensing_radius: Sensing radius h
        hybrid: Hybrid section (plan-hybrid)
    """
    path: str
    chart: Optional[ManifoldChart]
    settings: Settings
    seed: int = 0
    boundary: Optional[BoundaryData] = None
    initial: Optional[JetState] = None
    horizon: Optional[float] = None
    potential: PotentialSum = field(default_factory=lambda: PotentialSum(terms=[]))
    obstacle: Optional[ObstacleSpec] = None
    reference: Optional[Trajectory] = None
    sensing_radius: Optional[float] = None
    hybrid: Optional[HybridSpec] = None
