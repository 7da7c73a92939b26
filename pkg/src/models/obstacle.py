"""
Obstacle models.
Tolerance bands, sampled obstacle sets, avoidance certificates and covers.
"""
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np


@dataclass
class ToleranceBands:
    """
    Nested radii around an obstacle.

    Attributes:
        r: Collision radius (tolerance that must be kept)
        r_star: Risk radius
        R: Safety radius
    """
    r: float
    r_star: float
    R: float

    def __post_init__(self):
        """Validate 0 < r < r_star < R."""
        if not self.r > 0:
            raise ValueError(f"ToleranceBands: need 0 < r, got r={self.r}")
        if not self.r < self.r_star:
            raise ValueError(
                f"ToleranceBands: need r < r_star, got r={self.r} >= r_star={self.r_star}"
            )
        if not self.r_star < self.R:
            raise ValueError(
                f"ToleranceBands: need r_star < R, got r_star={self.r_star} >= R={self.R}"
            )
        self.r, self.r_star, self.R = float(self.r), float(self.r_star), float(self.R)

    def to_dict(self) -> Dict:
        return {"r": self.r, "r_star": self.r_star, "R": self.R}


@dataclass
class ObstacleCloud:
    """
    Finite sample of an obstacle set P; d(q, P) is the minimum over the points.

    Attributes:
        points: Array of shape (m, n), m ≥ 1
        name: Optional label used in reports
    """
    points: np.ndarray
    name: str = ""

    def __post_init__(self):
        """Validate cloud data."""
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.points.size == 0:
            raise ValueError(f"ObstacleCloud {self.name}: cloud must contain at least one point")
        if not np.all(np.isfinite(self.points)):
            raise ValueError(f"ObstacleCloud {self.name}: cloud contains non-finite coordinates")

    @property
    def dim(self) -> int:
        """Get point dimension."""
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def __repr__(self) -> str:
        return f"ObstacleCloud({self.name or 'unnamed'}, {len(self)} points, dim={self.dim})"


@dataclass
class Certificate:
    """
    Constants and threshold of the avoidance guarantee for minimizers.

    Attributes:
        a: Max covariant acceleration norm along the reference
        V_minus: Upper bound of the potential on the safety region
        c: (a² + V_minus)·T
        v: √(cT) + √(cT + ‖v0‖²)
        threshold: c·v / (2(r_star − r))
        V_star_lower: Lower bound of the potential on the risk region
        satisfied: V_star_lower > threshold
        bands: Tolerance bands the certificate refers to
    """
    a: float
    V_minus: float
    c: float
    v: float
    threshold: float
    V_star_lower: float
    satisfied: bool
    bands: ToleranceBands

    @property
    def margin(self) -> float:
        """Relative excess V_star_lower / threshold − 1 (inf when threshold is 0)."""
        if self.threshold <= 0:
            return float("inf")
        return self.V_star_lower / self.threshold - 1.0

    def to_dict(self) -> Dict:
        return {
            "a": self.a,
            "V_minus": self.V_minus,
            "c": self.c,
            "v": self.v,
            "threshold": self.threshold,
            "V_star_lower": self.V_star_lower,
            "satisfied": bool(self.satisfied),
            "bands": self.bands.to_dict(),
        }


@dataclass
class CoverVerification:
    """
    Result of a Monte-Carlo cover check.

    Attributes:
        samples: Number of samples tested
        violations: Samples farther than the radius from every center
        max_gap: Largest sample-to-nearest-center distance
        radius: Covering radius tested against
    """
    samples: int
    violations: int
    max_gap: float
    radius: float

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> Dict:
        return {
            "samples": self.samples,
            "violations": self.violations,
            "max_gap": self.max_gap,
            "radius": self.radius,
            "passed": self.passed,
        }


@dataclass
class CoverResult:
    """
    Finite collection of point obstacles standing in for a set obstacle.

    Attributes:
        centers: Array of shape (m, n) of generators taken from the cloud
        r: Tolerance radius
        R: Safety radius
        r_star: (2r + δ + R)/2
        delta: (R − 2r)/2
        net_size: Number of boundary net points
        completion_centers: Centers added by the completion pass
        inner: Check of B_r(P) ⊂ ∪ B_{r*}(p_i)
        outer: Check of ∪ B_{r*}(p_i) ⊂ B_R(P)
    """
    centers: np.ndarray
    r: float
    R: float
    r_star: float
    delta: float
    net_size: int = 0
    completion_centers: int = 0
    inner: CoverVerification = None
    outer: CoverVerification = None
    notes: List[str] = field(default_factory=list)

    @property
    def num_centers(self) -> int:
        return self.centers.shape[0]

    @property
    def verified(self) -> bool:
        """True when both Monte-Carlo checks ran and passed."""
        return bool(self.inner and self.outer and self.inner.passed and self.outer.passed)

    def to_dict(self) -> Dict:
        return {
            "centers": self.centers.tolist(),
            "r": self.r,
            "R": self.R,
            "r_star": self.r_star,
            "delta": self.delta,
            "net_size": self.net_size,
            "completion_centers": self.completion_centers,
            "inner_check": self.inner.to_dict() if self.inner else None,
            "outer_check": self.outer.to_dict() if self.outer else None,
            "verified": self.verified,
        }
