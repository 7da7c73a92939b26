"""
Guard primitives for systems with impulse effects.

A primitive gives a signed distance in chart coordinates (negative inside);
a guard point q is inside when signed_distance(q) < threshold. Bounded
primitives can also lay down a grid cloud of interior points, used to build
avoidance potentials and to pick guard targets.
"""
import math
from abc import ABC, abstractmethod
from typing import Dict, Tuple

import numpy as np


class GuardError(Exception):
    """Custom exception for guard primitive errors."""
    pass


def patch_embedding(phi, theta) -> np.ndarray:
    """
    Points (sin φ sin θ, sin φ cos θ, cos φ) of the unit sphere.

    Args:
        phi: Polar angle(s)
        theta: Azimuth(s)

    Returns:
        Array of shape (..., 3)
    """
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.sin(phi) * np.sin(theta), np.sin(phi) * np.cos(theta), np.cos(phi)], axis=-1)


def _grid(lower: np.ndarray, upper: np.ndarray, spacing: float) -> np.ndarray:
    axes = [np.arange(lo, hi + 0.5 * spacing, spacing) for lo, hi in zip(lower, upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


class GuardPrimitive(ABC):
    """Region with a signed distance in chart coordinates."""

    kind: str = "primitive"

    @abstractmethod
    def signed_distance(self, q) -> float:
        """Signed distance of q to the region boundary (negative inside)."""

    def sample_cloud(self, spacing: float) -> np.ndarray:
        """Interior grid points at the given spacing."""
        raise GuardError(f"Guard primitive '{self.kind}' cannot sample its own cloud; supply points")

    @abstractmethod
    def to_dict(self) -> Dict:
        """Serializable description as in scenario files."""


class HalfSpace(GuardPrimitive):
    """Open half-space {q : n·q > offset}."""

    kind = "halfspace"

    def __init__(self, normal, offset: float):
        self.normal = np.asarray(normal, dtype=float)
        length = float(np.linalg.norm(self.normal))
        if length == 0.0:
            raise GuardError("Half-space normal must be non-zero")
        self.normal = self.normal / length
        self.offset = float(offset) / length

    def signed_distance(self, q) -> float:
        return float(self.offset - self.normal @ np.asarray(q, dtype=float))

    def to_dict(self) -> Dict:
        return {"type": self.kind, "normal": self.normal.tolist(), "offset": self.offset}


class Ball(GuardPrimitive):
    """Open coordinate ball {q : ‖q − c‖ < radius}."""

    kind = "ball"

    def __init__(self, center, radius: float):
        if not radius > 0:
            raise GuardError(f"Ball radius must be positive, got {radius}")
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def signed_distance(self, q) -> float:
        return float(np.linalg.norm(np.asarray(q, dtype=float) - self.center) - self.radius)

    def sample_cloud(self, spacing: float) -> np.ndarray:
        """Grid points at least spacing/2 inside the ball."""
        grid = _grid(self.center - self.radius, self.center + self.radius, spacing)
        inside = np.linalg.norm(grid - self.center, axis=1) <= self.radius - 0.5 * spacing + 1e-12
        return grid[inside]

    def to_dict(self) -> Dict:
        return {"type": self.kind, "center": self.center.tolist(), "radius": self.radius}


class Box(GuardPrimitive):
    """Open axis-aligned box lower < q < upper."""

    kind = "box"

    def __init__(self, lower, upper):
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        if self.lower.shape != self.upper.shape or np.any(self.upper <= self.lower):
            raise GuardError(f"Box needs lower < upper componentwise, got {self.lower}, {self.upper}")

    def signed_distance(self, q) -> float:
        q = np.asarray(q, dtype=float)
        excess = np.maximum(self.lower - q, q - self.upper)
        outside = np.linalg.norm(np.maximum(excess, 0.0))
        return float(outside if outside > 0 else np.max(excess))

    def sample_cloud(self, spacing: float) -> np.ndarray:
        """Grid points at least spacing/2 inside the box."""
        return _grid(self.lower + 0.5 * spacing, self.upper - 0.5 * spacing, spacing)

    def to_dict(self) -> Dict:
        return {"type": self.kind, "lower": self.lower.tolist(), "upper": self.upper.tolist()}


class SphericalPatch(GuardPrimitive):
    """
    Thickened patch of the unit sphere in R³.

    Inside means ‖q‖ within thickness of 1 and the angles
    (φ, θ) = (arccos(z/‖q‖), atan2(x, y)) strictly inside the ranges.
    """

    kind = "spherical_patch"

    def __init__(
        self,
        phi_range: Tuple[float, float] = (0.0, math.pi / 4),
        theta_range: Tuple[float, float] = (0.0, math.pi / 2),
        thickness: float = 0.05,
    ):
        self.phi_range = (float(phi_range[0]), float(phi_range[1]))
        self.theta_range = (float(theta_range[0]), float(theta_range[1]))
        if self.phi_range[0] >= self.phi_range[1] or self.theta_range[0] >= self.theta_range[1]:
            raise GuardError("Spherical patch ranges must be increasing")
        if not thickness > 0:
            raise GuardError(f"Spherical patch thickness must be positive, got {thickness}")
        self.thickness = float(thickness)

    def signed_distance(self, q) -> float:
        q = np.asarray(q, dtype=float)
        rho = float(np.linalg.norm(q))
        if rho == 0.0:
            return 1.0 - self.thickness
        phi = math.acos(max(-1.0, min(1.0, q[2] / rho)))
        theta = math.atan2(q[0], q[1])
        return max(
            abs(rho - 1.0) - self.thickness,
            phi - self.phi_range[1], self.phi_range[0] - phi,
            theta - self.theta_range[1], self.theta_range[0] - theta,
        )

    def sample_cloud(self, spacing: float) -> np.ndarray:
        """Points of the patch on a grid of angular spacing ~ spacing."""
        n_phi = max(2, int(math.ceil((self.phi_range[1] - self.phi_range[0]) / spacing)) + 1)
        n_theta = max(2, int(math.ceil((self.theta_range[1] - self.theta_range[0]) / spacing)) + 1)
        phi, theta = np.meshgrid(
            np.linspace(*self.phi_range, n_phi), np.linspace(*self.theta_range, n_theta), indexing="ij"
        )
        points = patch_embedding(phi.ravel(), theta.ravel())
        return np.unique(np.round(points, 15), axis=0)

    def to_dict(self) -> Dict:
        return {
            "type": self.kind,
            "phi_range": list(self.phi_range),
            "theta_range": list(self.theta_range),
            "thickness": self.thickness,
        }


def primitive_from_dict(data: Dict) -> GuardPrimitive:
    """
    Build a guard primitive from its scenario description.

    Args:
        data: Mapping with a 'type' key and the primitive's parameters

    Returns:
        GuardPrimitive

    Raises:
        GuardError: If the type is unknown or parameters are missing
    """
    if not isinstance(data, dict):
        raise GuardError("Guard primitive must be a mapping")
    kind = data.get("type")
    try:
        if kind == "halfspace":
            return HalfSpace(data["normal"], data["offset"])
        if kind == "ball":
            return Ball(data["center"], data["radius"])
        if kind == "box":
            return Box(data["lower"], data["upper"])
        if kind == "spherical_patch":
            return SphericalPatch(
                tuple(data.get("phi_range", (0.0, math.pi / 4))),
                tuple(data.get("theta_range", (0.0, math.pi / 2))),
                data.get("thickness", 0.05),
            )
    except KeyError as e:
        raise GuardError(f"Guard primitive '{kind}' is missing parameter {e}")
    raise GuardError(
        f"Unknown guard primitive '{kind}' (expected halfspace, ball, box or spherical_patch)"
    )
