"""
Potential models.
Terms of the compactly supported repulsive family and their sums.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np


@dataclass
class PotentialSpec:
    """
    One repulsive bump centered at a point obstacle.

    Attributes:
        center: Chart point of the obstacle
        D: Support radius
        tau: Height parameter (the value at the center)
        k: Sharpness exponent
    """
    center: np.ndarray
    D: float
    tau: float
    k: int

    def __post_init__(self):
        """Validate potential parameters."""
        self.center = np.asarray(self.center, dtype=float).reshape(-1)
        if self.center.shape[0] == 0 or not np.all(np.isfinite(self.center)):
            raise ValueError(f"PotentialSpec: invalid center {self.center}")
        if not self.D > 0:
            raise ValueError(f"PotentialSpec: support radius D must be positive, got {self.D}")
        if not self.tau > 0:
            raise ValueError(f"PotentialSpec: height tau must be positive, got {self.tau}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"PotentialSpec: exponent k must be a positive integer, got {self.k}")
        self.D = float(self.D)
        self.tau = float(self.tau)
        self.k = int(self.k)

    def to_dict(self) -> Dict:
        """Serializable view as in scenario files."""
        return {"center": self.center.tolist(), "D": self.D, "tau": self.tau, "k": self.k}

    def __repr__(self) -> str:
        """String representation of the term."""
        return f"PotentialSpec(center={self.center.tolist()}, D={self.D}, tau={self.tau}, k={self.k})"


@dataclass
class PotentialSum:
    """
    Pointwise sum of potential terms. An empty sum is V ≡ 0.

    Attributes:
        terms: Ordered list of terms
        sensing_radius: Optional sensing radius h; every term must have D ≤ h
    """
    terms: List[PotentialSpec] = field(default_factory=list)
    sensing_radius: Optional[float] = None

    def __post_init__(self):
        """Validate the sum."""
        self.terms = list(self.terms)
        dims = {t.center.shape[0] for t in self.terms}
        if len(dims) > 1:
            raise ValueError(f"PotentialSum: terms have mixed dimensions {sorted(dims)}")
        if self.sensing_radius is not None:
            if not self.sensing_radius > 0:
                raise ValueError(
                    f"PotentialSum: sensing radius must be positive, got {self.sensing_radius}"
                )
            for i, term in enumerate(self.terms):
                if term.D > self.sensing_radius:
                    raise ValueError(
                        f"PotentialSum: term {i} has support radius D={term.D} "
                        f"exceeding the sensing radius h={self.sensing_radius}"
                    )

    @property
    def is_empty(self) -> bool:
        """True when V ≡ 0."""
        return len(self.terms) == 0

    @property
    def centers(self) -> np.ndarray:
        """Term centers stacked as an (m, n) array."""
        if self.is_empty:
            return np.zeros((0, 0))
        return np.vstack([t.center for t in self.terms])

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __add__(self, other: "PotentialSum") -> "PotentialSum":
        radii = [h for h in (self.sensing_radius, other.sensing_radius) if h is not None]
        return PotentialSum(
            terms=self.terms + other.terms,
            sensing_radius=min(radii) if radii else None,
        )

    def to_list(self) -> List[Dict]:
        """Serializable view as in scenario files."""
        return [t.to_dict() for t in self.terms]
