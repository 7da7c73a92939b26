"""
Boundary-value models.
Two-point boundary data and the outcome of a shooting run.
"""
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from .jet import Trajectory


@dataclass
class BoundaryData:
    """
    Position and velocity prescribed at both ends of [0, T].

    Attributes:
        q0: Initial point
        v0: Initial velocity
        qT: Final point
        vT: Final velocity
        T: Horizon
    """
    q0: np.ndarray
    v0: np.ndarray
    qT: np.ndarray
    vT: np.ndarray
    T: float

    def __post_init__(self):
        """Validate boundary data."""
        self.q0, self.v0, self.qT, self.vT = (
            np.asarray(x, dtype=float).reshape(-1) for x in (self.q0, self.v0, self.qT, self.vT)
        )
        n = self.q0.shape[0]
        if n == 0:
            raise ValueError("BoundaryData: empty q0")
        for label, vec in (("v0", self.v0), ("qT", self.qT), ("vT", self.vT)):
            if vec.shape[0] != n:
                raise ValueError(f"BoundaryData: '{label}' has dimension {vec.shape[0]}, expected {n}")
        if not all(np.all(np.isfinite(x)) for x in (self.q0, self.v0, self.qT, self.vT)):
            raise ValueError("BoundaryData: all entries must be finite")
        if not self.T > 0:
            raise ValueError(f"BoundaryData: horizon T must be positive, got {self.T}")
        self.T = float(self.T)

    @property
    def dim(self) -> int:
        return self.q0.shape[0]

    def to_dict(self) -> Dict:
        return {
            "q0": self.q0.tolist(),
            "v0": self.v0.tolist(),
            "qT": self.qT.tolist(),
            "vT": self.vT.tolist(),
            "T": self.T,
        }


@dataclass
class ShootingResult:
    """
    Best initial jets found by the simplex search.

    Attributes:
        trajectory: Trajectory integrated from the best jets
        residual: Terminal mismatch of that trajectory
        a0: Initial covariant acceleration
        j0: Initial covariant jerk
        evaluations: Objective evaluations spent
        converged: residual < tolerance
        action: Action J of the trajectory
        restarts: Simplex restarts used
        history: Best residual after each simplex iteration
    """
    trajectory: Trajectory
    residual: float
    a0: np.ndarray
    j0: np.ndarray
    evaluations: int
    converged: bool
    action: float = 0.0
    restarts: int = 0
    history: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict:
        """Summary used in the JSON report."""
        return {
            "residual": self.residual,
            "evaluations": self.evaluations,
            "converged": bool(self.converged),
            "a0": np.asarray(self.a0).tolist(),
            "j0": np.asarray(self.j0).tolist(),
            "action": self.action,
            "restarts": self.restarts,
        }

    def __repr__(self) -> str:
        status = "converged" if self.converged else "not converged"
        return f"ShootingResult({status}, residual={self.residual:.3e}, evaluations={self.evaluations})"
