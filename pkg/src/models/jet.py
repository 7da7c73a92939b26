"""
Jet state and trajectory models.
A trajectory stores position, velocity, covariant acceleration and covariant
jerk at every integration sample.
"""
from dataclasses import dataclass
from typing import List

import numpy as np


@dataclass
class JetState:
    """
    Third-order jet of a curve at one instant.

    Attributes:
        q: Chart point
        v: Velocity dq/dt
        a: Covariant acceleration Dq̇/dt
        j: Covariant jerk D²q̇/dt²
    """
    q: np.ndarray
    v: np.ndarray
    a: np.ndarray
    j: np.ndarray

    def __post_init__(self):
        """Validate jet data."""
        self.q = np.asarray(self.q, dtype=float).reshape(-1)
        self.v = np.asarray(self.v, dtype=float).reshape(-1)
        self.a = np.asarray(self.a, dtype=float).reshape(-1)
        self.j = np.asarray(self.j, dtype=float).reshape(-1)
        n = self.q.shape[0]
        if n == 0:
            raise ValueError("JetState: empty position vector")
        for label, vec in (("v", self.v), ("a", self.a), ("j", self.j)):
            if vec.shape[0] != n:
                raise ValueError(
                    f"JetState: '{label}' has dimension {vec.shape[0]}, expected {n}"
                )
        if not all(np.all(np.isfinite(x)) for x in (self.q, self.v, self.a, self.j)):
            raise ValueError("JetState: all entries must be finite")

    @property
    def dim(self) -> int:
        """Get chart dimension."""
        return self.q.shape[0]

    def to_vector(self) -> np.ndarray:
        """Stack (q, v, a, j) into a single 4n vector."""
        return np.concatenate([self.q, self.v, self.a, self.j])

    @classmethod
    def from_vector(cls, y: np.ndarray) -> "JetState":
        """Split a 4n vector into a jet state."""
        q, v, a, j = np.split(np.asarray(y, dtype=float), 4)
        return cls(q=q, v=v, a=a, j=j)

    def __repr__(self) -> str:
        """String representation of the jet."""
        return f"JetState(q={self.q}, v={self.v}, a={self.a}, j={self.j})"


@dataclass
class Trajectory:
    """
    Sampled solution of the fourth-order equation.

    Attributes:
        times: Sample times, strictly increasing from 0
        q: Positions, shape (N+1, n)
        v: Velocities, shape (N+1, n)
        a: Covariant accelerations, shape (N+1, n)
        j: Covariant jerks, shape (N+1, n)
        chart_name: Registry name of the chart the samples live on
        method: Integration method that produced the samples ("euler" or "rk4")
    """
    times: np.ndarray
    q: np.ndarray
    v: np.ndarray
    a: np.ndarray
    j: np.ndarray
    chart_name: str = ""
    method: str = "rk4"

    def __post_init__(self):
        """Validate trajectory data."""
        self.times = np.asarray(self.times, dtype=float).reshape(-1)
        self.q, self.v, self.a, self.j = (
            np.atleast_2d(np.asarray(x, dtype=float)) for x in (self.q, self.v, self.a, self.j)
        )
        m = self.times.shape[0]
        if m < 1:
            raise ValueError("Trajectory: needs at least one sample")
        if self.times[0] != 0.0:
            raise ValueError(f"Trajectory: times must start at 0, got {self.times[0]}")
        if m > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("Trajectory: times must be strictly increasing")
        for label, arr in (("q", self.q), ("v", self.v), ("a", self.a), ("j", self.j)):
            if arr.shape != self.q.shape or arr.shape[0] != m:
                raise ValueError(
                    f"Trajectory: '{label}' has shape {arr.shape}, expected ({m}, {self.q.shape[1]})"
                )

    @property
    def dim(self) -> int:
        """Get chart dimension."""
        return self.q.shape[1]

    @property
    def num_samples(self) -> int:
        """Get number of stored samples."""
        return self.times.shape[0]

    @property
    def duration(self) -> float:
        """Get final time T."""
        return float(self.times[-1])

    def state_at(self, index: int) -> JetState:
        """
        Get the jet stored at a sample.

        Args:
            index: Sample index (negative indices allowed)

        Returns:
            JetState at that sample
        """
        return JetState(
            q=self.q[index].copy(), v=self.v[index].copy(),
            a=self.a[index].copy(), j=self.j[index].copy(),
        )

    @property
    def initial_state(self) -> JetState:
        """Get the jet at t = 0."""
        return self.state_at(0)

    @property
    def final_state(self) -> JetState:
        """Get the jet at t = T."""
        return self.state_at(-1)

    @property
    def states(self) -> List[JetState]:
        """Get all samples as jet states."""
        return [self.state_at(i) for i in range(self.num_samples)]

    def __repr__(self) -> str:
        """String representation of the trajectory."""
        return (
            f"Trajectory({self.chart_name}, {self.num_samples} samples, "
            f"T={self.duration:g}, method={self.method})"
        )
