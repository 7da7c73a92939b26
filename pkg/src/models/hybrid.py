"""
Hybrid system models.
Vertices with charts, edges with guards and affine resets, knots, and the
piecewise trajectories produced by the interpolation procedure.
"""
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..utils.guards import GuardPrimitive
from ..utils.manifold import ManifoldChart
from .jet import Trajectory
from .obstacle import ObstacleCloud


@dataclass
class Guard:
    """
    Guard set of an edge.

    Attributes:
        cloud: Finite sample of the guard (drives avoidance and targets)
        primitive: Region whose signed distance decides membership
        threshold: q is inside iff primitive.signed_distance(q) < threshold
    """
    cloud: ObstacleCloud
    primitive: GuardPrimitive
    threshold: float = 0.0

    def contains(self, q) -> bool:
        """Membership test driving crossing detection."""
        return self.primitive.signed_distance(q) < self.threshold


@dataclass
class AffineReset:
    """
    Reset map q⁺ = M q + b, v⁺ = M v.

    Attributes:
        matrix: M, shape (n_target, n_source)
        offset: b, shape (n_target,)
    """
    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        """Validate reset coefficients."""
        self.matrix = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        self.offset = np.asarray(self.offset, dtype=float).reshape(-1)
        if self.offset.shape[0] != self.matrix.shape[0]:
            raise ValueError(
                f"AffineReset: offset has length {self.offset.shape[0]}, "
                f"matrix has {self.matrix.shape[0]} rows"
            )

    @classmethod
    def identity(cls, n: int) -> "AffineReset":
        return cls(matrix=np.eye(n), offset=np.zeros(n))

    def apply_point(self, q) -> np.ndarray:
        return self.matrix @ np.asarray(q, dtype=float) + self.offset

    def apply(self, q, v) -> Tuple[np.ndarray, np.ndarray]:
        """Image (q⁺, v⁺) of a pre-impact state."""
        return self.apply_point(q), self.matrix @ np.asarray(v, dtype=float)


@dataclass
class Vertex:
    """
    Domain of the hybrid system.

    Attributes:
        id: Vertex identifier
        chart: Chart of the domain
    """
    id: str
    chart: ManifoldChart


@dataclass
class Edge:
    """
    Directed edge with its guard and reset.

    Attributes:
        source: Source vertex id
        target: Target vertex id
        guard: Guard in the source domain
        reset: Reset into the target domain
    """
    source: str
    target: str
    guard: Guard
    reset: AffineReset

    @property
    def key(self) -> Tuple[str, str]:
        return (self.source, self.target)

    @property
    def label(self) -> str:
        return f"{self.source}->{self.target}"


@dataclass
class HybridSystem:
    """
    Directed graph of domains, guards and resets.

    Construction requires the graph to be weakly connected, i.e. connected once
    edge directions are ignored, so one-way chains are valid systems. Directed
    reachability is a property of a knot sequence, not of the system:
    interpolation checks that every knot vertex can be reached from the one
    before it before planning any segment.

    Attributes:
        vertices: Vertices keyed by id
        edges: Directed edges (at most one per ordered pair)
    """
    vertices: Dict[str, Vertex]
    edges: List[Edge] = field(default_factory=list)

    def __post_init__(self):
        """Validate graph structure and dimensions."""
        if not self.vertices:
            raise ValueError("HybridSystem: at least one vertex is required")
        seen = set()
        for edge in self.edges:
            for end in (edge.source, edge.target):
                if end not in self.vertices:
                    raise ValueError(f"HybridSystem: edge {edge.label} references unknown vertex '{end}'")
            if edge.key in seen:
                raise ValueError(f"HybridSystem: duplicate edge {edge.label}")
            seen.add(edge.key)
            n_src = self.vertices[edge.source].chart.dim
            n_dst = self.vertices[edge.target].chart.dim
            if edge.reset.matrix.shape != (n_dst, n_src):
                raise ValueError(
                    f"HybridSystem: reset of {edge.label} has shape {edge.reset.matrix.shape}, "
                    f"expected ({n_dst}, {n_src})"
                )
            if edge.guard.cloud.dim != n_src:
                raise ValueError(f"HybridSystem: guard cloud of {edge.label} has the wrong dimension")
        if not self._weakly_connected():
            raise ValueError("HybridSystem: graph is not connected")

    def _weakly_connected(self) -> bool:
        """Every vertex is reached from any other when edges are taken both ways."""
        adjacency = {v: set() for v in self.vertices}
        for edge in self.edges:
            adjacency[edge.source].add(edge.target)
            adjacency[edge.target].add(edge.source)
        start = next(iter(self.vertices))
        reached = {start}
        queue = deque([start])
        while queue:
            for nxt in adjacency[queue.popleft()]:
                if nxt not in reached:
                    reached.add(nxt)
                    queue.append(nxt)
        return len(reached) == len(self.vertices)

    def chart(self, vertex: str) -> ManifoldChart:
        return self.vertices[vertex].chart

    def outgoing(self, vertex: str) -> List[Edge]:
        """Edges leaving a vertex, in declaration order."""
        return [e for e in self.edges if e.source == vertex]

    def edge(self, source: str, target: str) -> Optional[Edge]:
        for e in self.edges:
            if e.source == source and e.target == target:
                return e
        return None


@dataclass
class Knot:
    """
    Prescribed state at a prescribed time.

    Attributes:
        t: Knot time
        vertex: Domain the knot lives in
        q: Position
        v: Velocity
    """
    t: float
    vertex: str
    q: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        """Validate knot data."""
        self.q = np.asarray(self.q, dtype=float).reshape(-1)
        self.v = np.asarray(self.v, dtype=float).reshape(-1)
        if self.q.shape != self.v.shape:
            raise ValueError(f"Knot at t={self.t}: q and v have different dimensions")
        self.t = float(self.t)


@dataclass
class KnotSequence:
    """
    Knots at strictly increasing times starting at 0.

    Attributes:
        knots: At least two knots
    """
    knots: List[Knot]

    def __post_init__(self):
        """Validate knot times."""
        if len(self.knots) < 2:
            raise ValueError("KnotSequence: at least two knots are required")
        if self.knots[0].t != 0.0:
            raise ValueError(f"KnotSequence: first knot time must be 0, got {self.knots[0].t}")
        for a, b in zip(self.knots, self.knots[1:]):
            if not b.t > a.t:
                raise ValueError(f"KnotSequence: times must increase strictly ({a.t} then {b.t})")

    @property
    def T(self) -> float:
        return self.knots[-1].t

    def __len__(self) -> int:
        return len(self.knots)

    def __iter__(self):
        return iter(self.knots)


@dataclass
class Piece:
    """
    Smooth piece of a hybrid trajectory.

    Attributes:
        vertex: Domain of the piece
        trajectory: Samples in local time starting at 0
        start_time: Absolute start time
        kind: "case1", "leg" (ends on a guard) or "final"
        segment: Index of the knot pair the piece belongs to
    """
    vertex: str
    trajectory: Trajectory
    start_time: float
    kind: str = "case1"
    segment: int = 0

    @property
    def end_time(self) -> float:
        return self.start_time + self.trajectory.duration

    @property
    def absolute_times(self) -> np.ndarray:
        return self.start_time + self.trajectory.times


@dataclass
class ImpactRecord:
    """
    Guard contact and reset.

    Attributes:
        time: Absolute impact time τ*
        edge: (source, target) of the edge taken
        pre_q, pre_v: State on the guard (belongs to the pre-impact piece)
        post_q, post_v: Reset image
    """
    time: float
    edge: Tuple[str, str]
    pre_q: np.ndarray
    pre_v: np.ndarray
    post_q: np.ndarray
    post_v: np.ndarray

    def to_dict(self) -> Dict:
        return {
            "time": self.time,
            "edge": list(self.edge),
            "pre_q": self.pre_q.tolist(),
            "pre_v": self.pre_v.tolist(),
            "post_q": self.post_q.tolist(),
            "post_v": self.post_v.tolist(),
        }


@dataclass
class HybridTrajectory:
    """
    Pieces tiling [0, T] and the impacts between them.

    Attributes:
        pieces: Pieces in time order
        impacts: Impacts in time order
    """
    pieces: List[Piece] = field(default_factory=list)
    impacts: List[ImpactRecord] = field(default_factory=list)

    @property
    def duration(self) -> float:
        return self.pieces[-1].end_time if self.pieces else 0.0

    def tiling_gaps(self) -> List[float]:
        """Differences between consecutive piece end and start times."""
        return [b.start_time - a.end_time for a, b in zip(self.pieces, self.pieces[1:])]


@dataclass
class ZenoReport:
    """
    Outcome of the reset-image separation check.

    Attributes:
        passed: True when every reset image keeps the margin
        margin: Required separation μ
        offending: (edge label, sample index, guard edge label, distance) tuples
        min_separation: Smallest distance found
    """
    passed: bool
    margin: float
    offending: List[Tuple[str, int, str, float]] = field(default_factory=list)
    min_separation: float = float("inf")

    def to_dict(self) -> Dict:
        return {
            "passed": self.passed,
            "margin": self.margin,
            "min_separation": self.min_separation,
            "offending": [
                {"edge": e, "sample": i, "guard": g, "distance": d} for e, i, g, d in self.offending
            ],
        }
