"""
Interpolation for systems with impulse effects.

Consecutive knots on the same vertex are joined by one smooth piece that
avoids every guard out of that vertex. Knots on different vertices are joined
along a shortest graph path: each leg shoots toward a point of the next guard
while avoiding the other guards, is clipped at its first crossing, and the
reset restarts the next leg from the image state. The final leg reaches the
knot over the remaining time.
"""
import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from ..config.settings import AvoidanceConfig, HybridConfig, IntegratorConfig, ShootingOptions
from ..models.boundary import BoundaryData, ShootingResult
from ..models.hybrid import (
    Edge,
    HybridSystem,
    HybridTrajectory,
    ImpactRecord,
    Knot,
    KnotSequence,
    Piece,
    ZenoReport,
)
from ..models.jet import JetState, Trajectory
from ..models.obstacle import ToleranceBands
from ..models.potential import PotentialSum
from ..utils.manifold import ManifoldChart
from .avoidance import AvoidanceError, build_avoidance_potential, select_parameters
from .covering import cover_obstacle, cover_radii
from .integrator import advance, clip
from .shooting import ShootingSolver

logger = logging.getLogger(__name__)


class HybridPlanningError(Exception):
    """Custom exception for hybrid interpolation errors."""
    pass


class HybridValidationError(HybridPlanningError):
    """Raised when the system or the knots violate a structural precondition."""
    pass


class CrossingPreconditionError(HybridPlanningError):
    """Raised when a trajectory starts inside the guard being watched."""
    pass


class SegmentFailure(HybridPlanningError):
    """Raised when a knot-to-knot segment cannot be planned."""

    def __init__(self, segment_index: int, message: str, diagnostics: Optional[Dict] = None):
        self.segment_index = int(segment_index)
        self.diagnostics = diagnostics or {}
        super().__init__(f"Segment {segment_index}: {message}")


def _cloud_distances(chart: ManifoldChart, samples: np.ndarray, points: np.ndarray) -> np.ndarray:
    if chart.is_flat:
        return cdist(samples, points).min(axis=1)
    return np.array([np.min(chart.distances(points, s)) for s in samples])


def validate_zeno(system: HybridSystem, margin: float) -> ZenoReport:
    """
    Check that reset images of guard samples stay away from the next guards.

    For every edge (i, j) and every cloud sample x of its guard, the image
    Δ(x) must lie at distance ≥ margin from every guard out of j; an image
    inside a guard counts as distance 0.

    Args:
        system: Hybrid system
        margin: Required separation μ > 0

    Returns:
        ZenoReport listing every offending (edge, sample, guard) triple
    """
    if not margin > 0:
        raise HybridValidationError(f"Zeno margin must be positive, got {margin}")
    offending = []
    smallest = float("inf")
    for edge in system.edges:
        chart = system.chart(edge.target)
        images = np.array([edge.reset.apply_point(x) for x in edge.guard.cloud.points])
        for nxt in system.outgoing(edge.target):
            dists = _cloud_distances(chart, images, nxt.guard.cloud.points)
            for idx, image in enumerate(images):
                if nxt.guard.contains(image):
                    dists[idx] = 0.0
            smallest = min(smallest, float(np.min(dists)))
            for idx in np.nonzero(dists < margin)[0]:
                offending.append((edge.label, int(idx), nxt.label, float(dists[idx])))

    report = ZenoReport(passed=not offending, margin=float(margin), offending=offending,
                        min_separation=smallest)
    if not report.passed:
        logger.warning(f"Zeno check failed: {len(offending)} reset images closer than {margin:g}")
    return report


def find_path(system: HybridSystem, source: str, target: str) -> List[str]:
    """
    Shortest directed vertex path by breadth-first search.

    Returns:
        Vertex ids from source to target inclusive ([source] when equal)

    Raises:
        HybridValidationError: If target is unreachable from source
    """
    parents: Dict[str, Optional[str]] = {source: None}
    queue = deque([source])
    while queue:
        current = queue.popleft()
        if current == target:
            break
        for edge in system.outgoing(current):
            if edge.target not in parents:
                parents[edge.target] = current
                queue.append(edge.target)
    if target not in parents:
        raise HybridValidationError(f"No directed path from vertex '{source}' to '{target}'")
    path = [target]
    while parents[path[-1]] is not None:
        path.append(parents[path[-1]])
    return path[::-1]


def detect_crossing(
    chart: ManifoldChart,
    traj: Trajectory,
    guard,
    potential: Optional[PotentialSum] = None,
    tolerance: float = 1e-9,
) -> Optional[Tuple[float, JetState]]:
    """
    First entry of a trajectory into a guard.

    The first sample testing inside brackets the entry together with the
    sample before it; the bracket is refined by bisection, re-integrating a
    partial step from the outside sample with the trajectory's own method.
    Entries and exits between two samples go unnoticed.

    Args:
        chart: Chart of the trajectory
        traj: Sampled trajectory
        guard: Object with a contains(q) predicate
        potential: Potential the trajectory was integrated with
        tolerance: Width of the final time bracket

    Returns:
        (time, state) with the state inside the guard, or None

    Raises:
        CrossingPreconditionError: If the first sample is already inside
    """
    if guard.contains(traj.q[0]):
        raise CrossingPreconditionError(f"Trajectory starts inside the guard at q={traj.q[0]}")
    potential = potential or PotentialSum(terms=[])
    inside = [i for i in range(1, traj.num_samples) if guard.contains(traj.q[i])]
    if not inside:
        return None

    i = inside[0]
    base_time = float(traj.times[i - 1])
    base = traj.state_at(i - 1).to_vector()
    n = chart.dim
    lo, hi = 0.0, float(traj.times[i] - traj.times[i - 1])
    y_hi = traj.state_at(i).to_vector()
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        y_mid = advance(chart, potential, base, mid, traj.method)
        if guard.contains(y_mid[:n]):
            hi, y_hi = mid, y_mid
        else:
            lo = mid
    return base_time + hi, JetState.from_vector(y_hi)


def boundary_residual(chart: ManifoldChart, traj: Trajectory) -> float:
    """
    g(a(T), a(T)) − g(v(T), j(T)) at the last sample.

    Zero characterizes a free-endpoint-optimal guard hit.
    """
    q, v, a, j = traj.q[-1], traj.v[-1], traj.a[-1], traj.j[-1]
    return float(chart.inner(q, a, a) - chart.inner(q, v, j))


def _chord_target(points: np.ndarray, start: np.ndarray, end: np.ndarray) -> np.ndarray:
    """Cloud point nearest the coordinate segment start→end; ties go to the point nearest start."""
    chord = end - start
    length2 = float(chord @ chord)
    if length2 == 0.0:
        s = np.zeros(points.shape[0])
    else:
        s = np.clip((points - start) @ chord / length2, 0.0, 1.0)
    foot = start + s[:, None] * chord
    dist = np.round(np.linalg.norm(points - foot, axis=1), 12)
    order = np.lexsort((s, dist))
    return points[order[0]].copy()


class HybridPlanner:
    """
    Glues smooth pieces across domains into a hybrid trajectory.
    """

    def __init__(
        self,
        system: HybridSystem,
        config: Optional[HybridConfig] = None,
        options: Optional[ShootingOptions] = None,
        integrator: Optional[IntegratorConfig] = None,
        seed: Optional[int] = 0,
        avoidance: Optional[AvoidanceConfig] = None,
    ):
        """
        Initialize the planner.

        Args:
            system: Hybrid system
            config: Tolerances, Zeno margin and guard-avoidance parameters
            options: Shooting settings for every piece
            integrator: Integration method and step
            seed: Seed for the guard covers
            avoidance: Grids and margin for certified guard parameters
        """
        self.system = system
        self.config = config or HybridConfig()
        self.options = options or ShootingOptions()
        self.integrator = integrator or IntegratorConfig()
        self.seed = seed
        self.avoidance = avoidance or AvoidanceConfig()
        self._cover_centers: Dict[Tuple[str, str], np.ndarray] = {}

    def _guard_centers(self, edge: Edge) -> np.ndarray:
        if edge.key not in self._cover_centers:
            ga = self.config.guard_avoidance
            cover = cover_obstacle(
                self.system.chart(edge.source), edge.guard.cloud, ga.r, ga.R,
                seed=self.seed, verify=False,
            )
            self._cover_centers[edge.key] = cover.centers
        return self._cover_centers[edge.key]

    def guard_potential(
        self,
        vertex: str,
        exclude: Optional[Tuple[str, str]] = None,
        tau: Optional[float] = None,
    ) -> PotentialSum:
        """
        Potential avoiding every guard out of a vertex except `exclude`.

        Args:
            vertex: Vertex id
            exclude: Edge key whose guard may be crossed
            tau: Height (default: the configured guard-avoidance tau)

        Returns:
            PotentialSum over the cover centers of the remaining guards
        """
        centers = [self._guard_centers(e) for e in self.system.outgoing(vertex) if e.key != exclude]
        ga = self.config.guard_avoidance
        if not centers:
            return PotentialSum(terms=[])
        return build_avoidance_potential(np.vstack(centers), ga.R, tau or ga.tau, ga.k)

    def _shoot(
        self,
        vertex: str,
        potential: PotentialSum,
        bd: BoundaryData,
        x0: Optional[np.ndarray] = None,
    ) -> ShootingResult:
        solver = ShootingSolver(self.system.chart(vertex), potential, self.options, self.integrator)
        return solver.solve(bd, x0=x0)

    def _crossings(
        self,
        vertex: str,
        traj: Trajectory,
        potential: PotentialSum,
        exclude: Optional[Tuple[str, str]] = None,
    ) -> List[Tuple[str, float]]:
        chart = self.system.chart(vertex)
        found = []
        for edge in self.system.outgoing(vertex):
            if edge.key == exclude:
                continue
            hit = detect_crossing(chart, traj, edge.guard, potential, self.config.crossing_tolerance)
            if hit is not None:
                found.append((edge.label, hit[0]))
        return found

    def _guard_bands(self) -> ToleranceBands:
        ga = self.config.guard_avoidance
        _, r_star = cover_radii(ga.r, ga.R)
        return ToleranceBands(r=ga.r, r_star=r_star, R=ga.R)

    def _certified_piece(
        self,
        vertex: str,
        centers: np.ndarray,
        bd: BoundaryData,
        reference: ShootingResult,
    ) -> Optional[Tuple[ShootingResult, PotentialSum]]:
        """Shoot with certified (τ, k) around a reference that clears every guard cover."""
        chart = self.system.chart(vertex)
        try:
            tau, k, _ = select_parameters(
                chart, reference.trajectory, centers, self._guard_bands(),
                chart.norm(bd.q0, bd.v0), bd.T, config=self.avoidance,
            )
        except AvoidanceError as e:
            logger.info(f"No certified guard parameters on '{vertex}': {str(e)}")
            return None
        potential = build_avoidance_potential(centers, self.config.guard_avoidance.R, tau, k)
        jets = np.concatenate([reference.a0, reference.j0])
        return self._shoot(vertex, potential, bd, jets), potential

    def _piece_crossings(
        self,
        vertex: str,
        result: ShootingResult,
        potential: PotentialSum,
    ) -> Optional[List[Tuple[str, float]]]:
        """None when the piece did not converge, otherwise its guard crossings."""
        if not result.converged:
            return None
        return self._crossings(vertex, result.trajectory, potential)

    def plan_segment_case1(
        self,
        vertex: str,
        start: Knot,
        end: Knot,
        segment_index: int = 0,
    ) -> Piece:
        """
        Single piece between two knots of the same vertex avoiding every guard.

        The V ≡ 0 piece is solved first. When it stays farther than R from
        every guard cover center, (τ, k) are selected by certificate. Otherwise
        the guard potential is continued over the configured height ladder,
        each height warm-started from the previous jets, and the first
        converged crossing-free piece is kept.

        Args:
            vertex: Vertex of both knots
            start: Knot at t_n
            end: Knot at t_{n+1}
            segment_index: Index used in failures

        Returns:
            Piece starting at start.t

        Raises:
            SegmentFailure: On non-convergence or a guard crossing
        """
        bd = BoundaryData(q0=start.q, v0=start.v, qT=end.q, vT=end.v, T=end.t - start.t)
        chart = self.system.chart(vertex)
        edges = self.system.outgoing(vertex)
        empty = PotentialSum(terms=[])

        reference = self._shoot(vertex, empty, bd)
        tried = [("reference", reference)]
        result: Optional[ShootingResult] = None
        last_crossings = self._piece_crossings(vertex, reference, empty) or []

        if not edges:
            if reference.converged:
                result = reference
        else:
            if reference.converged:
                centers = np.vstack([self._guard_centers(e) for e in edges])
                clearance = float(np.min(_cloud_distances(chart, reference.trajectory.q, centers)))
                if clearance > self.config.guard_avoidance.R:
                    certified = self._certified_piece(vertex, centers, bd, reference)
                    if certified is not None:
                        tried.append(("certified", certified[0]))
                        found = self._piece_crossings(vertex, *certified)
                        if found == []:
                            result = certified[0]
                        elif found:
                            last_crossings = found

            guess = np.concatenate([reference.a0, reference.j0])
            for tau in self.config.guard_avoidance.tau_ladder:
                if result is not None:
                    break
                potential = self.guard_potential(vertex, tau=tau)
                candidate = self._shoot(vertex, potential, bd, guess)
                tried.append((f"tau={tau:g}", candidate))
                found = self._piece_crossings(vertex, candidate, potential)
                if found is None:
                    continue
                guess = np.concatenate([candidate.a0, candidate.j0])
                if found:
                    last_crossings = found
                else:
                    result = candidate

        if result is None:
            diagnostics = {
                "attempts": [(label, r.residual, r.evaluations) for label, r in tried],
                "residual": min(r.residual for _, r in tried),
                "crossings": last_crossings,
            }
            if last_crossings:
                raise SegmentFailure(
                    segment_index, f"piece on vertex '{vertex}' crosses guard {last_crossings[0][0]}",
                    diagnostics,
                )
            raise SegmentFailure(
                segment_index, f"shooting did not converge on vertex '{vertex}'", diagnostics,
            )

        logger.info(
            f"Segment {segment_index}: single piece on '{vertex}' via {tried[-1][0]} "
            f"(residual {result.residual:.2e})"
        )
        return Piece(vertex=vertex, trajectory=result.trajectory, start_time=start.t,
                     kind="case1", segment=segment_index)

    def _leg(
        self,
        vertex: str,
        q_start: np.ndarray,
        v_start: np.ndarray,
        edge: Edge,
        eta: np.ndarray,
        horizon: float,
    ) -> Tuple[Trajectory, Optional[Tuple[float, JetState]], PotentialSum]:
        """Shoot toward a guard point and locate the first target-guard crossing."""
        chart = self.system.chart(vertex)
        target_velocity = -chart.log_at(eta, q_start) / horizon
        potential = self.guard_potential(vertex, exclude=edge.key)
        bd = BoundaryData(q0=q_start, v0=v_start, qT=eta, vT=target_velocity, T=horizon)
        traj = self._shoot(vertex, potential, bd).trajectory
        hit = detect_crossing(chart, traj, edge.guard, potential, self.config.crossing_tolerance)
        return traj, hit, potential

    def optimize_guard_target(
        self,
        vertex: str,
        q_start,
        v_start,
        edge: Edge,
        horizon: float,
        candidates: Sequence,
    ) -> Tuple[np.ndarray, float, List[Tuple[np.ndarray, float]]]:
        """
        Pick the guard point whose clipped leg best meets the free-endpoint condition.

        Args:
            vertex: Vertex of the leg
            q_start, v_start: Leg start state
            edge: Edge whose guard is the target
            horizon: Leg horizon
            candidates: Guard points to try

        Returns:
            (best point, its |boundary residual|, all (point, |residual|) tried)

        Raises:
            HybridPlanningError: If no candidate leg reaches the guard
        """
        q_start = np.asarray(q_start, dtype=float)
        v_start = np.asarray(v_start, dtype=float)
        chart = self.system.chart(vertex)
        scores = []
        for eta in np.atleast_2d(np.asarray(candidates, dtype=float)):
            traj, hit, _ = self._leg(vertex, q_start, v_start, edge, eta, horizon)
            if hit is None:
                continue
            clipped = clip(traj, hit[0], hit[1])
            scores.append((eta.copy(), abs(boundary_residual(chart, clipped))))
        if not scores:
            raise HybridPlanningError(f"No candidate leg on '{vertex}' reaches guard {edge.label}")
        best = min(scores, key=lambda item: item[1])
        logger.debug(f"Guard target {best[0]} on {edge.label}: |residual|={best[1]:.4g}")
        return best[0], best[1], scores

    def plan_segment_case2(
        self,
        path: List[str],
        start: Knot,
        end: Knot,
        guard_targets: Optional[Sequence] = None,
        segment_index: int = 0,
    ) -> Tuple[List[Piece], List[ImpactRecord]]:
        """
        Pieces and impacts carrying the state along a vertex path.

        Each of the m − 1 legs has horizon α = (t_{n+1} − t_n)/m, targets a
        point of the next guard with velocity pointing away from the leg start,
        and is clipped at its first crossing. The final leg reaches the end
        knot over the remaining time.

        Args:
            path: Vertex ids from start.vertex to end.vertex
            start: Knot at t_n
            end: Knot at t_{n+1}
            guard_targets: Optional guard point per leg (default: cloud point
                nearest the chord to the end knot)
            segment_index: Index used in failures

        Returns:
            (pieces, impacts)

        Raises:
            SegmentFailure: If a leg misses its guard, crosses another guard,
                or a reset lands inside a guard
        """
        if len(path) < 2:
            return [self.plan_segment_case1(start.vertex, start, end, segment_index)], []
        m = len(path)
        duration = end.t - start.t
        alpha = duration / m
        if guard_targets is not None and len(guard_targets) != m - 1:
            raise HybridValidationError(f"Expected {m - 1} guard targets, got {len(guard_targets)}")

        pieces: List[Piece] = []
        impacts: List[ImpactRecord] = []
        q, v = start.q.copy(), start.v.copy()
        clock = start.t

        for leg_index, (vertex, nxt) in enumerate(zip(path[:-1], path[1:])):
            edge = self.system.edge(vertex, nxt)
            if guard_targets is not None:
                eta = np.asarray(guard_targets[leg_index], dtype=float)
            else:
                eta = _chord_target(edge.guard.cloud.points, q, end.q)
            try:
                traj, hit, potential = self._leg(vertex, q, v, edge, eta, alpha)
            except CrossingPreconditionError as e:
                raise SegmentFailure(segment_index, f"leg on '{vertex}' starts inside guard {edge.label}",
                                     {"error": str(e)})
            if hit is None:
                raise SegmentFailure(
                    segment_index, f"leg on '{vertex}' never reaches guard {edge.label}",
                    {"target": eta.tolist(), "horizon": alpha},
                )
            tau, pre = hit
            clipped = clip(traj, tau, pre)
            others = self._crossings(vertex, clipped, potential, exclude=edge.key)
            if others:
                raise SegmentFailure(
                    segment_index, f"leg on '{vertex}' crosses non-target guard {others[0][0]}",
                    {"crossings": others},
                )
            pieces.append(Piece(vertex=vertex, trajectory=clipped, start_time=clock,
                                kind="leg", segment=segment_index))
            clock += tau

            q, v = edge.reset.apply(pre.q, pre.v)
            blocking = [e.label for e in self.system.outgoing(nxt) if e.guard.contains(q)]
            if blocking:
                raise SegmentFailure(
                    segment_index, f"reset of {edge.label} lands inside guard {blocking[0]}",
                    {"post_q": q.tolist()},
                )
            impacts.append(ImpactRecord(time=clock, edge=edge.key, pre_q=pre.q, pre_v=pre.v,
                                        post_q=q, post_v=v))
            logger.debug(f"Segment {segment_index}: impact on {edge.label} at t={clock:.9g}")

        remaining = end.t - clock
        if not remaining > 0:
            raise SegmentFailure(segment_index, "no time left for the final leg", {"impact_time": clock})
        final_vertex = path[-1]
        potential = self.guard_potential(final_vertex)
        bd = BoundaryData(q0=q, v0=v, qT=end.q, vT=end.v, T=remaining)
        result = self._shoot(final_vertex, potential, bd)
        if not result.converged:
            raise SegmentFailure(
                segment_index, f"final leg on '{final_vertex}' did not converge",
                {"residual": result.residual, "evaluations": result.evaluations},
            )
        crossings = self._crossings(final_vertex, result.trajectory, potential)
        if crossings:
            raise SegmentFailure(
                segment_index, f"final leg on '{final_vertex}' crosses guard {crossings[0][0]}",
                {"crossings": crossings},
            )
        pieces.append(Piece(vertex=final_vertex, trajectory=result.trajectory, start_time=clock,
                            kind="final", segment=segment_index))
        logger.info(
            f"Segment {segment_index}: path {'->'.join(path)} with {len(impacts)} impacts"
        )
        return pieces, impacts

    def _check_knots(self, knots: KnotSequence):
        for n, knot in enumerate(knots):
            if knot.vertex not in self.system.vertices:
                raise HybridValidationError(f"Knot {n} references unknown vertex '{knot.vertex}'")
            chart = self.system.chart(knot.vertex)
            if knot.q.shape[0] != chart.dim:
                raise HybridValidationError(
                    f"Knot {n} has dimension {knot.q.shape[0]}, vertex '{knot.vertex}' has {chart.dim}"
                )
            chart.check_point(knot.q)
            for edge in self.system.outgoing(knot.vertex):
                if edge.guard.contains(knot.q):
                    raise HybridValidationError(f"Knot {n} lies inside guard {edge.label}")

    def _check_tiling(self, knots: KnotSequence, segments: List[List[Piece]]):
        """Knot positions and velocities reached at the end of each segment."""
        tol = self.config.knot_tolerance
        for n, pieces in enumerate(segments):
            knot = knots.knots[n + 1]
            last = pieces[-1]
            chart = self.system.chart(last.vertex)
            dq = chart.distance(last.trajectory.q[-1], knot.q)
            dv = float(np.linalg.norm(last.trajectory.v[-1] - knot.v))
            if dq >= tol or dv >= tol or abs(last.end_time - knot.t) > tol:
                raise SegmentFailure(
                    n, f"knot {n + 1} missed by {dq:.3e} in position and {dv:.3e} in velocity",
                    {"position_error": dq, "velocity_error": dv},
                )

    def interpolate(
        self,
        knots: KnotSequence,
        guard_targets: Optional[Dict[int, Sequence]] = None,
    ) -> HybridTrajectory:
        """
        Hybrid trajectory through every knot.

        Args:
            knots: Knot sequence
            guard_targets: Optional per-segment guard points for Case-2 segments

        Returns:
            HybridTrajectory whose pieces tile [0, T]

        Raises:
            HybridValidationError: If the Zeno check or a knot precondition fails
            SegmentFailure: If a segment cannot be planned
        """
        zeno = validate_zeno(self.system, self.config.zeno_margin)
        if not zeno.passed:
            first = zeno.offending[0]
            raise HybridValidationError(
                f"Zeno check failed: reset of {first[0]} lands {first[3]:.3g} from guard {first[2]}"
            )
        self._check_knots(knots)
        guard_targets = guard_targets or {}

        pairs = list(zip(knots.knots[:-1], knots.knots[1:]))
        paths = [find_path(self.system, a.vertex, b.vertex) for a, b in pairs]
        single = [n for n, path in enumerate(paths) if len(path) == 1]

        # covers are built up front so concurrent segments share the cache
        for vertex in {pairs[n][0].vertex for n in single}:
            self.guard_potential(vertex)

        segments: Dict[int, List[Piece]] = {}
        events: Dict[int, List[ImpactRecord]] = {}
        if self.config.workers > 1 and len(single) > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as executor:
                futures = {
                    n: executor.submit(self.plan_segment_case1, pairs[n][0].vertex, *pairs[n], n)
                    for n in single
                }
                for n, future in futures.items():
                    segments[n] = [future.result()]
        else:
            for n in single:
                segments[n] = [self.plan_segment_case1(pairs[n][0].vertex, *pairs[n], n)]

        for n, path in enumerate(paths):
            if n in segments:
                continue
            segments[n], events[n] = self.plan_segment_case2(
                path, pairs[n][0], pairs[n][1], guard_targets.get(n), n,
            )

        ordered = [segments[n] for n in range(len(pairs))]
        self._check_tiling(knots, ordered)
        result = HybridTrajectory(
            pieces=[piece for pieces in ordered for piece in pieces],
            impacts=[impact for n in range(len(pairs)) for impact in events.get(n, [])],
        )
        logger.info(
            f"Interpolated {len(knots)} knots: {len(result.pieces)} pieces, {len(result.impacts)} impacts"
        )
        return result
