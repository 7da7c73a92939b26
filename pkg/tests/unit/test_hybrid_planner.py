"""Unit tests for hybrid interpolation."""
import numpy as np
import pytest

from src.config.settings import GuardAvoidanceConfig, HybridConfig, IntegratorConfig, ShootingOptions
from src.models.hybrid import (
    AffineReset,
    Edge,
    Guard,
    HybridSystem,
    Knot,
    KnotSequence,
    Vertex,
)
from src.models.jet import JetState
from src.models.obstacle import ObstacleCloud
from src.models.potential import PotentialSum
from src.solver import hybrid_planner
from src.solver.hybrid_planner import (
    CrossingPreconditionError,
    HybridPlanner,
    HybridValidationError,
    SegmentFailure,
    boundary_residual,
    detect_crossing,
    find_path,
    validate_zeno,
)
from src.solver.integrator import action_value, integrate
from src.utils.guards import Ball, HalfSpace
from src.utils.manifold import euclidean_chart

EMPTY = PotentialSum(terms=[])
OPTIONS = ShootingOptions(warm_start="hermite")
INTEGRATOR = IntegratorConfig(method="rk4", step=1e-2)


def ball_guard(center=(1.5, 0.0), radius=0.5, spacing=0.1) -> Guard:
    primitive = Ball(center=list(center), radius=radius)
    return Guard(cloud=ObstacleCloud(points=primitive.sample_cloud(spacing)), primitive=primitive)


def translation(dx: float) -> AffineReset:
    return AffineReset(matrix=np.eye(2), offset=[dx, 0.0])


def planar_vertices(*ids):
    return {v: Vertex(id=v, chart=euclidean_chart(2)) for v in ids}


@pytest.fixture
def two_domain():
    """A → B through a ball guard with identity reset."""
    return HybridSystem(
        vertices=planar_vertices("A", "B"),
        edges=[Edge("A", "B", ball_guard(), AffineReset.identity(2))],
    )


@pytest.fixture
def two_domain_knots():
    """One same-vertex segment followed by one guard crossing."""
    return KnotSequence(knots=[
        Knot(t=0.0, vertex="A", q=[-1.0, 0.0], v=[1.0, 0.0]),
        Knot(t=1.0, vertex="A", q=[0.0, 0.0], v=[1.0, 0.0]),
        Knot(t=3.0, vertex="B", q=[3.0, 0.0], v=[1.0, 0.0]),
    ])


@pytest.fixture
def chain():
    """A → B → C with translating resets."""
    return HybridSystem(
        vertices=planar_vertices("A", "B", "C"),
        edges=[
            Edge("A", "B", ball_guard(), translation(-1.5)),
            Edge("B", "C", ball_guard(), translation(-1.5)),
        ],
    )


@pytest.fixture
def planner_factory():
    """Planner with hermite warm starts and a coarse step."""
    def make(system, **kwargs):
        return HybridPlanner(system, HybridConfig(**kwargs), OPTIONS, INTEGRATOR)
    return make


class TestHybridSystem:
    """Test suite for HybridSystem validation."""

    def test_unknown_vertex(self):
        with pytest.raises(ValueError, match="unknown vertex"):
            HybridSystem(vertices=planar_vertices("A"), edges=[Edge("A", "Z", ball_guard(), translation(0.0))])

    def test_duplicate_edge(self):
        edges = [Edge("A", "B", ball_guard(), translation(0.0)), Edge("A", "B", ball_guard(), translation(1.0))]
        with pytest.raises(ValueError, match="duplicate"):
            HybridSystem(vertices=planar_vertices("A", "B"), edges=edges)

    def test_reset_shape(self):
        bad = AffineReset(matrix=np.eye(3)[:, :2], offset=np.zeros(3))
        with pytest.raises(ValueError, match="reset"):
            HybridSystem(vertices=planar_vertices("A", "B"), edges=[Edge("A", "B", ball_guard(), bad)])

    def test_disconnected(self):
        with pytest.raises(ValueError, match="not connected"):
            HybridSystem(vertices=planar_vertices("A", "B"), edges=[])

    def test_one_way_chain_is_connected(self, chain):
        assert set(chain.vertices) == {"A", "B", "C"}
        assert chain.outgoing("C") == []

    def test_knot_sequence_rules(self):
        with pytest.raises(ValueError):
            KnotSequence(knots=[Knot(t=0.0, vertex="A", q=[0.0], v=[0.0])])
        with pytest.raises(ValueError):
            KnotSequence(knots=[Knot(t=0.5, vertex="A", q=[0.0], v=[0.0]),
                                Knot(t=1.0, vertex="A", q=[0.0], v=[0.0])])
        with pytest.raises(ValueError):
            KnotSequence(knots=[Knot(t=0.0, vertex="A", q=[0.0], v=[0.0]),
                                Knot(t=0.0, vertex="A", q=[1.0], v=[0.0])])


class TestDetectCrossing:
    """Test suite for detect_crossing."""

    @pytest.fixture
    def line(self):
        s0 = JetState([0.0, 0.0], [2.0, 0.0], [0.0, 0.0], [0.0, 0.0])
        return integrate(euclidean_chart(2), EMPTY, s0, 1.0, 0.1, "rk4")

    @pytest.fixture
    def wall(self):
        return Guard(cloud=ObstacleCloud(points=[[1.5, 0.0]]), primitive=HalfSpace(normal=[1.0, 0.0], offset=1.0))

    def test_crossing_time(self, line, wall):
        hit = detect_crossing(euclidean_chart(2), line, wall)
        assert hit is not None
        time, state = hit
        assert abs(time - 0.5) < 1e-8
        assert wall.contains(state.q)

    def test_no_crossing(self, line):
        far = Guard(cloud=ObstacleCloud(points=[[5.0, 0.0]]), primitive=HalfSpace(normal=[1.0, 0.0], offset=4.0))
        assert detect_crossing(euclidean_chart(2), line, far) is None

    def test_starting_inside_raises(self, line):
        behind = Guard(cloud=ObstacleCloud(points=[[0.0, 0.0]]), primitive=HalfSpace(normal=[-1.0, 0.0], offset=-0.5))
        with pytest.raises(CrossingPreconditionError):
            detect_crossing(euclidean_chart(2), line, behind)


class TestBoundaryResidual:
    """Test suite for boundary_residual."""

    def test_cubic(self):
        s0 = JetState([0.0], [0.0], [0.0], [6.0])
        traj = integrate(euclidean_chart(1), EMPTY, s0, 1.0, 1e-2)
        assert boundary_residual(euclidean_chart(1), traj) == pytest.approx(18.0)

    def test_geodesic_vanishes(self):
        traj = integrate(euclidean_chart(1), EMPTY, JetState([0.0], [1.0], [0.0], [0.0]), 1.0, 0.1)
        assert boundary_residual(euclidean_chart(1), traj) == 0.0


class TestZeno:
    """Test suite for validate_zeno."""

    def test_identity_self_loop_fails(self):
        system = HybridSystem(vertices=planar_vertices("A"),
                              edges=[Edge("A", "A", ball_guard((0.0, 0.0)), AffineReset.identity(2))])
        report = validate_zeno(system, 0.05)
        assert not report.passed
        assert report.min_separation == 0.0
        assert report.offending[0][0] == "A->A"

    def test_translated_self_loop_passes(self):
        system = HybridSystem(vertices=planar_vertices("A"),
                              edges=[Edge("A", "A", ball_guard((0.0, 0.0)), translation(1.3))])
        report = validate_zeno(system, 0.05)
        assert report.passed
        assert report.min_separation == pytest.approx(0.5)

    def test_bounce_close_to_guard(self):
        guard = Guard(cloud=ObstacleCloud(points=[[1.0], [1.1], [1.2]]), primitive=HalfSpace([1.0], 1.0))
        vertices = {"A": Vertex(id="A", chart=euclidean_chart(1))}
        near = HybridSystem(vertices, [Edge("A", "A", guard, AffineReset([[-1.0]], [1.975]))])
        report = validate_zeno(near, 0.05)
        assert not report.passed
        assert len(report.offending) == 1
        assert report.offending[0][1] == 0
        assert report.offending[0][3] == pytest.approx(0.025)

        far = HybridSystem(vertices, [Edge("A", "A", guard, AffineReset([[-1.0]], [1.9]))])
        assert validate_zeno(far, 0.05).passed

    def test_chain_passes(self, chain):
        report = validate_zeno(chain, 0.05)
        assert report.passed
        assert report.min_separation == pytest.approx(0.7)

    def test_non_positive_margin(self, chain):
        with pytest.raises(HybridValidationError):
            validate_zeno(chain, 0.0)


class TestFindPath:
    """Test suite for find_path."""

    def test_chain_path(self, chain):
        assert find_path(chain, "A", "C") == ["A", "B", "C"]
        assert find_path(chain, "B", "B") == ["B"]

    def test_unreachable(self, chain):
        with pytest.raises(HybridValidationError):
            find_path(chain, "C", "A")


class TestHybridPlanner:
    """Test suite for HybridPlanner.interpolate."""

    def test_two_domain_single_impact(self, two_domain, two_domain_knots, planner_factory):
        result = planner_factory(two_domain).interpolate(two_domain_knots)
        assert len(result.impacts) == 1
        impact = result.impacts[0]
        assert impact.edge == ("A", "B")
        assert impact.time == pytest.approx(1.9098, abs=1e-3)
        assert [p.kind for p in result.pieces] == ["case1", "leg", "final"]
        assert result.duration == pytest.approx(3.0, abs=1e-9)

    def test_pieces_tile_horizon(self, two_domain, two_domain_knots, planner_factory):
        result = planner_factory(two_domain).interpolate(two_domain_knots)
        assert result.pieces[0].start_time == 0.0
        assert all(abs(gap) < 1e-12 for gap in result.tiling_gaps())

    def test_reset_consistency(self, chain, planner_factory):
        knots = KnotSequence(knots=[
            Knot(t=0.0, vertex="A", q=[0.0, 0.0], v=[1.0, 0.0]),
            Knot(t=3.0, vertex="C", q=[1.0, 0.0], v=[1.0, 0.0]),
        ])
        result = planner_factory(chain).interpolate(knots)
        assert len(result.impacts) == 2
        assert [i.edge for i in result.impacts] == [("A", "B"), ("B", "C")]
        assert result.impacts[0].time == pytest.approx(0.9098, abs=1e-3)
        assert result.impacts[1].time == pytest.approx(1.8483, abs=2e-3)
        for k, impact in enumerate(result.impacts):
            before, after = result.pieces[k], result.pieces[k + 1]
            assert np.array_equal(before.trajectory.q[-1], impact.pre_q)
            assert np.array_equal(after.trajectory.q[0], impact.post_q)
            assert np.array_equal(after.trajectory.v[0], impact.post_v)
            assert np.allclose(impact.post_q, impact.pre_q + [-1.5, 0.0])
            assert after.start_time == impact.time

    def test_impacts_on_guard_boundary(self, two_domain, two_domain_knots, planner_factory):
        result = planner_factory(two_domain).interpolate(two_domain_knots)
        primitive = two_domain.edges[0].guard.primitive
        sd = primitive.signed_distance(result.impacts[0].pre_q)
        assert -1e-6 < sd < 0

    def test_knots_are_hit(self, chain, planner_factory):
        knots = KnotSequence(knots=[
            Knot(t=0.0, vertex="A", q=[0.0, 0.0], v=[1.0, 0.0]),
            Knot(t=3.0, vertex="C", q=[1.0, 0.0], v=[1.0, 0.0]),
        ])
        result = planner_factory(chain).interpolate(knots)
        assert np.allclose(result.pieces[-1].trajectory.q[-1], [1.0, 0.0], atol=1e-4)
        assert np.allclose(result.pieces[-1].trajectory.v[-1], [1.0, 0.0], atol=1e-4)

    def test_explicit_guard_target(self, two_domain, two_domain_knots, planner_factory):
        result = planner_factory(two_domain).interpolate(two_domain_knots, {1: [[1.2, 0.0]]})
        assert len(result.impacts) == 1

    def test_single_vertex_is_one_piece_per_segment(self, planner_factory):
        system = HybridSystem(vertices=planar_vertices("A"))
        knots = KnotSequence(knots=[
            Knot(t=0.0, vertex="A", q=[0.0, 0.0], v=[1.0, 0.0]),
            Knot(t=1.0, vertex="A", q=[1.0, 1.0], v=[0.0, 1.0]),
            Knot(t=2.0, vertex="A", q=[0.0, 0.0], v=[1.0, 0.0]),
        ])
        result = planner_factory(system, workers=2).interpolate(knots)
        assert len(result.pieces) == 2
        assert not result.impacts
        assert np.allclose(result.pieces[-1].trajectory.q[-1], result.pieces[0].trajectory.q[0])

    def test_zeno_failure_blocks_planning(self, planner_factory):
        system = HybridSystem(vertices=planar_vertices("A"),
                              edges=[Edge("A", "A", ball_guard((0.0, 0.0)), AffineReset.identity(2))])
        knots = KnotSequence(knots=[
            Knot(t=0.0, vertex="A", q=[1.0, 0.0], v=[0.0, 1.0]),
            Knot(t=1.0, vertex="A", q=[1.0, 1.0], v=[0.0, 1.0]),
        ])
        with pytest.raises(HybridValidationError, match="Zeno"):
            planner_factory(system).interpolate(knots)

    def test_knot_inside_guard(self, two_domain, planner_factory):
        knots = KnotSequence(knots=[
            Knot(t=0.0, vertex="A", q=[1.5, 0.0], v=[1.0, 0.0]),
            Knot(t=1.0, vertex="B", q=[3.0, 0.0], v=[1.0, 0.0]),
        ])
        with pytest.raises(HybridValidationError, match="inside guard"):
            planner_factory(two_domain).interpolate(knots)

    def test_unreachable_knot_fails_before_planning(self, two_domain, planner_factory, monkeypatch):
        planner = planner_factory(two_domain)
        shots = []
        monkeypatch.setattr(planner, "_shoot", lambda *args, **kwargs: shots.append(args))
        knots = KnotSequence(knots=[
            Knot(t=0.0, vertex="A", q=[0.0, 0.0], v=[1.0, 0.0]),
            Knot(t=1.0, vertex="B", q=[3.0, 0.0], v=[1.0, 0.0]),
            Knot(t=2.0, vertex="A", q=[0.0, 0.0], v=[1.0, 0.0]),
        ])
        with pytest.raises(HybridValidationError, match="No directed path from vertex 'B'"):
            planner.interpolate(knots)
        assert shots == []

    def test_missed_guard_is_segment_failure(self, two_domain, planner_factory):
        knots = KnotSequence(knots=[
            Knot(t=0.0, vertex="A", q=[0.0, 0.0], v=[1.0, 0.0]),
            Knot(t=2.0, vertex="B", q=[3.0, 0.0], v=[1.0, 0.0]),
        ])
        with pytest.raises(SegmentFailure) as info:
            planner_factory(two_domain).interpolate(knots, {0: [[0.5, 1.0]]})
        assert info.value.segment_index == 0
        assert "never reaches" in str(info.value)

    def test_periodic_knots_close_in_state(self, planner_factory):
        system = HybridSystem(vertices=planar_vertices("A"))
        loop = Knot(t=0.0, vertex="A", q=[0.0, 0.0], v=[1.0, 0.0])
        knots = KnotSequence(knots=[
            loop,
            Knot(t=1.0, vertex="A", q=[1.0, 1.0], v=[-1.0, 0.5]),
            Knot(t=2.5, vertex="A", q=[-0.5, 1.0], v=[0.0, -1.0]),
            Knot(t=4.0, vertex="A", q=loop.q, v=loop.v),
        ])
        result = planner_factory(system).interpolate(knots)
        first, last = result.pieces[0].trajectory, result.pieces[-1].trajectory
        assert result.duration == pytest.approx(4.0)
        assert np.allclose(last.q[-1], first.q[0], atol=1e-4)
        assert np.allclose(last.v[-1], first.v[0], atol=1e-4)

    def test_case2_on_single_vertex_path_is_case1(self, two_domain, planner_factory):
        planner = planner_factory(two_domain)
        start = Knot(t=0.0, vertex="A", q=[-1.0, 0.0], v=[1.0, 0.0])
        end = Knot(t=1.0, vertex="A", q=[0.0, 0.0], v=[1.0, 0.0])
        pieces, impacts = planner.plan_segment_case2(["A"], start, end, segment_index=3)
        assert impacts == []
        assert len(pieces) == 1
        assert pieces[0].kind == "case1"
        assert pieces[0].segment == 3
        direct = planner.plan_segment_case1("A", start, end, 3)
        assert np.allclose(pieces[0].trajectory.q, direct.trajectory.q)

    def test_piece_action_stable_under_time_refinement(self):
        system = HybridSystem(vertices=planar_vertices("A"))
        start = Knot(t=0.0, vertex="A", q=[0.0, 0.0], v=[1.0, 0.0])
        end = Knot(t=1.0, vertex="A", q=[1.0, 1.0], v=[0.0, 1.0])
        actions = []
        for step in (1e-2, 5e-3, 2.5e-3):
            planner = HybridPlanner(system, HybridConfig(), OPTIONS, IntegratorConfig(method="rk4", step=step))
            piece = planner.plan_segment_case1("A", start, end)
            actions.append(action_value(euclidean_chart(2), EMPTY, piece.trajectory))
        assert actions[1] == pytest.approx(actions[0], rel=1e-3)
        assert actions[2] == pytest.approx(actions[1], rel=1e-3)
        assert abs(actions[2] - actions[1]) <= abs(actions[1] - actions[0]) + 1e-12


class TestSameVertexPieces:
    """Test suite for guard avoidance within same-vertex pieces."""

    def test_clear_reference_uses_certified_parameters(self, two_domain, planner_factory, monkeypatch):
        selected = []
        select = hybrid_planner.select_parameters

        def recording(*args, **kwargs):
            selected.append(select(*args, **kwargs))
            return selected[-1]

        monkeypatch.setattr(hybrid_planner, "select_parameters", recording)
        start = Knot(t=0.0, vertex="A", q=[-1.0, 0.0], v=[1.0, 0.0])
        end = Knot(t=1.0, vertex="A", q=[0.0, 0.0], v=[1.0, 0.0])
        piece = planner_factory(two_domain).plan_segment_case1("A", start, end)
        assert len(selected) == 1
        tau, k, certificate = selected[0]
        assert certificate.satisfied
        assert np.allclose(piece.trajectory.q[:, 1], 0.0, atol=1e-9)
        assert np.allclose(piece.trajectory.q[-1], [0.0, 0.0], atol=1e-6)

    def test_piece_is_pushed_off_guard_on_its_straight_path(self):
        # every cloud point lies above the chord, the ball still reaches below it
        guard = ball_guard(center=(1.5, 0.07), radius=0.1, spacing=0.04)
        system = HybridSystem(vertices=planar_vertices("A", "B"),
                              edges=[Edge("A", "B", guard, AffineReset.identity(2))])
        config = HybridConfig(guard_avoidance=GuardAvoidanceConfig(r=0.02, R=0.2))
        planner = HybridPlanner(system, config, ShootingOptions(warm_start="hermite", max_restarts=3), INTEGRATOR)
        start = Knot(t=0.0, vertex="A", q=[0.0, 0.0], v=[1.0, 0.0])
        end = Knot(t=3.0, vertex="A", q=[3.0, 0.0], v=[1.0, 0.0])
        assert guard.contains([1.5, 0.0])

        piece = planner.plan_segment_case1("A", start, end)
        traj = piece.trajectory
        assert not any(guard.contains(q) for q in traj.q)
        assert detect_crossing(euclidean_chart(2), traj, guard) is None
        assert np.allclose(traj.q[-1], [3.0, 0.0], atol=1e-3)
        assert np.allclose(traj.v[-1], [1.0, 0.0], atol=1e-3)

    def test_failure_reports_every_attempt(self, two_domain):
        planner = HybridPlanner(two_domain, HybridConfig(),
                                ShootingOptions(warm_start="hermite", max_evaluations=20), INTEGRATOR)
        start = Knot(t=0.0, vertex="A", q=[0.0, 0.0], v=[1.0, 0.0])
        end = Knot(t=3.0, vertex="A", q=[3.0, 0.0], v=[1.0, 0.0])
        with pytest.raises(SegmentFailure) as info:
            planner.plan_segment_case1("A", start, end, 2)
        labels = [label for label, _, _ in info.value.diagnostics["attempts"]]
        assert labels[0] == "reference"
        assert len(labels) == 1 + HybridConfig().guard_avoidance.continuation_steps
        assert info.value.segment_index == 2


class TestGuardTargetSearch:
    """Test suite for optimize_guard_target."""

    def test_refined_grid_never_worse(self, two_domain, planner_factory):
        planner = planner_factory(two_domain)
        edge = two_domain.edges[0]
        cloud = edge.guard.cloud.points
        fine = cloud[np.abs(cloud[:, 1]) <= 0.1 + 1e-9]
        coarse = fine[::2]
        best_coarse, res_coarse, _ = planner.optimize_guard_target("A", [0.0, 0.0], [1.0, 0.0], edge, 1.0, coarse)
        best_fine, res_fine, scores = planner.optimize_guard_target("A", [0.0, 0.0], [1.0, 0.0], edge, 1.0, fine)
        assert res_fine <= res_coarse
        assert len(scores) == len(fine)
        assert res_fine == min(score for _, score in scores)
