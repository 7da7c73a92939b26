"""Unit tests for scenario parser."""
import os
import tempfile

import numpy as np
import pytest
import yaml

from src.config.settings import Settings
from src.models.scenario import AUTO
from src.utils.scenario_parser import ScenarioParser, ScenarioParserError


def write_scenario(data, directory=None) -> str:
    with tempfile.NamedTemporaryFile(mode='w', delete=False, suffix='.yaml', dir=directory) as f:
        yaml.safe_dump(data, f)
        return f.name


class TestScenarioParser:
    """Test suite for ScenarioParser class."""

    @pytest.fixture
    def full_scenario(self):
        """Scenario touching every single-domain section."""
        return {
            "chart": "euclidean:2",
            "seed": 3,
            "sensing_radius": 0.5,
            "settings": {"solver": {"warm_start": "hermite"}, "integrator": {"step": 0.01}},
            "initial": {"q": [0, 0], "v": [1, 0], "T": 1.0},
            "boundary": {"q0": [0, 0], "v0": [1, 0], "qT": [1, 1], "vT": [0, 1], "T": 2.0},
            "potential": [{"center": [0.5, 0.5], "D": 0.2, "tau": 10, "k": 2}],
            "obstacle": {"points": [[0.5, 0.5], [0.6, 0.5]], "r": 0.02, "R": 0.1, "tau": 50, "k": 3},
        }

    @pytest.fixture
    def scenario_file(self, full_scenario):
        """Temporary scenario file."""
        path = write_scenario(full_scenario)
        yield path
        os.unlink(path)

    def parse(self, data):
        path = write_scenario(data)
        try:
            return ScenarioParser(path).parse()
        finally:
            os.unlink(path)

    def test_parse_full_scenario(self, scenario_file):
        scenario = ScenarioParser(scenario_file).parse()
        assert scenario.chart.dim == 2
        assert scenario.seed == 3
        assert scenario.sensing_radius == 0.5
        assert scenario.horizon == 1.0
        assert np.array_equal(scenario.initial.a, [0.0, 0.0])
        assert scenario.boundary.T == 2.0
        assert len(scenario.potential) == 1
        assert scenario.obstacle.tau == 50.0
        assert scenario.obstacle.k == 3
        assert not scenario.obstacle.auto

    def test_settings_overrides(self, scenario_file):
        scenario = ScenarioParser(scenario_file).parse()
        assert scenario.settings.solver.warm_start == "hermite"
        assert scenario.settings.integrator.step == 0.01
        assert scenario.settings.integrator.method == "rk4"

    def test_overrides_apply_to_base_settings(self, scenario_file):
        base = Settings()
        base.solver.max_evaluations = 50
        scenario = ScenarioParser(scenario_file, base).parse()
        assert scenario.settings.solver.max_evaluations == 50

    def test_obstacle_defaults_to_auto(self, full_scenario):
        full_scenario["obstacle"] = {"points": [[0.5, 0.5]], "r": 0.02, "R": 0.1}
        scenario = self.parse(full_scenario)
        assert scenario.obstacle.tau == AUTO
        assert scenario.obstacle.auto

    def test_cloud_path_relative_to_scenario(self, full_scenario):
        with tempfile.TemporaryDirectory() as tmpdir:
            with open(os.path.join(tmpdir, "cloud.csv"), "w") as f:
                f.write("x0,x1\n0.5,0.5\n0.7,0.5\n")
            full_scenario["obstacle"] = {"cloud": "cloud.csv", "r": 0.02, "R": 0.1}
            path = write_scenario(full_scenario, tmpdir)
            scenario = ScenarioParser(path).parse()
        assert len(scenario.obstacle.cloud) == 2

    def test_missing_file(self):
        with pytest.raises(ScenarioParserError, match="not found"):
            ScenarioParser("nonexistent.yaml").parse()

    def test_not_a_mapping(self):
        path = write_scenario([1, 2, 3])
        try:
            with pytest.raises(ScenarioParserError, match="mapping"):
                ScenarioParser(path).parse()
        finally:
            os.unlink(path)

    def test_invalid_yaml(self):
        with tempfile.NamedTemporaryFile(mode='w', delete=False, suffix='.yaml') as f:
            f.write("chart: [unclosed\n")
            path = f.name
        try:
            with pytest.raises(ScenarioParserError):
                ScenarioParser(path).parse()
        finally:
            os.unlink(path)

    def test_json_scenario(self):
        with tempfile.NamedTemporaryFile(mode='w', delete=False, suffix='.json') as f:
            f.write('{"chart": "sphere2", "initial": {"q": [1.0, 0.0], "v": [0.0, 1.0], "T": 0.5}}')
            path = f.name
        try:
            scenario = ScenarioParser(path).parse()
        finally:
            os.unlink(path)
        assert scenario.chart.name == "sphere2"

    @pytest.mark.parametrize("mutation, message", [
        ({"chart": "torus"}, "chart"),
        ({"initial": {"q": [0, 0], "v": [1, 0]}}, "'T'"),
        ({"initial": {"v": [1, 0], "T": 1.0}}, "'q'"),
        ({"boundary": {"q0": [0, 0], "v0": [1, 0], "qT": [1, 1], "vT": [0, 1]}}, "'T'"),
        ({"boundary": {"q0": [0, 0], "v0": [1, 0], "qT": [1, 1, 1], "vT": [0, 1], "T": 1.0}}, "qT"),
        ({"potential": [{"center": [0, 0], "D": 0.2, "tau": 1}]}, "missing"),
        ({"potential": [{"center": [0, 0], "D": 1.0, "tau": 1, "k": 1}]}, "sensing radius"),
        ({"obstacle": {"points": [[0, 0]], "R": 0.1}}, "'r'"),
        ({"obstacle": {"points": [[0, 0]], "r": 0.05, "r_star": 0.04, "R": 0.1}}, "r_star"),
        ({"obstacle": {"r": 0.02, "R": 0.1}}, "cloud or explicit centers"),
        ({"initial": {"q": [0, 0, 0], "v": [1, 0, 0], "T": 1.0}}, "dimension"),
        ({"settings": {"solver": {"unknown_key": 1}}}, "Unknown configuration key"),
        ({"settings": {"integrator": {"method": "midpoint"}}}, "method"),
    ])
    def test_invalid_sections(self, full_scenario, mutation, message):
        full_scenario.update(mutation)
        with pytest.raises(ScenarioParserError, match=message):
            self.parse(full_scenario)


class TestHybridSection:
    """Test suite for the hybrid section."""

    @pytest.fixture
    def hybrid_scenario(self):
        """Two planar domains joined by a ball guard."""
        return {
            "hybrid": {
                "vertices": [{"id": "A", "chart": "euclidean:2"}, {"id": "B", "chart": "euclidean:2"}],
                "edges": [{
                    "from": "A",
                    "to": "B",
                    "guard": {"primitive": {"type": "ball", "center": [1.5, 0.0], "radius": 0.5},
                              "spacing": 0.1},
                    "reset": {"offset": [-1.5, 0.0]},
                }],
                "knots": [
                    {"t": 0.0, "vertex": "A", "q": [0, 0], "v": [1, 0]},
                    {"t": 2.0, "vertex": "B", "q": [1.5, 0], "v": [1, 0]},
                ],
                "guard_targets": {"0": [[1.1, 0.0]]},
            }
        }

    def parse(self, data):
        path = write_scenario(data)
        try:
            return ScenarioParser(path).parse()
        finally:
            os.unlink(path)

    def test_parse_hybrid(self, hybrid_scenario):
        spec = self.parse(hybrid_scenario).hybrid
        assert set(spec.system.vertices) == {"A", "B"}
        edge = spec.system.edge("A", "B")
        assert np.array_equal(edge.reset.matrix, np.eye(2))
        assert np.array_equal(edge.reset.offset, [-1.5, 0.0])
        assert len(edge.guard.cloud) > 50
        assert len(spec.knots) == 2
        assert spec.guard_targets == {0: [[1.1, 0.0]]}

    def test_identity_reset_by_default(self, hybrid_scenario):
        del hybrid_scenario["hybrid"]["edges"][0]["reset"]
        edge = self.parse(hybrid_scenario).hybrid.system.edge("A", "B")
        assert np.array_equal(edge.reset.offset, [0.0, 0.0])

    def test_explicit_guard_points(self, hybrid_scenario):
        guard = hybrid_scenario["hybrid"]["edges"][0]["guard"]
        guard["points"] = [[1.2, 0.0], [1.3, 0.0]]
        edge = self.parse(hybrid_scenario).hybrid.system.edge("A", "B")
        assert len(edge.guard.cloud) == 2

    def test_halfspace_guard_needs_points(self, hybrid_scenario):
        hybrid_scenario["hybrid"]["edges"][0]["guard"] = {
            "primitive": {"type": "halfspace", "normal": [1, 0], "offset": 1.0}
        }
        with pytest.raises(ScenarioParserError, match="cannot sample"):
            self.parse(hybrid_scenario)

    def test_unknown_edge_vertex(self, hybrid_scenario):
        hybrid_scenario["hybrid"]["edges"][0]["to"] = "Z"
        with pytest.raises(ScenarioParserError, match="unknown vertex"):
            self.parse(hybrid_scenario)

    def test_knot_times_validated(self, hybrid_scenario):
        hybrid_scenario["hybrid"]["knots"][0]["t"] = 0.5
        with pytest.raises(ScenarioParserError, match="first knot time"):
            self.parse(hybrid_scenario)

    def test_missing_knot_field(self, hybrid_scenario):
        del hybrid_scenario["hybrid"]["knots"][1]["v"]
        with pytest.raises(ScenarioParserError, match="'v'"):
            self.parse(hybrid_scenario)

    def test_reset_between_dimensions_needs_matrix(self, hybrid_scenario):
        hybrid_scenario["hybrid"]["vertices"][1]["chart"] = "euclidean:3"
        del hybrid_scenario["hybrid"]["edges"][0]["reset"]
        with pytest.raises(ScenarioParserError, match="explicit reset"):
            self.parse(hybrid_scenario)
