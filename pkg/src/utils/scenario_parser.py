"""
Scenario parser.
Parses JSON or YAML scenario files into a validated Scenario.
"""
import os
from typing import Dict, List, Optional

import numpy as np
import yaml

from ..config.settings import ConfigError, Settings, settings_from_dict
from ..models.boundary import BoundaryData
from ..models.hybrid import AffineReset, Edge, Guard, HybridSystem, Knot, KnotSequence, Vertex
from ..models.jet import JetState
from ..models.obstacle import ObstacleCloud
from ..models.potential import PotentialSpec, PotentialSum
from ..models.scenario import AUTO, HybridSpec, ObstacleSpec, Scenario
from .csv_parser import CloudParser, CloudParserError, TrajectoryParser
from .guards import GuardError, primitive_from_dict
from .manifold import ManifoldError, chart_from_name


class ScenarioParserError(Exception):
    """Custom exception for scenario parsing errors."""
    pass


class ScenarioParser:
    """
    Parser for scenario files.

    Expected format (every section optional unless the command needs it):
    ```yaml
    chart: "euclidean:2"          # or "sphere2"
    seed: 0
    sensing_radius: 0.5
    settings: {solver: {warm_start: hermite}}   # overrides conf.yaml
    initial: {q: [0, 0], v: [1, 0], a: [0, 0], j: [0, 0], T: 1.0}
    boundary: {q0: [0, 0], v0: [1, 0], qT: [1, 1], vT: [0, 1], T: 1.0}
    potential:
      - {center: [0.5, 0.5], D: 0.2, tau: 10, k: 2}
    obstacle:
      cloud: "cloud.csv"          # or points: [[...], ...] or centers: [[...]]
      r: 0.02
      r_star: 0.06                # optional
      R: 0.1
      tau: auto                   # or a number
      k: auto                     # or an integer
    reference: "reference.csv"
    hybrid:
      vertices: [{id: A, chart: "euclidean:2"}]
      edges:
        - from: A
          to: B
          guard:
            primitive: {type: ball, center: [1.5, 0], radius: 0.5}
            threshold: 0.0
            spacing: 0.1          # or cloud: "guard.csv" or points: [[...]]
          reset: {matrix: [[1, 0], [0, 1]], offset: [0, 0]}
      knots:
        - {t: 0.0, vertex: A, q: [0, 0], v: [1, 0]}
      guard_targets: {1: [[1.1, 0]]}
    ```
    """

    def __init__(self, scenario_path: str, base_settings: Optional[Settings] = None):
        """
        Initialize scenario parser.

        Args:
            scenario_path: Path to the scenario file
            base_settings: Settings the scenario's overrides apply to
        """
        self.scenario_path = scenario_path
        self.base_settings = base_settings or Settings()
        self.directory = os.path.dirname(os.path.abspath(scenario_path))
        self.data = None

    def _resolve(self, path: str) -> str:
        return path if os.path.isabs(path) else os.path.join(self.directory, path)

    def _vector(self, section: Dict, key: str, where: str) -> np.ndarray:
        if key not in section:
            raise ScenarioParserError(f"Missing '{key}' in {where}")
        try:
            return np.asarray(section[key], dtype=float).reshape(-1)
        except (TypeError, ValueError):
            raise ScenarioParserError(f"'{key}' in {where} must be a list of numbers")

    def parse(self) -> Scenario:
        """
        Parse the scenario file.

        Returns:
            Scenario object

        Raises:
            ScenarioParserError: If the file is unreadable or any section is invalid
        """
        try:
            with open(self.scenario_path, "r") as f:
                self.data = yaml.safe_load(f)
        except FileNotFoundError:
            raise ScenarioParserError(f"Scenario file not found: {self.scenario_path}")
        except yaml.YAMLError as e:
            raise ScenarioParserError(f"Error parsing scenario file: {str(e)}")

        if not isinstance(self.data, dict):
            raise ScenarioParserError("Scenario file must contain a mapping")

        try:
            return self._build()
        except (ValueError, ManifoldError, GuardError, CloudParserError, ConfigError) as e:
            raise ScenarioParserError(str(e))

    def _build(self) -> Scenario:
        data = self.data
        settings = settings_from_dict(data.get("settings"), self.base_settings)
        chart = chart_from_name(data["chart"]) if "chart" in data else None
        sensing_radius = data.get("sensing_radius")
        if sensing_radius is not None:
            sensing_radius = float(sensing_radius)

        scenario = Scenario(
            path=self.scenario_path,
            chart=chart,
            settings=settings,
            seed=int(data.get("seed", 0)),
            sensing_radius=sensing_radius,
            potential=self._parse_potential(data.get("potential") or [], sensing_radius),
        )

        if "initial" in data:
            section = data["initial"]
            q = self._vector(section, "q", "initial")
            scenario.initial = JetState(
                q=q,
                v=self._vector(section, "v", "initial"),
                a=self._vector(section, "a", "initial") if "a" in section else np.zeros_like(q),
                j=self._vector(section, "j", "initial") if "j" in section else np.zeros_like(q),
            )
            if "T" not in section:
                raise ScenarioParserError("Missing 'T' in initial")
            scenario.horizon = float(section["T"])

        if "boundary" in data:
            section = data["boundary"]
            if "T" not in section:
                raise ScenarioParserError("Missing 'T' in boundary")
            scenario.boundary = BoundaryData(
                q0=self._vector(section, "q0", "boundary"),
                v0=self._vector(section, "v0", "boundary"),
                qT=self._vector(section, "qT", "boundary"),
                vT=self._vector(section, "vT", "boundary"),
                T=float(section["T"]),
            )

        if "obstacle" in data:
            scenario.obstacle = self._parse_obstacle(data["obstacle"])

        if "reference" in data:
            scenario.reference = TrajectoryParser(self._resolve(data["reference"])).parse()

        if "hybrid" in data:
            scenario.hybrid = self._parse_hybrid(data["hybrid"])

        if chart is not None:
            for label, dim in self._dimensions(scenario).items():
                if dim != chart.dim:
                    raise ScenarioParserError(
                        f"{label} has dimension {dim}, chart {chart.name} has {chart.dim}"
                    )
        return scenario

    @staticmethod
    def _dimensions(scenario: Scenario) -> Dict[str, int]:
        dims = {}
        if scenario.initial is not None:
            dims["initial"] = scenario.initial.dim
        if scenario.boundary is not None:
            dims["boundary"] = scenario.boundary.dim
        if not scenario.potential.is_empty:
            dims["potential"] = scenario.potential.centers.shape[1]
        if scenario.obstacle is not None:
            if scenario.obstacle.cloud is not None:
                dims["obstacle cloud"] = scenario.obstacle.cloud.dim
            if scenario.obstacle.centers is not None:
                dims["obstacle centers"] = scenario.obstacle.centers.shape[1]
        if scenario.reference is not None:
            dims["reference"] = scenario.reference.dim
        return dims

    def _parse_potential(self, terms: List, sensing_radius: Optional[float]) -> PotentialSum:
        if not isinstance(terms, list):
            raise ScenarioParserError("'potential' must be a list of terms")
        specs = []
        for i, term in enumerate(terms):
            if not isinstance(term, dict):
                raise ScenarioParserError(f"Potential term {i} must be a mapping")
            missing = {"center", "D", "tau", "k"} - set(term)
            if missing:
                raise ScenarioParserError(f"Potential term {i} is missing {sorted(missing)}")
            specs.append(PotentialSpec(center=term["center"], D=term["D"], tau=term["tau"], k=term["k"]))
        return PotentialSum(terms=specs, sensing_radius=sensing_radius)

    def _parse_cloud(self, section: Dict, name: str) -> Optional[ObstacleCloud]:
        if "cloud" in section:
            return CloudParser(self._resolve(section["cloud"]), name=name).parse()
        if "points" in section:
            return ObstacleCloud(points=section["points"], name=name)
        return None

    def _parse_obstacle(self, section: Dict) -> ObstacleSpec:
        if not isinstance(section, dict):
            raise ScenarioParserError("'obstacle' must be a mapping")
        for key in ("r", "R"):
            if key not in section:
                raise ScenarioParserError(f"Missing '{key}' in obstacle")
        tau = section.get("tau", AUTO)
        k = section.get("k", AUTO)
        return ObstacleSpec(
            r=float(section["r"]),
            R=float(section["R"]),
            r_star=float(section["r_star"]) if "r_star" in section else None,
            cloud=self._parse_cloud(section, "obstacle"),
            centers=section.get("centers"),
            tau=tau if tau == AUTO else float(tau),
            k=k if k == AUTO else int(k),
        )

    def _parse_edge(self, section: Dict, vertices: Dict[str, Vertex]) -> Edge:
        for key in ("from", "to", "guard"):
            if key not in section:
                raise ScenarioParserError(f"Missing '{key}' in hybrid edge")
        source, target = str(section["from"]), str(section["to"])
        label = f"{source}->{target}"
        if source not in vertices or target not in vertices:
            raise ScenarioParserError(f"Edge {label} references an unknown vertex")

        guard_section = section["guard"]
        if "primitive" not in guard_section:
            raise ScenarioParserError(f"Missing 'primitive' in guard of {label}")
        primitive = primitive_from_dict(guard_section["primitive"])
        cloud = self._parse_cloud(guard_section, f"guard {label}")
        if cloud is None:
            spacing = float(guard_section.get("spacing", 0.05))
            cloud = ObstacleCloud(points=primitive.sample_cloud(spacing), name=f"guard {label}")
        guard = Guard(cloud=cloud, primitive=primitive, threshold=float(guard_section.get("threshold", 0.0)))

        reset_section = section.get("reset")
        if reset_section is None:
            n_src, n_dst = vertices[source].chart.dim, vertices[target].chart.dim
            if n_src != n_dst:
                raise ScenarioParserError(f"Edge {label} needs an explicit reset between dimensions")
            reset = AffineReset.identity(n_src)
        else:
            n_dst = vertices[target].chart.dim
            reset = AffineReset(
                matrix=reset_section.get("matrix", np.eye(n_dst)),
                offset=reset_section.get("offset", np.zeros(n_dst)),
            )
        return Edge(source=source, target=target, guard=guard, reset=reset)

    def _parse_hybrid(self, section: Dict) -> HybridSpec:
        if not isinstance(section, dict):
            raise ScenarioParserError("'hybrid' must be a mapping")
        vertices = {}
        for v in section.get("vertices") or []:
            if "id" not in v or "chart" not in v:
                raise ScenarioParserError("Every hybrid vertex needs 'id' and 'chart'")
            vertices[str(v["id"])] = Vertex(id=str(v["id"]), chart=chart_from_name(v["chart"]))
        edges = [self._parse_edge(e, vertices) for e in section.get("edges") or []]
        system = HybridSystem(vertices=vertices, edges=edges)

        knots = []
        for i, k in enumerate(section.get("knots") or []):
            for key in ("t", "vertex", "q", "v"):
                if key not in k:
                    raise ScenarioParserError(f"Missing '{key}' in knot {i}")
            knots.append(Knot(t=k["t"], vertex=str(k["vertex"]), q=k["q"], v=k["v"]))
        targets = {int(seg): pts for seg, pts in (section.get("guard_targets") or {}).items()}
        return HybridSpec(system=system, knots=KnotSequence(knots=knots), guard_targets=targets)
