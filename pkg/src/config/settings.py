"""
Settings loader for conf.yaml.
Parses solver defaults into typed dataclasses with validation.
"""
import os
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import yaml


DEFAULT_CONFIG_PATH = "conf.yaml"

METHODS = ("euler", "rk4")
WARM_STARTS = ("zero", "hermite")
SEARCH_COORDINATES = ("aim", "jets")


class ConfigError(Exception):
    """Custom exception for configuration errors."""
    pass


@dataclass
class IntegratorConfig:
    """Fixed-step integrator settings."""
    method: str = "rk4"
    step: float = 1e-3

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"Integrator method must be one of {METHODS}, got '{self.method}'")
        if self.step <= 0:
            raise ValueError(f"Integrator step must be positive, got {self.step}")


@dataclass
class ShootingOptions:
    """
    Downhill-simplex shooting settings.

    Attributes:
        tolerance: Converged iff the terminal residual is below this value
        stop_tolerance: Residual at which the simplex stops polishing
        max_evaluations: Objective evaluation budget
        initial_step: Per-coordinate perturbation of the initial simplex
        reflection, expansion, contraction, shrink: Nelder-Mead coefficients
        max_restarts: Restarts from the best vertex on stagnation
        position_weight, velocity_weight: Residual weights
        warm_start: "zero" jets or the "hermite" flat cubic jets
        coordinates: Simplex coordinates, "aim" (end state of the flat cubic with the
            trial jets) or the raw "jets"
        workers: Threads for shrink-step evaluations
    """
    tolerance: float = 1e-6
    stop_tolerance: float = 1e-12
    max_evaluations: int = 6000
    initial_step: float = 0.1
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    max_restarts: int = 1
    position_weight: float = 1.0
    velocity_weight: float = 1.0
    warm_start: str = "zero"
    coordinates: str = "aim"
    workers: int = 1

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("Shooting tolerance must be positive")
        if self.stop_tolerance <= 0 or self.stop_tolerance > self.tolerance:
            raise ValueError("stop_tolerance must be positive and not exceed tolerance")
        if self.max_evaluations < 1:
            raise ValueError("max_evaluations must be at least 1")
        if self.initial_step <= 0:
            raise ValueError("initial_step must be positive")
        if not (0 < self.contraction < 1 and 0 < self.shrink < 1):
            raise ValueError("contraction and shrink coefficients must lie in (0, 1)")
        if self.reflection <= 0 or self.expansion <= self.reflection:
            raise ValueError("Need reflection > 0 and expansion > reflection")
        if self.max_restarts < 0:
            raise ValueError("max_restarts must be non-negative")
        if self.position_weight < 0 or self.velocity_weight < 0:
            raise ValueError("Residual weights must be non-negative")
        if self.warm_start not in WARM_STARTS:
            raise ValueError(f"warm_start must be one of {WARM_STARTS}")
        if self.coordinates not in SEARCH_COORDINATES:
            raise ValueError(f"coordinates must be one of {SEARCH_COORDINATES}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass
class AvoidanceConfig:
    """Certificate, parameter-selection and covering settings."""
    margin: float = 0.1
    k_grid_max: int = 64
    tau_grid: List[float] = field(
        default_factory=lambda: [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000,
                                 2000, 5000, 10000, 100000, 1000000]
    )
    directions: int = 64
    rejection_epsilon: float = 1e-3
    monte_carlo_samples: int = 10000

    def __post_init__(self):
        if self.margin < 0:
            raise ValueError("Certificate margin must be non-negative")
        if self.k_grid_max < 1:
            raise ValueError("k_grid_max must be at least 1")
        if not self.tau_grid or any(t <= 0 for t in self.tau_grid):
            raise ValueError("tau_grid must be a non-empty list of positive values")
        self.tau_grid = sorted(float(t) for t in self.tau_grid)
        if self.directions < 1:
            raise ValueError("directions must be at least 1")


@dataclass
class GuardAvoidanceConfig:
    """
    Bands and potential parameters used to keep pieces off guards.

    Attributes:
        r, R: Tolerance and safety radii of the guard covers
        tau: Largest height tried when a piece has to be pushed off a guard
        k: Sharpness exponent of those potentials
        continuation_steps: Heights tried, tau·10^-(steps-1) up to tau
    """
    r: float = 0.02
    R: float = 0.1
    tau: float = 10.0
    k: int = 2
    continuation_steps: int = 4

    def __post_init__(self):
        if not (0 < self.r < self.R / 2):
            raise ValueError(f"Guard avoidance needs 0 < r < R/2, got r={self.r}, R={self.R}")
        if self.tau <= 0 or self.k < 1:
            raise ValueError("Guard avoidance needs tau > 0 and k >= 1")
        if self.continuation_steps < 1:
            raise ValueError("continuation_steps must be at least 1")

    @property
    def tau_ladder(self) -> List[float]:
        """Ascending heights ending at tau."""
        return [self.tau * 10.0 ** (i - self.continuation_steps + 1) for i in range(self.continuation_steps)]


@dataclass
class HybridConfig:
    """Interpolation settings for systems with impulse effects."""
    zeno_margin: float = 0.05
    crossing_tolerance: float = 1e-9
    knot_tolerance: float = 1e-4
    workers: int = 1
    guard_avoidance: GuardAvoidanceConfig = field(default_factory=GuardAvoidanceConfig)

    def __post_init__(self):
        if self.zeno_margin <= 0:
            raise ValueError("zeno_margin must be positive")
        if self.crossing_tolerance <= 0 or self.knot_tolerance <= 0:
            raise ValueError("Hybrid tolerances must be positive")


@dataclass
class DebugConfig:
    """Logging configuration."""
    enabled: bool = False
    log_level: str = "INFO"


@dataclass
class Settings:
    """All configuration sections."""
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    solver: ShootingOptions = field(default_factory=ShootingOptions)
    avoidance: AvoidanceConfig = field(default_factory=AvoidanceConfig)
    hybrid: HybridConfig = field(default_factory=HybridConfig)
    debug: DebugConfig = field(default_factory=DebugConfig)

    def to_dict(self) -> Dict:
        """Plain-dict view used in JSON reports."""
        from dataclasses import asdict
        return asdict(self)


def _section(data: Dict, key: str) -> Dict:
    section = data.get(key, {}) or {}
    if not isinstance(section, dict):
        raise ConfigError(f"Section '{key}' must be a mapping")
    return section


def settings_from_dict(data: Optional[Dict], base: Optional[Settings] = None) -> Settings:
    """
    Build settings from a nested mapping, falling back to base values.

    Args:
        data: Mapping with optional sections integrator/solver/avoidance/hybrid/debug
        base: Settings providing defaults for missing keys

    Returns:
        Settings object

    Raises:
        ConfigError: If a section is malformed or a value fails validation
    """
    base = base or Settings()
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("Configuration must be a mapping")

    try:
        integrator = replace(base.integrator, **_section(data, "integrator"))
        solver = replace(base.solver, **_section(data, "solver"))
        avoidance = replace(base.avoidance, **_section(data, "avoidance"))

        hybrid_cfg = dict(_section(data, "hybrid"))
        guard_cfg = hybrid_cfg.pop("guard_avoidance", None) or {}
        guard = replace(base.hybrid.guard_avoidance, **guard_cfg)
        hybrid = replace(base.hybrid, guard_avoidance=guard, **hybrid_cfg)

        debug = replace(base.debug, **_section(data, "debug"))
    except TypeError as e:
        raise ConfigError(f"Unknown configuration key: {str(e)}")
    except ValueError as e:
        raise ConfigError(f"Invalid configuration value: {str(e)}")

    return Settings(
        integrator=integrator,
        solver=solver,
        avoidance=avoidance,
        hybrid=hybrid,
        debug=debug,
    )


def load_settings(path: str = DEFAULT_CONFIG_PATH) -> Settings:
    """
    Load settings from a YAML file.

    A missing file yields the built-in defaults.

    Args:
        path: Path to the configuration file

    Returns:
        Settings object

    Raises:
        ConfigError: If the file cannot be parsed or holds invalid values
    """
    if not os.path.exists(path):
        return Settings()

    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"Error parsing configuration file: {str(e)}")

    return settings_from_dict(data)
