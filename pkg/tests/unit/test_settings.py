"""Unit tests for settings loading."""
import os
import tempfile

import pytest

from src.config.settings import (
    ConfigError,
    GuardAvoidanceConfig,
    IntegratorConfig,
    Settings,
    ShootingOptions,
    load_settings,
    settings_from_dict,
)


class TestSettings:
    """Test suite for the settings dataclasses."""

    def test_defaults(self):
        settings = Settings()
        assert settings.integrator.method == "rk4"
        assert settings.integrator.step == 1e-3
        assert settings.solver.tolerance == 1e-6
        assert settings.solver.max_evaluations == 6000
        assert settings.avoidance.tau_grid[0] == 1.0
        assert settings.hybrid.guard_avoidance.R == 0.1

    def test_tau_grid_sorted(self):
        settings = settings_from_dict({"avoidance": {"tau_grid": [100, 1, 10]}})
        assert settings.avoidance.tau_grid == [1.0, 10.0, 100.0]

    @pytest.mark.parametrize("factory, kwargs", [
        (IntegratorConfig, {"method": "midpoint"}),
        (IntegratorConfig, {"step": 0.0}),
        (ShootingOptions, {"tolerance": 1e-6, "stop_tolerance": 1e-3}),
        (ShootingOptions, {"warm_start": "random"}),
        (ShootingOptions, {"coordinates": "polar"}),
        (ShootingOptions, {"contraction": 1.0}),
        (GuardAvoidanceConfig, {"r": 0.06, "R": 0.1}),
        (GuardAvoidanceConfig, {"continuation_steps": 0}),
    ])
    def test_invalid_values(self, factory, kwargs):
        with pytest.raises(ValueError):
            factory(**kwargs)

    def test_nested_guard_avoidance_override(self):
        settings = settings_from_dict({"hybrid": {"zeno_margin": 0.1, "guard_avoidance": {"tau": 20.0}}})
        assert settings.hybrid.zeno_margin == 0.1
        assert settings.hybrid.guard_avoidance.tau == 20.0
        assert settings.hybrid.guard_avoidance.R == 0.1

    def test_base_values_kept(self):
        base = settings_from_dict({"solver": {"max_evaluations": 10}})
        merged = settings_from_dict({"integrator": {"method": "euler"}}, base)
        assert merged.solver.max_evaluations == 10
        assert merged.integrator.method == "euler"

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="Unknown configuration key"):
            settings_from_dict({"integrator": {"order": 4}})

    def test_section_must_be_mapping(self):
        with pytest.raises(ConfigError):
            settings_from_dict({"solver": [1, 2]})

    def test_to_dict(self):
        assert Settings().to_dict()["hybrid"]["guard_avoidance"]["k"] == 2


class TestLoadSettings:
    """Test suite for load_settings."""

    def test_missing_file_gives_defaults(self):
        assert load_settings("nonexistent.yaml") == Settings()

    def test_repository_config_matches_defaults(self):
        root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
        assert load_settings(os.path.join(root, "conf.yaml")) == Settings()

    def test_invalid_yaml(self):
        with tempfile.NamedTemporaryFile(mode='w', delete=False, suffix='.yaml') as f:
            f.write("solver: [unclosed\n")
            path = f.name
        try:
            with pytest.raises(ConfigError):
                load_settings(path)
        finally:
            os.unlink(path)

    def test_file_overrides(self):
        with tempfile.NamedTemporaryFile(mode='w', delete=False, suffix='.yaml') as f:
            f.write("integrator:\n  method: euler\n  step: 0.01\ndebug:\n  enabled: true\n")
            path = f.name
        try:
            settings = load_settings(path)
        finally:
            os.unlink(path)
        assert settings.integrator.method == "euler"
        assert settings.integrator.step == 0.01
        assert settings.debug.enabled

    def test_guard_tau_ladder_ends_at_tau(self):
        ladder = GuardAvoidanceConfig(tau=10.0, continuation_steps=3).tau_ladder
        assert ladder == pytest.approx([0.1, 1.0, 10.0])
        assert GuardAvoidanceConfig(continuation_steps=1).tau_ladder == [10.0]
