import pytest

from ..core.support.config_validator import ConfigValidator
from ..models.errors import ConfigError
from ..models.models import ApproximationSet, TimeKind
from ..models.run_config import (
    bundled_config_names,
    dump_config,
    load_config,
    loads_config,
    parse_overrides,
    resolve_config_path,
)


class TestBundledConfigs:
    @pytest.mark.parametrize("name", ["lorenz", "henon", "vanderpol", "vanderpol_disk"])
    def test_loads(self, name):
        config = load_config(name)
        assert config.seed is not None
        assert config.build_set().dim == len(config.variables)

    def test_names(self):
        assert bundled_config_names() == ["henon", "lorenz", "vanderpol", "vanderpol_disk"]

    def test_henon(self):
        config = load_config("henon")
        assert config.time_kind is TimeKind.DISCRETE
        assert config.tightening.degrees == [6, 8, 10]
        assert config.volume.approximation_set is ApproximationSet.INTERSECTION
        system = config.build_system()
        assert system.discount == 0.05
        assert system.field.degree == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            resolve_config_path(tmp_path / "nope.toml")


class TestValidation:
    def test_toy_config(self, toy_config_text):
        config = loads_config(toy_config_text)
        assert config.seed == 5
        assert config.solver.tol_eq == 1e-7
        assert config.solver.max_iterations == 200
        assert config.discount_sweep() == [1.0]

    def test_discrete_discount_out_of_range(self, toy_config_text):
        overrides = [("system.time", '"discrete"'), ("system.discount", "1.5")]
        with pytest.raises(ConfigError, match=r"α ∈ \(0, 1\)"):
            loads_config(toy_config_text, overrides)

    def test_continuous_discount_must_be_positive(self, toy_config_text):
        with pytest.raises(ConfigError, match="β > 0"):
            loads_config(toy_config_text, [("system.discount", "0")])

    def test_swept_discounts_are_checked(self, toy_config_text):
        with pytest.raises(ConfigError):
            loads_config(toy_config_text, [("tightening.discounts", "[1.0, -2.0]")])
        config = loads_config(toy_config_text, [("tightening.discounts", "[0.5, 2.0]")])
        assert config.discount_sweep() == [0.5, 2.0]

    def test_seed_required_for_stochastic_actions(self, toy_config_text):
        text = toy_config_text.replace("seed = 5\n", "")
        with pytest.raises(ConfigError, match="seed"):
            loads_config(text)
        config = loads_config(text, [("actions", '["simulate"]')])
        assert config.seed is None

    def test_odd_degree(self, toy_config_text):
        with pytest.raises(ConfigError, match="偶数"):
            loads_config(toy_config_text, [("tightening.degrees", "[3]")])

    def test_degree_below_field_degree(self, toy_config_text):
        overrides = [("system.field", '["-x^3"]'), ("tightening.degrees", "[2]")]
        with pytest.raises(ConfigError):
            loads_config(toy_config_text, overrides)

    def test_field_parse_error(self, toy_config_text):
        with pytest.raises(ConfigError, match="system"):
            loads_config(toy_config_text, [("system.field", '["-z"]')])

    def test_field_count_mismatch(self, toy_config_text):
        with pytest.raises(ConfigError):
            loads_config(toy_config_text, [("system.field", '["-x", "x"]')])

    def test_domain_dimension_mismatch(self, toy_config_text):
        with pytest.raises(ConfigError):
            loads_config(toy_config_text, [("domain.lower", "[-1.0, -1.0]"), ("domain.upper", "[1.0, 1.0]")])

    def test_domain_missing_fields(self, toy_config_text):
        with pytest.raises(ConfigError, match="ball"):
            loads_config(toy_config_text, [("domain.kind", '"ball"')])

    def test_unknown_key(self, toy_config_text):
        with pytest.raises(ConfigError):
            loads_config(toy_config_text, [("solver.tolerance", "1e-6")])

    def test_grid_must_cover_dimensions(self, toy_config_text):
        text = toy_config_text.replace("dimension = 0", "dimension = 1")
        with pytest.raises(ConfigError, match="grid"):
            loads_config(text)

    def test_grid_action_needs_section(self, toy_config_text):
        text = toy_config_text.split("[[grid.axes]]")[0]
        with pytest.raises(ConfigError, match="grid"):
            loads_config(text)

    def test_invalid_toml(self):
        with pytest.raises(ConfigError, match="TOML"):
            loads_config("seed = = 1")


class TestOverrides:
    def test_parse(self):
        assert parse_overrides(["seed=3", " solver.max_iterations = 50 "]) == [
            ("seed", "3"),
            ("solver.max_iterations", "50"),
        ]
        assert parse_overrides(None) == []

    @pytest.mark.parametrize("pair", ["seed", "=3"])
    def test_malformed(self, pair):
        with pytest.raises(ConfigError):
            parse_overrides([pair])

    def test_values_are_toml(self, toy_config_text):
        config = loads_config(toy_config_text, parse_overrides(["seed=11", "volume.set=yk"]))
        assert config.seed == 11
        assert config.volume.approximation_set is ApproximationSet.YK

    def test_override_into_scalar_rejected(self, toy_config_text):
        with pytest.raises(ConfigError):
            loads_config(toy_config_text, [("seed.value", "1")])


class TestDump:
    def test_fixed_point(self, toy_config_text):
        config = loads_config(toy_config_text)
        text = dump_config(config)
        assert loads_config(text) == config
        assert dump_config(loads_config(text)) == text

    def test_bundled_fixed_point(self):
        config = load_config("lorenz")
        assert loads_config(dump_config(config)) == config


class TestConfigValidator:
    def test_clean_config_has_no_warnings(self, toy_config_text):
        config, warnings = ConfigValidator.validate(loads_config(toy_config_text))
        assert warnings == []
        assert config.log_level == "WARNING"

    def test_log_level_is_normalised(self, toy_config_text):
        config, warnings = ConfigValidator.validate(
            loads_config(toy_config_text, [("log_level", '"debug"')])
        )
        assert config.log_level == "DEBUG"
        assert warnings == []

    def test_invalid_log_level(self, toy_config_text):
        config, warnings = ConfigValidator.validate(
            loads_config(toy_config_text, [("log_level", '"chatty"')])
        )
        assert config.log_level == "INFO"
        assert len(warnings) == 1

    def test_inequality_cutting_the_box(self, toy_config_text):
        config = loads_config(toy_config_text, [("domain.inequalities", '["x"]')])
        _, warnings = ConfigValidator.validate(config)
        assert any("矩域" in w for w in warnings)

    def test_large_problem(self, toy_config_text):
        config = loads_config(toy_config_text, [("tightening.degrees", "[700]")])
        _, warnings = ConfigValidator.validate(config)
        assert any("export-sdpa" in w for w in warnings)

    def test_henon_map_is_injective(self):
        _, warnings = ConfigValidator.validate(load_config("henon"))
        assert not any("单射" in w for w in warnings)

    def test_folding_map_is_flagged(self, toy_config_text):
        overrides = [
            ("system.time", '"discrete"'),
            ("system.discount", "0.5"),
            ("system.field", '["x^2"]'),
        ]
        _, warnings = ConfigValidator.validate(loads_config(toy_config_text, overrides))
        assert any("单射" in w for w in warnings)
