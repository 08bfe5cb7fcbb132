import dataclasses

import pytest
import yaml

from vantage import (
    ModelParseError,
    ModelValidationError,
    load_model_spec,
    resolve_subgroup_spec,
    serialize_model_spec,
    validate_model_spec,
)
from vantage._resources import demo_config_path, reference_config_path
from vantage.config import (
    ParameterPathError,
    apply_parameter_values,
    build_model_spec,
    read_parameter,
    spec_digest,
)


def demo_raw():
    return yaml.safe_load(demo_config_path().read_text())


def test_demo_config_loads_with_expected_shape():
    spec = load_model_spec(demo_config_path())
    assert len(spec.states) == 3
    assert len(spec.strategies) == 2
    assert len(spec.subgroups) == 2
    assert sum(1 for s in spec.strategies if s.is_comparator) == 1


def test_reference_config_is_valid():
    spec = load_model_spec(reference_config_path())
    assert validate_model_spec(spec).ok


def test_round_trip_serialization(tmp_path):
    spec = load_model_spec(demo_config_path())
    text = serialize_model_spec(spec)
    path = tmp_path / "round_trip.yaml"
    path.write_text(text)
    again = load_model_spec(path)
    assert again == spec
    assert spec_digest(again) == spec_digest(spec)


def test_non_stochastic_row_reports_its_sum():
    raw = demo_raw()
    raw["strategies"][0]["transition_matrix"]["Healthy"] = [0.8, 0.1, 0.05]
    with pytest.raises(ModelValidationError) as exc:
        build_model_spec(raw)
    assert any("sums to 0.95" in e for e in exc.value.errors)


def test_negative_inequality_aversion_rejected():
    raw = demo_raw()
    raw["inequality_aversion"] = -0.5
    with pytest.raises(ModelValidationError) as exc:
        build_model_spec(raw)
    assert any("inequality_aversion must be >= 0" in e for e in exc.value.errors)


def test_validation_is_aggregate_one_diagnostic_per_violation():
    # Three independent violations must yield exactly three diagnostics.
    raw = demo_raw()
    raw["strategies"][0]["transition_matrix"]["Healthy"] = [0.8, 0.1, 0.05]
    raw["inequality_aversion"] = -0.5
    raw["states"][0]["utility"] = 1.5
    with pytest.raises(ModelValidationError) as exc:
        build_model_spec(raw)
    assert len(exc.value.errors) == 3


def test_absorbing_override_is_warning_not_error():
    raw = demo_raw()
    raw["states"][2]["cost_direct_medical"] = 5000.0  # one-off death cost
    spec = build_model_spec(raw)
    report = validate_model_spec(spec)
    assert report.ok
    assert any("absorbing state 'Dead'" in w for w in report.warnings)


def test_unresolved_distribution_target_rejected():
    raw = demo_raw()
    raw["psa"]["distributions"][0]["target"] = "states.Nowhere.utility"
    with pytest.raises(ModelValidationError) as exc:
        build_model_spec(raw)
    assert any("Nowhere" in e for e in exc.value.errors)


@pytest.mark.parametrize(
    "kind,target,parameters",
    [
        ("beta", "states.Sick.cost_direct_medical", {"alpha": 2.0, "beta": 2.0}),
        ("gamma", "states.Sick.utility", {"shape": 2.0, "scale": 1.0}),
        ("dirichlet-row", "states.Sick.utility", {"precision": 10.0}),
        (
            "normal",
            "strategies.StandardCare.transition_matrix.Healthy",
            {"mean": 0.0, "sd": 1.0},
        ),
    ],
)
def test_distribution_kind_target_compatibility(kind, target, parameters):
    raw = demo_raw()
    raw["psa"]["distributions"] = [
        {"kind": kind, "target": target, "parameters": parameters}
    ]
    with pytest.raises(ModelValidationError):
        build_model_spec(raw)


def test_invalid_distribution_parameters_rejected():
    raw = demo_raw()
    raw["psa"]["distributions"][0]["parameters"] = {"alpha": -1.0, "beta": 2.0}
    with pytest.raises(ModelValidationError) as exc:
        build_model_spec(raw)
    assert any("alpha > 0" in e for e in exc.value.errors)


def test_missing_file_is_parse_error(tmp_path):
    with pytest.raises(ModelParseError, match="not found"):
        load_model_spec(tmp_path / "absent.yaml")


def test_malformed_yaml_is_parse_error(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("states:\n  - name: [unclosed\n")
    with pytest.raises(ModelParseError):
        load_model_spec(path)


def test_friction_period_required_for_friction_cost():
    raw = demo_raw()
    raw["productivity_method"] = "friction-cost"
    with pytest.raises(ModelValidationError) as exc:
        build_model_spec(raw)
    assert any("friction_period_years" in e for e in exc.value.errors)


class TestSubgroupResolution:
    def test_single_key_override(self, demo_spec):
        group = demo_spec.subgroups[0]
        view = apply_parameter_values(demo_spec, {"states.Sick.utility": 0.5})
        assert read_parameter(view, "states.Sick.utility") == 0.5
        assert read_parameter(demo_spec, "states.Sick.utility") == 0.60
        # Everything else carries over untouched.
        assert view.strategies == demo_spec.strategies
        assert group in view.subgroups

    def test_empty_overrides_identity(self, demo_spec):
        view = resolve_subgroup_spec(demo_spec, demo_spec.subgroups[0])
        assert view == demo_spec

    def test_resolution_is_pure(self, demo_spec):
        deprived = demo_spec.subgroups[1]
        before = dataclasses.replace(demo_spec)
        first = resolve_subgroup_spec(demo_spec, deprived)
        second = resolve_subgroup_spec(demo_spec, deprived)
        assert first == second
        assert demo_spec == before
        assert first != demo_spec  # the overrides actually changed something

    def test_non_stochastic_override_rejected(self, demo_spec):
        bad = dataclasses.replace(
            demo_spec.subgroups[1],
            parameter_overrides={
                "strategies.StandardCare.transition_matrix.Healthy": (0.5, 0.1, 0.1)
            },
        )
        spec = dataclasses.replace(
            demo_spec, subgroups=(demo_spec.subgroups[0], bad)
        )
        with pytest.raises(ModelValidationError):
            resolve_subgroup_spec(spec, bad)

    def test_foreign_subgroup_rejected(self, demo_spec):
        outsider = dataclasses.replace(demo_spec.subgroups[0], name="other")
        with pytest.raises(ValueError):
            resolve_subgroup_spec(demo_spec, outsider)

    def test_type_incompatible_override(self, demo_spec):
        with pytest.raises(ParameterPathError):
            apply_parameter_values(demo_spec, {"states.Sick.utility": (0.1, 0.2)})
        with pytest.raises(ParameterPathError):
            apply_parameter_values(
                demo_spec, {"strategies.StandardCare.transition_matrix.Healthy": 0.5}
            )
