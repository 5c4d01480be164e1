from importlib import resources

import pytest
import yaml

from swarmdefense import ConfigError, config_hash, dump_config, load_config, parse_config

SHIPPED = ["model1_nominal", "model2_nominal", "desk_model1", "desk_model2"]


def shipped_path(name):
    return resources.files("swarmdefense") / "configs" / f"{name}.yaml"


def shipped_dict(name):
    with resources.as_file(shipped_path(name)) as p:
        return yaml.safe_load(p.read_text())


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_configs_parse_and_round_trip(name):
    with resources.as_file(shipped_path(name)) as p:
        run = load_config(p)
    echoed = parse_config(yaml.safe_load(dump_config(run)))
    assert config_hash(run) == config_hash(echoed)


def test_shipped_full_scale_values():
    run = parse_config(shipped_dict("model1_nominal"))
    s = run.scenario
    assert (s.n_attackers, s.n_defenders, s.t_f, s.dt) == (100, 10, 45.0, 0.05)
    assert s.model.params.d0 == 1.0 and s.model.params.alpha == 0.5
    assert s.weapons.lambda_a == 0.05
    assert run.nodes == 11 and run.scheme == "trapezoid"


def test_missing_field_names_the_field():
    data = shipped_dict("desk_model1")
    del data["scenario"]["t_f"]
    with pytest.raises(ConfigError, match=r"scenario\.t_f"):
        parse_config(data)


def test_missing_section():
    with pytest.raises(ConfigError, match="scenario"):
        parse_config({"optimization": {}})


def test_unknown_model_kind():
    data = shipped_dict("desk_model1")
    data["scenario"]["model"]["kind"] = "langevin"
    with pytest.raises(ConfigError, match="model.kind"):
        parse_config(data)


def test_unknown_model_parameter():
    data = shipped_dict("desk_model1")
    data["scenario"]["model"]["params"]["viscosity"] = 1.0
    with pytest.raises(ConfigError, match="viscosity"):
        parse_config(data)


def test_bad_weapon_value():
    data = shipped_dict("desk_model1")
    data["scenario"]["weapons"]["sigma_d"] = -1.0
    with pytest.raises(ConfigError, match="weapons"):
        parse_config(data)


def test_non_numeric_value():
    data = shipped_dict("desk_model1")
    data["scenario"]["dt"] = "fast"
    with pytest.raises(ConfigError, match=r"scenario\.dt"):
        parse_config(data)


def test_unbindable_uncertain_name():
    data = shipped_dict("desk_model1")
    data["scenario"]["uncertain"]["name"] = "w_sep"
    with pytest.raises(ConfigError, match="bindable"):
        parse_config(data)


def test_bad_quadrature_scheme():
    data = shipped_dict("desk_model1")
    data["quadrature"]["scheme"] = "simpson"
    with pytest.raises(ConfigError, match="quadrature.scheme"):
        parse_config(data)


def test_hash_changes_with_content():
    a = parse_config(shipped_dict("desk_model1"))
    data = shipped_dict("desk_model1")
    data["scenario"]["t_f"] = 20.0
    b = parse_config(data)
    assert config_hash(a) != config_hash(b)
