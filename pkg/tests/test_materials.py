import json

import pytest

from thermcas.dielectric import DielectricModel
from thermcas.errors import ConfigError
from thermcas.materials import load_materials, model_from_dict, model_to_dict
from thermcas.units import ev


def test_defaults_load():
    lib = load_materials()
    assert {"vacuum", "ideal", "gold", "gold-plasma", "silicon-dark", "silicon-irradiated",
            "silica"} <= set(lib)
    assert lib["gold"] == DielectricModel.drude_model(ev(9.0), ev(0.035))
    assert lib["silica"].sigma == 100.0
    assert lib["silica"].without_carriers().static_limit() == pytest.approx(3.808)
    assert lib["silicon-dark"].without_carriers().static_limit() == pytest.approx(11.66)
    assert lib["silicon-dark"].without_carriers() == lib["silicon-irradiated"].without_carriers()


def test_rad_s_and_ev_agree():
    lib = load_materials(text="""
[a]
kind = drude
omega_p_ev = 1.0
nu_rad_s = 1e13
[b]
kind = drude
omega_p_rad_s = 1.519267e15
nu_rad_s = 1e13
""")
    assert lib["a"] == lib["b"]


@pytest.mark.parametrize("body, key", [
    ("kind = drude\nomega_p = 9\nnu_ev = 0.03", "omega_p"),
    ("kind = drude\nomega_p_ev = abc\nnu_ev = 0.03", "omega_p_ev"),
    ("kind = plasma\nomega_p_ev = 9\nextra_ev = 1", "extra_ev"),
    ("kind = composite\nosc1_omega_ev = 1", "osc1_strength"),
    ("kind = composite\nosc1_strength = 1\nosc1_omega_ev = 1\nsigma = 3", "sigma"),
    ("omega_p_ev = 9", "kind"),
])
def test_errors_name_the_key(body, key):
    with pytest.raises(ConfigError) as info:
        load_materials(text="[m]\n" + body)
    assert info.value.key == key
    assert key in str(info.value)


def test_missing_unit_message_mentions_units():
    with pytest.raises(ConfigError, match="_ev or _rad_s"):
        load_materials(text="[m]\nkind = plasma\nomega_p = 9\n")


def test_invalid_model_becomes_config_error():
    with pytest.raises(ConfigError):
        load_materials(text="[m]\nkind = drude\nomega_p_ev = -9\nnu_ev = 0.03\n")


def test_intraband_flag():
    lib = load_materials(text="[m]\nkind = drude\nomega_p_ev = 9\nnu_ev = 0.035\nintraband_lossless = yes\n")
    assert lib["m"].intraband_lossless
    assert lib["m"].dissipationless


def test_dict_round_trip_is_exact():
    for model in load_materials().values():
        again = model_from_dict(json.loads(json.dumps(model_to_dict(model))))
        assert again == model and again.name == model.name


def test_malformed_record():
    with pytest.raises(ConfigError):
        model_from_dict({"kind": "drude"})
