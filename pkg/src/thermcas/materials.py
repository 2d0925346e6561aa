"""Reading material definitions from INI files.

Sections name materials; keys carry their unit as a suffix (``omega_p_ev``,
``nu_rad_s``, ``sigma_per_s``).  See ``materials.default`` for the format.
Models also round-trip through plain dicts in rad/s, which is what the CSV
fingerprint stores.
"""

import configparser
from importlib import resources
import math
import re

from .dielectric import DielectricModel, DrudeTerm, Oscillator
from .errors import ConfigError, InvalidModelError
from .units import ev

_FREQ_UNITS = {"ev": ev, "rad_s": float}
_NUMBERED = re.compile(r"^(osc|drude)(\d+)_(.+)$")


def default_path():
    return resources.files("thermcas").joinpath("materials.default")


def _number(section, key, raw):
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a number", key=key) from None
    if not math.isfinite(value):
        raise ConfigError(f"[{section}] {key} must be finite", key=key)
    return value


def _frequency(section, entries, stem, required=True):
    """Look up ``stem`` with any accepted unit suffix; returns rad/s."""
    hits = [(u, k) for u in _FREQ_UNITS for k in (f"{stem}_{u}",) if k in entries]
    if len(hits) > 1:
        raise ConfigError(f"[{section}] {stem} given in more than one unit", key=stem)
    if not hits:
        if stem in entries:
            raise ConfigError(f"[{section}] {stem} needs a unit suffix (_ev or _rad_s)", key=stem)
        if required:
            raise ConfigError(f"[{section}] missing {stem}_ev or {stem}_rad_s", key=stem)
        return 0.0
    unit, key = hits[0]
    return _FREQ_UNITS[unit](_number(section, key, entries.pop(key)))


def model_from_section(name, mapping):
    """Build a :class:`DielectricModel` from one config section."""
    entries = dict(mapping)
    kind = entries.pop("kind", None)
    if kind is None:
        raise ConfigError(f"[{name}] missing kind", key="kind")
    lossless = entries.pop("intraband_lossless", "false").strip().lower() in ("1", "true", "yes", "on")
    try:
        if kind == "vacuum":
            model = DielectricModel.vacuum()
        elif kind == "ideal-metal":
            model = DielectricModel.ideal_metal()
        elif kind == "plasma":
            model = DielectricModel.plasma_model(_frequency(name, entries, "omega_p"), name=name)
        elif kind == "drude":
            wp = _frequency(name, entries, "omega_p")
            model = DielectricModel.drude_model(wp, _frequency(name, entries, "nu"), name=name)
        elif kind in ("lorentz-oscillators", "composite"):
            model = _numbered_model(name, kind, entries)
        else:
            raise ConfigError(f"[{name}] unknown kind {kind!r}", key="kind")
    except InvalidModelError as exc:
        raise ConfigError(f"[{name}] {exc}", key=name) from None
    if entries:
        key = sorted(entries)[0]
        raise ConfigError(f"[{name}] unrecognised key {key!r}", key=key)
    if lossless:
        model = model.lossless_intraband()
    return DielectricModel(model.kind, model.drude, model.oscillators, model.sigma,
                           model.intraband_lossless, name)


def _numbered_model(name, kind, entries):
    groups = {}
    for key in list(entries):
        m = _NUMBERED.match(key)
        if m:
            groups.setdefault((m.group(1), int(m.group(2))), {})[m.group(3)] = entries.pop(key)
    oscillators, drude = [], []
    for (family, idx), sub in sorted(groups.items()):
        label = f"{family}{idx}"
        if family == "osc":
            if "strength" not in sub:
                raise ConfigError(f"[{name}] missing {label}_strength", key=f"{label}_strength")
            strength = _number(name, f"{label}_strength", sub.pop("strength"))
            omega = _frequency(name, sub, "omega")
            width = _frequency(name, sub, "width", required=False)
            oscillators.append(Oscillator(strength, omega, width))
        else:
            drude.append(DrudeTerm(_frequency(name, sub, "omega_p"),
                                   _frequency(name, sub, "nu", required=False)))
        if sub:
            key = f"{label}_{sorted(sub)[0]}"
            raise ConfigError(f"[{name}] unrecognised key {key!r}", key=key)
    sigma = 0.0
    if "sigma_per_s" in entries:
        sigma = _number(name, "sigma_per_s", entries.pop("sigma_per_s"))
    elif "sigma" in entries:
        raise ConfigError(f"[{name}] sigma needs the unit suffix _per_s", key="sigma")
    if kind == "lorentz-oscillators":
        return DielectricModel.lorentz(oscillators, name=name)
    return DielectricModel.composite(oscillators, drude, sigma, name=name)


def load_materials(path=None, text=None):
    """Parse a materials file (the shipped defaults when ``path`` is None)
    and return ``{name: DielectricModel}``."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        if text is not None:
            parser.read_string(text)
        elif path is None:
            parser.read_string(default_path().read_text())
        else:
            with open(path) as fh:
                parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse materials: {exc}") from None
    return {name: model_from_section(name, parser[name])
            for name in parser.sections() if name != "run"}


def model_to_dict(model):
    """Plain-dict form in rad/s, exact under JSON round trip."""
    return {"name": model.name, "kind": model.kind,
            "drude": [[t.omega_p, t.nu] for t in model.drude],
            "oscillators": [[o.strength, o.omega, o.width] for o in model.oscillators],
            "sigma": model.sigma, "intraband_lossless": model.intraband_lossless}


def model_from_dict(data):
    try:
        return DielectricModel(data["kind"],
                               tuple(DrudeTerm(*t) for t in data["drude"]),
                               tuple(Oscillator(*o) for o in data["oscillators"]),
                               float(data["sigma"]), bool(data["intraband_lossless"]),
                               data.get("name", ""))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed material record: {exc}") from None
