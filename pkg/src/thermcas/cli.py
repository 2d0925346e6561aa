"""Command-line front end.

Every run is described by a :class:`RunConfig`.  It is assembled from
scenario defaults, then command-line flags, then an optional INI file whose
``[run]`` section overrides both.  The resolved config, including full
material parameters, is stored as a JSON header line in every CSV written,
so ``--replay`` can regenerate the file byte for byte.

Units at this boundary: distances in meters, temperatures in kelvin,
material frequencies in eV or rad/s as spelled out by the key suffix.

Exit status: 0 on success, 1 for configuration errors, 2 when an evaluator
fails to converge.  Errors are also reported as one JSON line on stderr.
"""

import argparse
import configparser
from dataclasses import asdict, dataclass, field
import json
import math
import sys

import numpy as np

from .errors import ConfigError, ConvergenceError, DomainError, InvalidModelError
from .experiments import (AtomSpec, RB87, SphereSpec, SweepResult, THREADS_ENV, g1_curve,
                          g2_delta_force, g3_trap_shift, ideal_pressure)
from .lifshitz import EVALUATORS, Settings, ThermalSpec, evaluate
from .materials import load_materials, model_from_dict, model_from_section, model_to_dict
from .modes import POLARIZATIONS, LayerStack, dispersion_solve

SCENARIOS = ("g1", "g2", "g3", "dispersion", "single-point")

# per-scenario defaults; "roles" maps body roles to material names
DEFAULTS = {
    "g1": {"d_min": 0.2e-6, "d_max": 1.2e-6, "points": 20, "T": 295.0, "D": (0.01, 0.1, 1.0),
           "roles": {"material": "gold"}},
    "g2": {"d_min": 0.1e-6, "d_max": 0.5e-6, "points": 15, "T": 300.0, "D": (0.01, 0.1),
           "roles": {"plate": "gold", "dark": "silicon-dark", "irradiated": "silicon-irradiated"},
           "radius": 98e-6},
    "g3": {"d_min": 7e-6, "d_max": 11e-6, "points": 9, "T": 310.0, "D": (1e-12, 1e-11, 1e-10),
           "roles": {"wall": "silica"}},
    "dispersion": {"d": 10e-9, "kd_min": 0.02, "kd_max": 5.0, "points": 256, "T": 0.0, "D": (),
                   "roles": {"material": "gold"}},
    "single-point": {"d": 1e-6, "T": 0.0, "D": (), "roles": {"material": "gold"}},
}

# [run] keys accepted from a config file, with their unit for messages
RUN_KEYS = {
    "scenario": "", "d": "m", "d_min": "m", "d_max": "m", "points": "count", "grid": "log|linear",
    "T": "K", "D": "comma list, dimensionless", "evaluator": "", "broaden": "zero|full",
    "rtol": "relative", "material": "", "plate": "", "dark": "", "irradiated": "", "wall": "",
    "radius": "m", "alpha0": "m^3", "omega_a": "rad/s", "atom_mass": "kg", "trap_omega": "rad/s",
    "kd_min": "k d / pi", "kd_max": "k d / pi", "out": "path",
}


@dataclass
class RunConfig:
    """Fully resolved description of one run."""

    scenario: str
    T: float
    D: tuple = ()
    d: float = None
    d_min: float = None
    d_max: float = None
    points: int = None
    grid: str = "linear"
    evaluator: str = None
    broaden: str = "full"
    rtol: float = 1e-6
    materials: dict = field(default_factory=dict)  # role -> material record
    radius: float = None
    atom: dict = None
    kd_min: float = None
    kd_max: float = None

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {', '.join(SCENARIOS)}", key="scenario")
        if not (math.isfinite(self.T) and self.T >= 0):
            raise ConfigError("T must be finite and >= 0 (K)", key="T")
        if any(not (math.isfinite(D) and D >= 0) for D in self.D):
            raise ConfigError("D entries must be finite and >= 0", key="D")
        if not (0 < self.rtol < 1):
            raise ConfigError("rtol must be in (0, 1)", key="rtol")
        if self.scenario in ("g1", "g2", "g3"):
            if self.points is None or self.points < 2:
                raise ConfigError("points must be >= 2", key="points")
            if not (self.d_min is not None and self.d_min > 0):
                raise ConfigError("d_min must be > 0 (m)", key="d_min")
            if not (self.d_max is not None and self.d_max > self.d_min):
                raise ConfigError("d_max must exceed d_min (m)", key="d_max")
            if self.grid not in ("log", "linear"):
                raise ConfigError("grid must be 'log' or 'linear'", key="grid")
            if self.scenario != "g1" and self.T == 0:
                raise ConfigError(f"{self.scenario} needs T > 0 (K)", key="T")
        if self.scenario == "g1" and self.T == 0:
            raise ConfigError("g1 needs T > 0 (K)", key="T")
        if self.scenario in ("dispersion", "single-point"):
            if not (self.d is not None and self.d > 0):
                raise ConfigError("d must be > 0 (m)", key="d")
        if self.scenario == "dispersion":
            if self.points is None or self.points < 2:
                raise ConfigError("points must be >= 2", key="points")
            if not (self.kd_min is not None and 0 < self.kd_min < self.kd_max):
                raise ConfigError("need 0 < kd_min < kd_max (k d / pi)", key="kd_min")
        if self.broaden not in ("zero", "full"):
            raise ConfigError("broaden must be 'zero' or 'full'", key="broaden")
        if self.evaluator is not None and self.evaluator not in EVALUATORS:
            raise ConfigError(f"evaluator must be one of {', '.join(EVALUATORS)}", key="evaluator")
        if self.radius is not None and not self.radius > 0:
            raise ConfigError("radius must be > 0 (m)", key="radius")
        return self

    def grid_values(self):
        if self.grid == "log":
            return [float(x) for x in np.geomspace(self.d_min, self.d_max, self.points)]
        return [float(x) for x in np.linspace(self.d_min, self.d_max, self.points)]

    def model(self, role):
        return model_from_dict(self.materials[role])

    def settings(self):
        return Settings(rtol=self.rtol)

    def to_dict(self):
        out = asdict(self)
        out["D"] = list(self.D)
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown run field {sorted(unknown)[0]!r}", key=sorted(unknown)[0])
        data["D"] = tuple(data.get("D", ()))
        try:
            return cls(**data).validate()
        except TypeError as exc:
            raise ConfigError(f"malformed run record: {exc}") from None


# assembling a config ------------------------------------------------------

def _float(key, raw):
    try:
        return float(raw)
    except (TypeError, ValueError):
        unit = RUN_KEYS.get(key, "")
        raise ConfigError(f"{key} = {raw!r} is not a number ({unit})", key=key) from None


def _d_list(key, raw):
    if isinstance(raw, (list, tuple)):
        return tuple(float(x) for x in raw)
    raw = raw.strip()
    if not raw:
        return ()
    return tuple(_float(key, part) for part in raw.split(","))


def _read_config_file(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep "T" and "D" as written
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}", key="config") from None
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}", key="config") from None
    run = dict(parser["run"]) if parser.has_section("run") else {}
    for key in run:
        if key not in RUN_KEYS:
            raise ConfigError(f"[run] unknown key {key!r}", key=key)
    extra = {name: model_from_section(name, {k.lower(): v for k, v in parser[name].items()})
             for name in parser.sections() if name != "run"}
    return run, extra


def build_config(args):
    """Merge scenario defaults, flags and the config file into a RunConfig."""
    values = {k: v for k, v in vars(args).items() if v is not None and k in RUN_KEYS}
    library = load_materials(args.materials) if args.materials else load_materials()
    if args.config:
        run, extra = _read_config_file(args.config)
        library.update(extra)
        values.update(run)
    scenario = values.get("scenario", "single-point")
    if scenario not in DEFAULTS:
        raise ConfigError(f"scenario must be one of {', '.join(SCENARIOS)}", key="scenario")
    base = DEFAULTS[scenario]

    def pick(key, conv=_float):
        if key in values:
            return conv(key, values[key])
        return base.get(key)

    roles = {}
    for role, default in base["roles"].items():
        name = values.get(role, default)
        if name not in library:
            raise ConfigError(f"{role}: unknown material {name!r}", key=role)
        roles[role] = model_to_dict(library[name])

    cfg = RunConfig(
        scenario=scenario,
        T=pick("T"),
        D=pick("D", _d_list) if "D" in values else tuple(base["D"]),
        d=pick("d"), d_min=pick("d_min"), d_max=pick("d_max"),
        points=int(pick("points")) if pick("points") is not None else None,
        grid=values.get("grid", "linear"),
        evaluator=values.get("evaluator"),
        broaden=values.get("broaden", "full"),
        rtol=_float("rtol", values["rtol"]) if "rtol" in values else 1e-6,
        materials=roles,
        radius=pick("radius") if scenario == "g2" else None,
        kd_min=pick("kd_min"), kd_max=pick("kd_max"),
    )
    if scenario == "g3":
        atom = asdict(RB87)
        for key, flag in (("alpha0", "alpha0"), ("omega_a", "omega_a"), ("mass", "atom_mass"),
                          ("trap_omega", "trap_omega")):
            if flag in values:
                atom[key] = _float(flag, values[flag])
        try:
            AtomSpec(**atom)
        except DomainError as exc:
            raise ConfigError(str(exc), key="alpha0") from None
        cfg.atom = atom
    return cfg.validate()


# running -----------------------------------------------------------------

def _single_point(cfg, stdout):
    body = cfg.model("material")
    stack = LayerStack.symmetric(body, cfg.d)
    D = max(cfg.D) if cfg.D else 0.0
    evaluator = cfg.evaluator
    if evaluator is None:
        evaluator = "zero-t" if cfg.T == 0 else ("saturated" if D > 0 else "matsubara")
    try:
        thermal = ThermalSpec(cfg.T, D, evaluator, "zero" if cfg.broaden == "zero" else "full")
    except DomainError as exc:
        raise ConfigError(str(exc), key="evaluator") from None
    res = evaluate(stack, thermal, cfg.settings())
    e, p = res.energy(), res.pressure()
    print(f"material = {body.name}, d = {cfg.d:.6e} m, T = {cfg.T:g} K, D = {D:g}, "
          f"evaluator = {evaluator}", file=stdout)
    print(f"V = {e.V_total:.6e} J/m^2 (TM {e.V_TM:.6e}, TE {e.V_TE:.6e})", file=stdout)
    print(f"F = {p.F_total:.6e} N/m^2 (TM {p.F_TM:.6e}, TE {p.F_TE:.6e})", file=stdout)
    print(f"|F| = {abs(p.F_total):.4e} N/m^2", file=stdout)
    print(f"|F| / ideal zero-T = {abs(p.F_total) / ideal_pressure(cfg.d):.6f}", file=stdout)
    print(f"converged: est. rel. error {res.err:.1e}, Matsubara terms {res.n_used}", file=stdout)
    return None


def _dispersion(cfg):
    body = cfg.model("material")
    note = None
    if not body.dissipationless:
        body = body.lossless_intraband()
        note = "relaxation removed from free-carrier terms"
    stack = LayerStack.symmetric(body, cfg.d)
    if not stack.dissipationless:
        raise ConfigError("dispersion needs a material whose only losses are intraband", key="material")
    k_grid = np.linspace(cfg.kd_min, cfg.kd_max, cfg.points) * math.pi / cfg.d
    rows, failures = [], []
    for pol in POLARIZATIONS:
        res = dispersion_solve(stack, pol, k_grid)
        rows += res.to_rows()
        failures += res.failures
    meta = {}
    if note:
        meta["note"] = note
    result = SweepResult(("kd_over_pi", "omega_over_omega_s", "channel", "class", "branch"), rows, meta)
    return result, failures


def run(cfg, out=None, stdout=sys.stdout, stderr=sys.stderr, workers=None):
    """Execute ``cfg``; returns the SweepResult (None for single-point)."""
    settings = cfg.settings()
    if cfg.scenario == "single-point":
        return _single_point(cfg, stdout)
    failures = []
    D = tuple(x for x in cfg.D if x > 0)
    if cfg.scenario == "g1":
        result = g1_curve(cfg.grid_values(), cfg.T, D, cfg.model("material"),
                          broaden=cfg.broaden,
                          thermal_evaluator="real-axis" if cfg.evaluator == "real-axis" else "matsubara",
                          settings=settings, workers=workers)
    elif cfg.scenario == "g2":
        result = g2_delta_force(cfg.grid_values(), cfg.model("dark"), cfg.model("irradiated"),
                                SphereSpec(cfg.radius), cfg.T, D, cfg.model("plate"),
                                settings=settings, workers=workers)
    elif cfg.scenario == "g3":
        result = g3_trap_shift(cfg.grid_values(), cfg.model("wall"), AtomSpec(**cfg.atom), cfg.T, D,
                               settings=settings, workers=workers)
    else:
        result, failures = _dispersion(cfg)
    result.meta["run"] = cfg.to_dict()
    for diag in result.diagnostics:
        print(f"x = {diag['x']:.6e}: est. rel. error {diag['max_rel_error']:.1e}, "
              f"max Matsubara terms {diag['max_terms']}", file=stderr)
    for k, pol, kind, msg in failures:
        print(json.dumps({"warning": "root-bracketing", "k": k, "channel": pol.value,
                          "class": kind, "message": msg}), file=stderr)
    text = result.to_csv()
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if failures:
        raise ConvergenceError(f"{len(failures)} root-bracketing failures", where={"count": len(failures)})
    return result


def replay_config(path):
    try:
        with open(path) as fh:
            meta = SweepResult.from_csv(fh.read()).meta
    except (OSError, ValueError, IndexError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}", key="replay") from None
    if "run" not in meta:
        raise ConfigError(f"{path} has no run header", key="replay")
    return RunConfig.from_dict(meta["run"])


class _Parser(argparse.ArgumentParser):
    """Reports bad flags as configuration errors (exit 1) instead of exit 2."""

    def error(self, message):
        raise ConfigError(message, key="argv")


def make_parser():
    p = _Parser(
        prog="thermcas",
        description="Casimir energies, pressures and derived observables from Lifshitz theory.",
        epilog=f"Units: meters, kelvin; material files use _ev or _rad_s key suffixes. "
               f"Worker threads for sweeps come from ${THREADS_ENV} (default 1). "
               f"Exit status 0 ok, 1 config error, 2 convergence failure.")
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--d", type=float, help="separation for single-point / gap for dispersion (m)")
    p.add_argument("--d-min", dest="d_min", type=float, help="first grid separation (m)")
    p.add_argument("--d-max", dest="d_max", type=float, help="last grid separation (m)")
    p.add_argument("--points", type=int, help="grid points (>= 2)")
    p.add_argument("--grid", choices=("log", "linear"), help="grid spacing (default linear)")
    p.add_argument("--T", type=float, help="temperature (K)")
    p.add_argument("--D", type=str, help="comma-separated damping parameters; empty for none")
    p.add_argument("--evaluator", choices=EVALUATORS,
                   help="single-point evaluator; for g1 selects the route of the D=0 curve")
    p.add_argument("--broaden", choices=("zero", "full"),
                   help="g1 saturated curves: broaden every term (full) or only n = 0")
    p.add_argument("--rtol", type=float, help="relative tolerance of the evaluators")
    p.add_argument("--material", help="body material for g1, dispersion and single-point")
    p.add_argument("--plate", help="g2 plate material")
    p.add_argument("--dark", help="g2 membrane without irradiation")
    p.add_argument("--irradiated", help="g2 membrane with irradiation")
    p.add_argument("--wall", help="g3 wall material")
    p.add_argument("--radius", type=float, help="g2 sphere radius (m)")
    p.add_argument("--alpha0", type=float, help="g3 static polarizability volume (m^3)")
    p.add_argument("--omega-a", dest="omega_a", type=float, help="g3 atomic oscillator frequency (rad/s)")
    p.add_argument("--atom-mass", dest="atom_mass", type=float, help="g3 atom mass (kg)")
    p.add_argument("--trap-omega", dest="trap_omega", type=float, help="g3 trap frequency (rad/s)")
    p.add_argument("--kd-min", dest="kd_min", type=float, help="dispersion k-grid start (k d / pi)")
    p.add_argument("--kd-max", dest="kd_max", type=float, help="dispersion k-grid end (k d / pi)")
    p.add_argument("--materials", help="materials file (default: the shipped materials.default)")
    p.add_argument("--config", help="INI file; its [run] section overrides flags")
    p.add_argument("--replay", help="rerun the config stored in a CSV header")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--threads", type=int, help=f"worker threads (overrides ${THREADS_ENV})")
    return p


def _fail(stderr, kind, message, **extra):
    print(json.dumps({"error": kind, "message": message, **extra}, sort_keys=True, default=str),
          file=stderr)


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = make_parser().parse_args(argv)
        cfg = replay_config(args.replay) if args.replay else build_config(args)
        out = args.out
        if args.config and not args.replay:
            run_section, _ = _read_config_file(args.config)
            out = run_section.get("out", out)
        run(cfg, out, stdout, stderr, workers=args.threads)
    except ConfigError as exc:
        _fail(stderr, "config", str(exc), key=exc.key)
        return 1
    except (InvalidModelError, DomainError) as exc:
        _fail(stderr, "config", str(exc), key=None)
        return 1
    except ConvergenceError as exc:
        _fail(stderr, "convergence", str(exc), where=exc.where)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
