"""Scenario adapters built on the Lifshitz evaluators.

Three observables are produced as distance sweeps:

* ``g1_curve``: gold-gold pressure normalized to the ideal-metal value at
  zero temperature, for zero T, finite T and the saturated variants;
* ``g2_delta_force``: sphere-membrane force change under a change of the
  membrane carrier density, through the proximity-force approximation;
* ``g3_trap_shift``: fractional trap-frequency shift of an atom held near
  a dielectric wall.

Sweeps fan out over grid points with a thread pool and collect results in
grid order, so the output does not depend on the number of workers.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import io
import json
import math
import os
import warnings

import numpy as np

from .dielectric import DielectricModel
from .errors import DomainError
from .lifshitz import DEFAULT_SETTINGS, ThermalSpec, evaluate, thermal_sum
from .materials import model_to_dict
from .modes import LayerStack, _interface_imag
from .quadrature import graded_rule
from .units import C, HBAR, KB, ev

THREADS_ENV = "THERMCAS_THREADS"
CSV_FORMAT = "{:.11e}"  # 12 significant digits


class OrderingWarning(UserWarning):
    """A computed curve family violates its expected ordering."""


class PFAWarning(UserWarning):
    """Separation is not small compared with the sphere radius."""


class RarefiedLimitWarning(UserWarning):
    """The atom is too close to the wall for the linear-response kernel."""


# normalization -----------------------------------------------------------

def ideal_pressure(d):
    """Zero-temperature ideal-metal pressure magnitude hbar c pi^2/(240 d^4)."""
    return HBAR * C * math.pi ** 2 / (240.0 * d ** 4)


def normalize_ideal(pressure, d):
    """|F| divided by the ideal-metal zero-temperature pressure at ``d``."""
    if not d > 0:
        raise DomainError("d must be > 0")
    return abs(pressure) / ideal_pressure(d)


# specs -------------------------------------------------------------------

@dataclass(frozen=True)
class SphereSpec:
    radius: float

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise DomainError("sphere radius must be finite and > 0")


@dataclass(frozen=True)
class AtomSpec:
    """Point atom with a single-oscillator polarizability.

    alpha0 is the static polarizability volume (Gaussian convention, m^3),
    omega_a the oscillator frequency, mass in kg and trap_omega the angular
    trap frequency the shift is measured against.
    """

    alpha0: float
    omega_a: float
    mass: float
    trap_omega: float

    def __post_init__(self):
        for name in ("alpha0", "omega_a", "mass", "trap_omega"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise DomainError(f"{name} must be finite and >= 0")
        if self.omega_a == 0 or self.mass == 0 or self.trap_omega == 0:
            raise DomainError("omega_a, mass and trap_omega must be > 0")

    def polarizability(self, xi):
        return self.alpha0 / (1.0 + (np.asarray(xi) / self.omega_a) ** 2)


# 87Rb: alpha0 = 319 a.u. (4.73e-29 m^3), D-line oscillator at 780 nm,
# 229 Hz radial trap as used in surface-atom force measurements.
RB87 = AtomSpec(alpha0=4.73e-29, omega_a=2.415e15, mass=1.443e-25, trap_omega=2 * math.pi * 229.0)

GOLD = DielectricModel.drude_model(ev(9.0), ev(0.035), name="gold")


# sweep container ---------------------------------------------------------

def _fmt(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return CSV_FORMAT.format(float(value))


@dataclass
class SweepResult:
    """Table of sweep rows plus the metadata needed to reproduce it.

    ``meta`` entries are written as ``# key: <json>`` header lines in key
    order, so equal results always serialize to identical bytes.
    ``diagnostics`` holds one convergence record per row and is not
    serialized.
    """

    columns: tuple
    rows: list
    meta: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list, compare=False)

    def column(self, name):
        j = self.columns.index(name)
        return np.array([r[j] for r in self.rows])

    def to_csv(self):
        out = io.StringIO()
        for key in sorted(self.meta):
            out.write(f"# {key}: {json.dumps(self.meta[key], sort_keys=True)}\n")
        out.write(",".join(self.columns) + "\n")
        for row in self.rows:
            out.write(",".join(_fmt(v) for v in row) + "\n")
        return out.getvalue()

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text):
        meta, lines = {}, []
        for line in text.splitlines():
            if line.startswith("# "):
                key, _, payload = line[2:].partition(": ")
                meta[key] = json.loads(payload)
            elif line:
                lines.append(line)
        columns = tuple(lines[0].split(","))
        rows = []
        for line in lines[1:]:
            row = []
            for cell in line.split(","):
                try:
                    row.append(float(cell))
                except ValueError:
                    row.append(cell)
            rows.append(tuple(row))
        return cls(columns, rows, meta)


def worker_count(workers=None):
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, int(workers))


def parallel_map(fn, items, workers=None):
    """``[fn(x) for x in items]``, evaluated on a thread pool."""
    items = list(items)
    n = worker_count(workers)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _split(pairs):
    return [p[0] for p in pairs], [p[1] for p in pairs]


def _diag(x, evals):
    """Convergence record for one grid point from evaluator results."""
    return {"x": x, "max_rel_error": max(e.err for e in evals),
            "max_terms": max(e.n_used for e in evals)}


def _label(D):
    return f"D={D:g}"


def _check_grid(grid, name="d"):
    grid = [float(x) for x in grid]
    if not grid or any(not (x > 0 and math.isfinite(x)) for x in grid):
        raise DomainError(f"{name} grid must be non-empty with finite values > 0")
    return grid


# G1: gold-gold pressure --------------------------------------------------

def g1_curve(d_grid, T=295.0, D_list=(0.01, 0.1, 1.0), body=GOLD, broaden="full",
             thermal_evaluator="matsubara", settings=DEFAULT_SETTINGS, workers=None):
    """Normalized pressure between two identical plates.

    Columns: ``d_m``, ``zero-T``, ``D=0`` (finite T, ordinary statistics)
    and one ``D=<value>`` column per saturated variant.  With
    ``broaden="full"`` the saturated curves use the damped distribution on
    the real axis, which equals broadening every Matsubara term;
    ``broaden="zero"`` broadens only the static term.
    """
    d_grid = _check_grid(d_grid)
    D_list = tuple(float(D) for D in D_list)
    if any(D <= 0 for D in D_list):
        raise DomainError("saturated D values must be > 0")
    if broaden not in ("full", "zero"):
        raise DomainError("broaden must be 'full' or 'zero'")
    if thermal_evaluator not in ("matsubara", "real-axis"):
        raise DomainError("thermal_evaluator must be 'matsubara' or 'real-axis'")
    specs = [ThermalSpec(0.0, 0.0, "zero-t"), ThermalSpec(T, 0.0, thermal_evaluator)]
    for D in D_list:
        specs.append(ThermalSpec(T, D, "real-axis") if broaden == "full"
                     else ThermalSpec(T, D, "saturated", "zero"))

    def point(d):
        stack = LayerStack.symmetric(body, d)
        evals = [evaluate(stack, th, settings) for th in specs]
        row = (d,) + tuple(normalize_ideal(e.pressure().F_total, d) for e in evals)
        return row, _diag(d, evals)

    rows, diags = _split(parallel_map(point, d_grid, workers))
    result = SweepResult(("d_m", "zero-T", "D=0") + tuple(_label(D) for D in D_list), rows, {
        "scenario": {"name": "g1", "T": T, "D": list(D_list), "broaden": broaden,
                     "thermal_evaluator": thermal_evaluator, "rtol": settings.rtol,
                     "body": model_to_dict(body)}}, diags)
    bad = g1_ordering_violations(result)
    if bad:
        warnings.warn(f"g1 ordering violated at d = {bad}", OrderingWarning, stacklevel=2)
    return result


def g1_ordering_violations(result):
    """Distances where zero-T >= saturated (largest D first) >= ... >= D=0 fails."""
    sat = sorted((c for c in result.columns if c.startswith("D=") and c != "D=0"),
                 key=lambda c: -float(c[2:]))
    chain = ["zero-T"] + sat + ["D=0"]
    idx = [result.columns.index(c) for c in chain]
    out = []
    for row in result.rows:
        vals = [row[j] for j in idx]
        if any(a < b for a, b in zip(vals, vals[1:])):
            out.append(row[0])
    return out


# G2: sphere-membrane force change ----------------------------------------

def pfa_force(stack, sphere, thermal, settings=DEFAULT_SETTINGS):
    """Sphere-plate force 2 pi R V_plate(d); negative for attraction."""
    return 2.0 * math.pi * sphere.radius * evaluate(stack, thermal, settings).energy().V_total


def pfa_force_gradient(stack, sphere, thermal, settings=DEFAULT_SETTINGS):
    """dF_sphere/dd = 2 pi R dV/dd = -2 pi R F_plate, from the analytic pressure."""
    return -2.0 * math.pi * sphere.radius * evaluate(stack, thermal, settings).pressure().F_total


def plate_pressure_from_pfa(stack, sphere, thermal, settings=DEFAULT_SETTINGS):
    """Plate pressure recovered from the sphere force gradient."""
    return -pfa_force_gradient(stack, sphere, thermal, settings) / (2.0 * math.pi * sphere.radius)


def g2_delta_force(d_grid, dark, irradiated, sphere, T=300.0, D_list=(0.01, 0.1), plate=GOLD,
                   settings=DEFAULT_SETTINGS, workers=None):
    """Force change F(irradiated) - F(dark) between a sphere and a membrane.

    ``dark`` and ``irradiated`` must share their background and differ only
    in free-carrier terms.  Columns: ``d_m``, ``D=0``, one ``D=<value>``
    per saturated variant (static term broadened), ``prescription`` (dark
    membrane with its carriers deleted, ordinary statistics) and ``d/R``.
    """
    d_grid = _check_grid(d_grid)
    D_list = tuple(float(D) for D in D_list)
    if any(D <= 0 for D in D_list):
        raise DomainError("saturated D values must be > 0")
    if dark.without_carriers() != irradiated.without_carriers():
        raise DomainError("dark and irradiated membranes differ beyond their carrier terms")
    worst = max(d_grid) / sphere.radius
    if worst > 0.01:
        warnings.warn(f"d/R up to {worst:.3g}; proximity-force approximation is unreliable",
                      PFAWarning, stacklevel=2)
    specs = [ThermalSpec(T, 0.0, "matsubara")] + [ThermalSpec(T, D, "saturated") for D in D_list]
    bare = dark.without_carriers()

    def point(d):
        s_dark = LayerStack(plate, DielectricModel.vacuum(), dark, d)
        s_irr = LayerStack(plate, DielectricModel.vacuum(), irradiated, d)
        s_bare = LayerStack(plate, DielectricModel.vacuum(), bare, d)
        row = [d]
        for th in specs:
            row.append(pfa_force(s_irr, sphere, th, settings) - pfa_force(s_dark, sphere, th, settings))
        row.append(pfa_force(s_irr, sphere, specs[0], settings) - pfa_force(s_bare, sphere, specs[0], settings))
        row.append(d / sphere.radius)
        evals = [evaluate(s, th, settings) for th in specs for s in (s_dark, s_irr)]
        return tuple(row), _diag(d, evals + [evaluate(s_bare, specs[0], settings)])

    rows, diags = _split(parallel_map(point, d_grid, workers))
    return SweepResult(("d_m", "D=0") + tuple(_label(D) for D in D_list) + ("prescription", "d/R"), rows, {
        "scenario": {"name": "g2", "T": T, "D": list(D_list), "radius": sphere.radius,
                     "rtol": settings.rtol, "plate": model_to_dict(plate),
                     "dark": model_to_dict(dark), "irradiated": model_to_dict(irradiated)}}, diags)


def g2_between_violations(result):
    """Distances where a saturated curve is not between D=0 and the
    prescription, or the saturated family is not monotone in D."""
    sat = sorted((c for c in result.columns if c.startswith("D=") and c != "D=0"),
                 key=lambda c: float(c[2:]))
    chain_cols = ["D=0"] + sat + ["prescription"]
    idx = [result.columns.index(c) for c in chain_cols]
    out = []
    for row in result.rows:
        vals = [row[j] for j in idx]
        steps = np.diff(vals)
        if not (np.all(steps >= 0) or np.all(steps <= 0)):
            out.append(row[0])
    return out


# G3: atom-wall trap shift ------------------------------------------------

def _atom_kernel(wall, atom, z, order, span):
    """xi -> [A(xi), A''(xi)] with U = -k_B T sum' A and U'' = -k_B T sum' A''.

    A(xi) = alpha(i xi) int dk k g0 exp(-2 g0 z) [2 r_TM - x (r_TM + r_TE)],
    x = xi^2/(g0 c)^2, which is the per-atom energy of a rarefied medium
    facing the wall.  The substitution u = 2 z g0 gives
    (1/8 z^3) int u^2 exp(-u) [...] du; two z-derivatives bring u^2/z^2.
    """
    s, ws = graded_rule(span, order)
    vac = DielectricModel.vacuum()

    def kernel(xi):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        u0 = (2.0 * z * xi / C)[:, None]
        u = u0 + s[None, :]
        k = np.sqrt(s * (s + 2.0 * u0)) / (2.0 * z)
        r_tm, r_te = _interface_imag(vac, wall, k, xi[:, None])
        x = (u0 / u) ** 2
        g = (2.0 * r_tm - x * (r_tm + r_te)) * np.exp(-u) * ws
        alpha = atom.polarizability(xi)
        a0 = (g * u ** 2).sum(axis=1) / (8.0 * z ** 3)
        a2 = (g * u ** 4).sum(axis=1) / (8.0 * z ** 5)
        return np.vstack([alpha * a0, alpha * a2])

    return kernel


def atom_wall_potential(wall, atom, z, thermal, settings=DEFAULT_SETTINGS, with_error=False):
    """Free energy U(z) of the atom and its second derivative U''(z).

    ``thermal`` is a matsubara ThermalSpec, or a saturated one whose static term
    is Lorentz broadened.  Returns (U, U'') in J and J/m^2, plus the
    estimated relative error when ``with_error`` is set.
    """
    if not z > 0:
        raise DomainError("z must be > 0")
    if atom.alpha0 == 0:
        return (0.0, 0.0, 0.0) if with_error else (0.0, 0.0)
    if atom.alpha0 / (4.0 * z ** 3) > 0.01:
        warnings.warn(f"alpha0/z^3 too large at z = {z:g} m; linear response is inaccurate",
                      RarefiedLimitWarning, stacklevel=2)
    total, err = thermal_sum(lambda order: _atom_kernel(wall, atom, z, order, settings.span),
                             thermal, settings.span * C / z, settings, where={"z": z})
    out = (-KB * thermal.T * total[0], -KB * thermal.T * total[1])
    return out + (err,) if with_error else out


def trap_shift(wall, atom, z, thermal, settings=DEFAULT_SETTINGS, with_error=False):
    """Fractional trap-frequency shift U''(z)/(2 m w0^2) for a point atom."""
    _, u2, err = atom_wall_potential(wall, atom, z, thermal, settings, with_error=True)
    shift = u2 / (2.0 * atom.mass * atom.trap_omega ** 2)
    return (shift, err) if with_error else shift


def g3_trap_shift(z_grid, wall, atom=RB87, T=310.0, D_list=(1e-12, 1e-11, 1e-10),
                  settings=DEFAULT_SETTINGS, workers=None):
    """Fractional trap-frequency shift versus atom-wall separation.

    Columns: ``z_m``, ``included`` (wall carriers kept, ordinary
    statistics), ``neglected`` (carriers removed) and one ``D=<value>``
    column per saturated variant with the carriers kept.
    """
    z_grid = _check_grid(z_grid, "z")
    D_list = tuple(float(D) for D in D_list)
    if any(D <= 0 for D in D_list):
        raise DomainError("saturated D values must be > 0")
    bare = wall.without_carriers()
    plain = ThermalSpec(T, 0.0, "matsubara")

    def point(z):
        cases = [(wall, plain), (bare, plain)] + [(wall, ThermalSpec(T, D, "saturated")) for D in D_list]
        out = [trap_shift(w, atom, z, th, settings, with_error=True) for w, th in cases]
        return (z,) + tuple(v for v, _ in out), {"x": z, "max_rel_error": max(e for _, e in out),
                                                "max_terms": 0}

    rows, diags = _split(parallel_map(point, z_grid, workers))
    return SweepResult(("z_m", "included", "neglected") + tuple(_label(D) for D in D_list), rows, {
        "scenario": {"name": "g3", "T": T, "D": list(D_list), "rtol": settings.rtol,
                     "wall": model_to_dict(wall),
                     "atom": {"alpha0": atom.alpha0, "omega_a": atom.omega_a,
                              "mass": atom.mass, "trap_omega": atom.trap_omega}}}, diags)
