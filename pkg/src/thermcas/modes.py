"""Normal-mode functions of a planar cavity: gamma, Fresnel amplitudes, f(k, w).

Two families of functions are provided.  The ``*_imag`` variants work on
the imaginary frequency axis w = i xi with real arithmetic (everything is
real there for passive media) and handle xi = 0 through the analytic
zero-frequency limits of each model.  The plain variants take a complex
frequency in the closed upper half plane and are used on the real axis and
on deformed contours.

Medium labels follow the cavity convention: bodies 1 and 2, gap medium 0.
"""

from dataclasses import dataclass
import enum
import math

import numpy as np
from scipy.optimize import brentq

from .dielectric import DielectricModel
from .errors import DomainError, SingularInterfaceError
from .units import C


class Polarization(str, enum.Enum):
    TM = "TM"
    TE = "TE"


POLARIZATIONS = (Polarization.TM, Polarization.TE)


@dataclass(frozen=True)
class LayerStack:
    medium1: DielectricModel
    medium0: DielectricModel
    medium2: DielectricModel
    d: float

    def __post_init__(self):
        if not (self.d > 0 and math.isfinite(self.d)):
            raise DomainError(f"gap width must be > 0, got {self.d!r}")

    @classmethod
    def symmetric(cls, body, d, gap=None):
        return cls(body, gap or DielectricModel.vacuum(), body, d)

    def at(self, d):
        return LayerStack(self.medium1, self.medium0, self.medium2, d)

    def swapped(self):
        return LayerStack(self.medium2, self.medium0, self.medium1, self.d)

    @property
    def dissipationless(self):
        return all(m.dissipationless for m in (self.medium0, self.medium1, self.medium2))


# imaginary axis ----------------------------------------------------------

def _eps_and_xi2eps(model, xi):
    """eps(i xi) and xi^2 eps(i xi) with the xi -> 0 limits filled in."""
    xi = np.asarray(xi, dtype=float)
    if model.is_ideal:
        return np.full(xi.shape, math.inf), np.full(xi.shape, math.inf)
    zero = xi == 0
    if not zero.any():
        eps = model._eval_imag(xi)
        return eps, xi * xi * eps
    safe = np.where(zero, 1.0, xi)
    eps = model._eval_imag(safe)
    return (np.where(zero, model.static_limit(), eps),
            np.where(zero, model.xi2eps_limit(), safe * safe * eps))


def gamma_imag(model, k, xi):
    """sqrt(k^2 + eps(i xi) xi^2 / c^2), real and >= k for eps >= 0."""
    if np.any(np.asarray(k) < 0):
        raise DomainError("k must be >= 0")
    _, x2e = _eps_and_xi2eps(model, xi)
    return np.sqrt(np.asarray(k, dtype=float) ** 2 + x2e / C ** 2)


def _interface_imag(mi, mj, k, xi):
    """(r_TM, r_TE) for the interface i -> j on the imaginary axis."""
    k = np.asarray(k, dtype=float)
    xi = np.asarray(xi, dtype=float)
    shape = np.broadcast(k, xi).shape
    if mi.is_ideal:
        raise SingularInterfaceError("incident medium cannot be an ideal metal")
    if mj.is_ideal:
        return np.ones(shape), -np.ones(shape)
    ei, x2ei = _eps_and_xi2eps(mi, xi)
    ej, x2ej = _eps_and_xi2eps(mj, xi)
    gi = np.sqrt(k * k + x2ei / C ** 2)
    gj = np.sqrt(k * k + x2ej / C ** 2)
    with np.errstate(invalid="ignore", divide="ignore"):
        # ratio form keeps eps_j = inf (conductor at xi = 0) finite
        q = np.where(np.isinf(ej), 0.0, ei / np.where(np.isinf(ej), 1.0, ej))
        den_tm = gi + q * gj
        r_tm = (gi - q * gj) / den_tm
        den_te = (gi + gj) ** 2
        r_te = (x2ei - x2ej) / C ** 2 / den_te
    if np.any(den_tm == 0) or np.any(den_te == 0):
        # k = 0 and xi = 0 together: both amplitudes are 0/0
        bad = (den_tm == 0) | (den_te == 0)
        r_tm = np.where(bad, 0.0, r_tm)
        r_te = np.where(bad, 0.0, r_te)
    return np.broadcast_to(r_tm, shape), np.broadcast_to(r_te, shape)


def fresnel_tm_imag(mi, mj, k, xi):
    return _interface_imag(mi, mj, k, xi)[0]


def fresnel_te_imag(mi, mj, k, xi):
    return _interface_imag(mi, mj, k, xi)[1]


def reflection_products_imag(stack, k, xi):
    """r01 r02 for TM and TE on the imaginary axis."""
    tm1, te1 = _interface_imag(stack.medium0, stack.medium1, k, xi)
    tm2, te2 = _interface_imag(stack.medium0, stack.medium2, k, xi)
    return tm1 * tm2, te1 * te2


def mode_condition_imag(stack, pol, k, xi):
    """f(k, i xi) = 1 - exp(-2 gamma_0 d) r01 r02; real and positive for passive media."""
    g0 = gamma_imag(stack.medium0, k, xi)
    rr_tm, rr_te = reflection_products_imag(stack, k, xi)
    rr = rr_tm if Polarization(pol) is Polarization.TM else rr_te
    return 1.0 - np.exp(-2.0 * g0 * stack.d) * rr


# complex frequency -------------------------------------------------------

def _branch(z):
    """Principal square root (Re >= 0); on the cut pick Im <= 0."""
    g = np.sqrt(np.asarray(z, dtype=complex))
    return np.where((g.real == 0) & (g.imag > 0), -g, g)


def gamma(model, k, omega):
    """sqrt(k^2 - eps(w) w^2 / c^2) for complex w, branch Re >= 0 (Im <= 0 on ties)."""
    if np.any(np.asarray(k) < 0):
        raise DomainError("k must be >= 0")
    omega = np.asarray(omega, dtype=complex)
    k = np.asarray(k, dtype=float)
    if model.is_ideal:
        return np.full(np.broadcast(k, omega).shape, complex(math.inf))
    return _branch(k * k - model.eval_complex(omega) * omega * omega / C ** 2)


def _interface(mi, mj, k, omega):
    k = np.asarray(k, dtype=float)
    omega = np.asarray(omega, dtype=complex)
    shape = np.broadcast(k, omega).shape
    if mi.is_ideal:
        raise SingularInterfaceError("incident medium cannot be an ideal metal")
    if mj.is_ideal:
        return np.ones(shape, complex), -np.ones(shape, complex)
    ei = mi.eval_complex(omega)
    ej = mj.eval_complex(omega)
    w2 = omega * omega / C ** 2
    gi = _branch(k * k - ei * w2)
    gj = _branch(k * k - ej * w2)
    den_tm = ej * gi + ei * gj
    den_te = (gi + gj) ** 2
    if np.any(den_tm == 0) or np.any(den_te == 0):
        raise SingularInterfaceError("vanishing Fresnel denominator")
    r_tm = (ej * gi - ei * gj) / den_tm
    r_te = (ej - ei) * w2 / den_te
    return np.broadcast_to(r_tm, shape), np.broadcast_to(r_te, shape)


def fresnel_tm(mi, mj, k, omega):
    """(eps_j g_i - eps_i g_j) / (eps_j g_i + eps_i g_j)."""
    return _interface(mi, mj, k, omega)[0]


def fresnel_te(mi, mj, k, omega):
    """(g_i - g_j) / (g_i + g_j), written as (eps_j - eps_i) w^2/c^2 / (g_i + g_j)^2."""
    return _interface(mi, mj, k, omega)[1]


def reflection_products(stack, k, omega):
    tm1, te1 = _interface(stack.medium0, stack.medium1, k, omega)
    tm2, te2 = _interface(stack.medium0, stack.medium2, k, omega)
    return tm1 * tm2, te1 * te2


def mode_condition(stack, pol, k, omega):
    """f(k, w) = 1 - exp(-2 gamma_0 d) r01 r02 at complex w."""
    g0 = gamma(stack.medium0, k, omega)
    rr_tm, rr_te = reflection_products(stack, k, omega)
    rr = rr_tm if Polarization(pol) is Polarization.TM else rr_te
    return 1.0 - np.exp(-2.0 * g0 * stack.d) * rr


# dispersion curves -------------------------------------------------------

@dataclass(frozen=True)
class BranchPoint:
    k: float
    omega: float
    channel: Polarization
    kind: str  # "propagating" or "evanescent"
    branch: int


@dataclass
class DispersionResult:
    points: list
    failures: list  # (k, channel, kind, message)
    omega_s: float
    d: float

    def branches(self, channel=None, kind=None):
        ids = {p.branch for p in self.points
               if (channel is None or p.channel == channel) and (kind is None or p.kind == kind)}
        return sorted(ids)

    def to_rows(self):
        rows = []
        for p in self.points:
            rows.append((p.k * self.d / math.pi, p.omega / self.omega_s,
                         p.channel.value, p.kind, p.branch))
        return rows


def _half_amplitude(stack, pol, k, omega):
    """exp(-gamma_0 d) r for a symmetric cavity; f = (1 - q)(1 + q)."""
    g0 = gamma(stack.medium0, k, omega)
    tm, te = _interface(stack.medium0, stack.medium1, k, omega)
    r = tm if pol is Polarization.TM else te
    return np.exp(-g0 * stack.d) * r


def _plasma_frequency(model):
    return math.sqrt(sum(t.omega_p ** 2 for t in model.drude))


def dispersion_solve(stack, pol, k_grid, n_scan=512, rtol=1e-12):
    """Real normal-mode frequencies of a lossless symmetric cavity.

    For every k the interval below the transverse bulk boundary
    sqrt(wp^2 + c^2 k^2) is scanned on a log-spaced grid of ``n_scan``
    points, separately in the evanescent (w < ck) and propagating (w > ck)
    regions, and each sign change is refined with Brent's method.  In the
    evanescent region q = exp(-gamma_0 d) r is real and roots are zeros of
    1 - q and 1 + q, each scanned with the Fresnel denominator cleared so
    that the closely spaced pair near w_s is never separated only by a
    pole.  In the propagating region |q| = 1 and roots are zeros of Im q;
    sign changes through a pole of q are rejected by checking q at the
    refined point.  Roots are linked into branches by nearest-neighbour
    continuation from the previous k, separately for modes even (q = 1)
    and odd (q = -1) in the gap.
    """
    pol = Polarization(pol)
    if not stack.dissipationless:
        raise DomainError("dispersion_solve needs dissipationless media")
    if stack.medium1 != stack.medium2:
        raise DomainError("dispersion_solve handles symmetric cavities only")
    k_grid = np.asarray(k_grid, dtype=float)
    if np.any(np.diff(k_grid) <= 0) or np.any(k_grid <= 0):
        raise DomainError("k grid must be positive and strictly increasing")
    wp = _plasma_frequency(stack.medium1)
    if wp == 0:
        raise DomainError("body has no plasma frequency")
    omega_s = wp / math.sqrt(2.0)

    points, failures = [], []
    previous = {}
    next_id = 0
    k_prev = None
    for k in k_grid:
        light = C * k
        # branches move by at most about c dk between grid points
        reach = 0.0 if k_prev is None else 1.5 * C * (k - k_prev)
        k_prev = k
        bulk = math.sqrt(wp ** 2 + light ** 2)
        found = {}
        for kind, lo, hi in (("evanescent", light * 1e-6, light), ("propagating", light, bulk)):
            roots = []
            try:
                roots = _scan_roots(stack, pol, k, lo, hi, kind, n_scan, rtol)
            except (ArithmeticError, ValueError) as exc:
                failures.append((k, pol, kind, str(exc)))
            for parity in (1, -1):
                # continuation: link to the closest root of the previous k
                prev = previous.get((kind, parity), [])
                ids = []
                taken = set()
                for w in (w for w, par in roots if par == parity):
                    best, best_dist = None, None
                    for bid, wprev in prev:
                        if bid in taken:
                            continue
                        dist = abs(w - wprev)
                        if best is None or dist < best_dist:
                            best, best_dist = bid, dist
                    if best is None or best_dist > max(0.2 * w, reach):
                        best = next_id
                        next_id += 1
                    taken.add(best)
                    ids.append((best, w))
                    points.append(BranchPoint(float(k), float(w), pol, kind, best))
                found[(kind, parity)] = ids
        previous = found
    return DispersionResult(points, failures, omega_s, stack.d)


def _pole_free(stack, pol, k, omega, parity):
    """(eps_i g_0 + eps_0 g_1) (1 - parity q): the mode factor with the
    Fresnel denominator cleared, so no pole sits between nearby roots.

    Real on the evanescent side for metals; NaN where g_1 is not real.
    """
    omega = np.asarray(omega, dtype=float)
    e0 = stack.medium0.eval_complex(omega).real
    e1 = stack.medium1.eval_complex(omega).real
    g0_sq = k * k - e0 * omega ** 2 / C ** 2
    g1_sq = k * k - e1 * omega ** 2 / C ** 2
    with np.errstate(invalid="ignore"):
        g0 = np.sqrt(g0_sq)
        g1 = np.where(g1_sq >= 0, np.sqrt(np.abs(g1_sq)), np.nan)
    e = np.exp(-g0 * stack.d)
    if pol is Polarization.TM:
        return e1 * g0 * (1.0 - parity * e) + e0 * g1 * (1.0 + parity * e)
    return g0 * (1.0 - parity * e) + g1 * (1.0 + parity * e)


def _scan_roots(stack, pol, k, lo, hi, kind, n_scan, rtol):
    """Roots in (lo, hi) as (omega, parity) pairs; parity +1 for q = 1."""
    edge = 1e-9
    grid = np.geomspace(lo * (1 + edge), hi * (1 - edge), n_scan)
    rtol = max(rtol, 4 * np.finfo(float).eps)
    roots = []
    if kind == "evanescent":
        # 1 - q^2 = (1 - q)(1 + q); each factor is scanned in pole-free form
        for parity in (1, -1):
            vals = _pole_free(stack, pol, k, grid, parity)
            for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
                w = brentq(lambda x: float(_pole_free(stack, pol, k, x, parity)),
                           grid[i], grid[i + 1], xtol=1e-300, rtol=rtol, maxiter=400)
                roots.append((w, parity))
        return sorted(roots)

    def h(w):
        return float(np.imag(_half_amplitude(stack, pol, k, w)))

    vals = np.imag(_half_amplitude(stack, pol, k, grid))
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        w = brentq(h, grid[i], grid[i + 1], xtol=1e-300, rtol=rtol, maxiter=400)
        qw = complex(_half_amplitude(stack, pol, k, w))
        # a genuine mode has q = +-1; a pole of q shows up as a huge |q|
        if abs(abs(qw) - 1.0) < 1e-6 and abs(abs(qw.real) - 1.0) < 1e-6:
            roots.append((w, 1 if qw.real > 0 else -1))
    return roots
