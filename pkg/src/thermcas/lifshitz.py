"""Lifshitz interaction energy and pressure between two planar bodies.

Four evaluators share one inner kernel, the transverse-momentum integral

    Lambda(w) = int_0^inf dk k sum_pol ln f(k, w),

and its distance derivative.  They differ in how the frequency dependence
is handled:

``zero-t``
    hbar/(4 pi^2) int_0^inf dxi Lambda(i xi).
``matsubara``
    k_B T/(2 pi) sum'_n Lambda(i xi_n), xi_n = 2 pi n k_B T/hbar, half
    weight on n = 0.
``real-axis``
    hbar/(2 pi^2) Im int_0^inf dw [n(w) + 1/2] Lambda(w) with the Bose
    factor, or its damped form n~(w) = 1/(exp(hbar w/k_B T + D) - 1).
    The contour is rotated by ``ray_angle`` into the first quadrant,
    where the integrand is smooth and decays; for D = 0 the half residue
    of the Bose pole at w = 0 is added back exactly.
``saturated``
    The Matsubara sum with terms replaced by Lorentzian averages of
    half-width D k_B T/hbar.  ``broaden="zero"`` replaces only the n = 0
    term; ``broaden="full"`` replaces every term, which is the same
    quantity as ``real-axis`` with the damped distribution.

All evaluators return TM and TE parts separately and compute the pressure
F = -dV/dd from the analytic derivative d ln f/dd = 2 gamma_0 x/(1 - x),
x = exp(-2 gamma_0 d) r01 r02.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np

from .errors import ConvergenceError, DomainError
from .modes import LayerStack, _eps_and_xi2eps, gamma, reflection_products, reflection_products_imag
from .quadrature import graded_rule, log_rule, two_sided_rule
from .units import C, HBAR, KB, matsubara_step, thermal_rate

EVALUATORS = ("zero-t", "matsubara", "real-axis", "saturated")


@dataclass(frozen=True)
class ThermalSpec:
    T: float = 0.0
    D: float = 0.0
    evaluator: str = "matsubara"
    broaden: str = "zero"

    def __post_init__(self):
        if self.evaluator not in EVALUATORS:
            raise DomainError(f"unknown evaluator {self.evaluator!r}")
        if not (self.T >= 0 and math.isfinite(self.T)):
            raise DomainError("T must be finite and >= 0")
        if not (self.D >= 0 and math.isfinite(self.D)):
            raise DomainError("D must be finite and >= 0")
        if self.T == 0 and self.evaluator not in ("zero-t", "real-axis"):
            raise DomainError(f"evaluator {self.evaluator} needs T > 0")
        if self.D > 0 and self.evaluator not in ("real-axis", "saturated"):
            raise DomainError(f"D > 0 has no meaning for evaluator {self.evaluator}")
        if self.broaden not in ("zero", "full"):
            raise DomainError("broaden must be 'zero' or 'full'")


@dataclass(frozen=True)
class Settings:
    rtol: float = 1e-6
    matsubara_tail: float = 1e-8
    max_terms: int = 100_000
    orders: tuple = (8, 12, 16, 24, 32)
    ray_angle: float = math.pi / 4
    span: float = 64.0


DEFAULT_SETTINGS = Settings()


@dataclass(frozen=True)
class EnergyBreakdown:
    V_total: float
    V_TM: float
    V_TE: float
    n_matsubara_used: int = 0
    k_points: int = 0
    est_rel_error: float = 0.0


@dataclass(frozen=True)
class PressureBreakdown:
    F_total: float
    F_TM: float
    F_TE: float
    n_matsubara_used: int = 0
    k_points: int = 0
    est_rel_error: float = 0.0


@dataclass(frozen=True)
class _Eval:
    parts: tuple  # (V_TM, V_TE, F_TM, F_TE)
    n_used: int = 0
    k_points: int = 0
    err: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def energy(self):
        v_tm, v_te = self.parts[0], self.parts[1]
        return EnergyBreakdown(v_tm + v_te, v_tm, v_te, self.n_used, self.k_points, self.err)

    def pressure(self):
        f_tm, f_te = self.parts[2], self.parts[3]
        return PressureBreakdown(f_tm + f_te, f_tm, f_te, self.n_used, self.k_points, self.err)


# distributions -----------------------------------------------------------

def damped_bose(omega, T, D=0.0):
    """Occupation 1/(exp(hbar w/k_B T + D) - 1) for real w >= 0.

    D = 0 gives the Bose function; w = 0 is finite only when D > 0.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0) or D < 0 or T < 0:
        raise DomainError("omega, T and D must be >= 0")
    if D == 0 and np.any(w == 0) and T > 0:
        raise DomainError("Bose function diverges at omega = 0 with D = 0")
    if T == 0:
        out = np.zeros_like(w)
    else:
        with np.errstate(over="ignore"):
            out = 1.0 / np.expm1(HBAR * w / (KB * T) + D)
    return float(out) if out.ndim == 0 else out


def _bose_complex(z):
    """1/(exp(z) - 1) for Re z > 0, written to avoid overflow."""
    return np.exp(-z) / -np.expm1(-z)


# inner kernels -----------------------------------------------------------

_CHUNK = 200_000


def _k_integrals_imag(stack, xi, order, span):
    """Lambda and dLambda/dd per polarization at imaginary frequencies.

    Returns an array of shape (4, len(xi)): Lambda_TM, Lambda_TE,
    dLambda_TM/dd, dLambda_TE/dd.  The substitution u = 2 d gamma_0 puts
    the integrand into exp(-u) form.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    d = stack.d
    s, ws = graded_rule(span, order)
    _, x2e0 = _eps_and_xi2eps(stack.medium0, xi)
    u0_all = 2.0 * d * np.sqrt(x2e0) / C
    out = np.empty((4, xi.size))
    step = max(1, _CHUNK // s.size)
    for lo in range(0, xi.size, step):
        sl = slice(lo, lo + step)
        u0 = u0_all[sl, None]
        u = u0 + s[None, :]
        k = np.sqrt(s * (s + 2.0 * u0)) / (2.0 * d)
        rr = reflection_products_imag(stack, k, xi[sl, None])
        e = np.exp(-u)
        for j, r in enumerate(rr):
            x = e * r
            out[j, sl] = (ws * u * np.log1p(-x)).sum(axis=1) / (4.0 * d * d)
            out[2 + j, sl] = (ws * u * u * (x / (1.0 - x))).sum(axis=1) / (4.0 * d ** 3)
    return out


def _k_integrals_complex(stack, omega, order, span):
    """Complex-frequency version of :func:`_k_integrals_imag`.

    k is mapped through u = 2 d sqrt(k^2 + |w|^2/c^2); gamma_0 itself is
    complex and computed exactly.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=complex))
    d = stack.d
    s, ws = graded_rule(span, order)
    u0_all = 2.0 * d * np.abs(omega) / C
    out = np.empty((4, omega.size), dtype=complex)
    step = max(1, _CHUNK // s.size)
    for lo in range(0, omega.size, step):
        sl = slice(lo, lo + step)
        u0 = u0_all[sl, None]
        w = omega[sl, None]
        k = np.sqrt(s * (s + 2.0 * u0)) / (2.0 * d)
        jac = ws * (s + u0) / (4.0 * d * d)
        g0 = gamma(stack.medium0, k, w)
        e = np.exp(-2.0 * g0 * d)
        rr = reflection_products(stack, k, w)
        for j, r in enumerate(rr):
            x = e * r
            out[j, sl] = (jac * np.log1p(-x)).sum(axis=1)
            out[2 + j, sl] = (jac * 2.0 * g0 * (x / (1.0 - x))).sum(axis=1)
    return out


def _as_parts(pref, lam):
    """(V_TM, V_TE, F_TM, F_TE) from prefactor and summed kernel values."""
    return (pref * lam[0], pref * lam[1], -pref * lam[2], -pref * lam[3])


# evaluators at a fixed quadrature order ----------------------------------

def _zero_t(stack, st, order):
    d = stack.d
    t, wt = graded_rule(st.span, order)
    xi = C * t / (2.0 * d)
    lam = _k_integrals_imag(stack, xi, order, st.span) @ wt
    pref = HBAR / (4.0 * math.pi ** 2) * C / (2.0 * d)
    return _as_parts(pref, lam), 0, t.size * graded_rule(st.span, order)[0].size


def _stack_kernel(stack, st, order):
    return lambda xi: _k_integrals_imag(stack, xi, order, st.span)


def _matsubara_terms(kernel, T, st, first=0, weights=None, where=None):
    """Sum kernel(xi_n) over n >= first until the tail criterion holds.

    ``kernel`` maps an array of imaginary frequencies to an array of shape
    (m, len(xi)).  ``weights`` maps n -> weight for terms that are not 1
    (the n = 0 half).  Returns (sum of shape (m,), number of terms used).
    """
    step = matsubara_step(T)
    acc = None
    n = first
    quiet = 0
    block = 16
    while True:
        ns = np.arange(n, n + block)
        lam = kernel(ns * step)
        if acc is None:
            acc = np.zeros(lam.shape[0])
        for j, m in enumerate(ns):
            w = 1.0 if weights is None else weights.get(int(m), 1.0)
            term = w * lam[:, j]
            acc = acc + term
            big = np.abs(acc).max()
            if big == 0 or np.abs(term).max() < st.matsubara_tail * big:
                quiet += 1
            else:
                quiet = 0
            if quiet >= 3:
                return acc, int(m) + 1
            if m + 1 >= st.max_terms:
                raise ConvergenceError(f"Matsubara sum not converged after {st.max_terms} terms",
                                       partial=acc, where={**(where or {}), "n": int(m), "T": T})
        n += block
        block = min(2 * block, 256)


def _matsubara(stack, th, st, order):
    acc, n_used = _matsubara_terms(_stack_kernel(stack, st, order), th.T, st,
                                   weights={0: 0.5}, where={"d": stack.d})
    pref = KB * th.T / (2.0 * math.pi)
    return _as_parts(pref, acc), n_used, graded_rule(st.span, order)[0].size


def _real_axis(stack, th, st, order):
    d = stack.d
    phi = st.ray_angle
    direction = complex(math.cos(phi), math.sin(phi))
    t, wt = graded_rule(st.span / math.sin(phi), order)
    omega = C * t / (2.0 * d) * direction
    lam = _k_integrals_complex(stack, omega, order, st.span)
    occ = np.full(omega.shape, 0.5, dtype=complex)
    if th.T > 0:
        occ = occ + _bose_complex(HBAR * omega / (KB * th.T) + th.D)
    total = ((lam * (occ * direction)) @ wt).imag * C / (2.0 * d)
    if th.T > 0 and th.D == 0:
        # half residue of the Bose pole at w = 0, swept by the rotation
        lam0 = _k_integrals_imag(stack, np.zeros(1), order, st.span)[:, 0]
        total = total + phi * thermal_rate(th.T) * lam0
    pref = HBAR / (2.0 * math.pi ** 2)
    return _as_parts(pref, total), 0, t.size * graded_rule(st.span, order)[0].size


def _lorentz_zero_term(kernel, width, xi_hi, order):
    """int_0^inf (2/pi) w/(xi^2 + w^2) kernel(xi) dxi, on a log grid.

    Below xi_lo = 1e-7 min(w, xi_hi) the kernel is replaced by its value at
    zero and above ``xi_hi`` by 0; both tails carry the exact arctan mass.
    """
    xi_lo = min(width, xi_hi) * 1e-7
    xi, wx = log_rule(xi_lo, xi_hi, order)
    kern = (2.0 / math.pi) * width / (xi * xi + width * width) * wx
    low = (2.0 / math.pi) * math.atan(xi_lo / width)
    return kernel(xi) @ kern + low * kernel(np.zeros(1))[:, 0]


def lorentz_mass(stack, T, D, order=8, settings=DEFAULT_SETTINGS):
    """Mass of the n = 0 Lorentzian kernel as discretized by ``saturated``.

    The evaluator's own quadrature is applied to a unit stub integrand and
    the analytic mass of the discarded upper tail is added back.
    """
    width = D * thermal_rate(T)
    xi_hi = settings.span * C / stack.d
    ones = _lorentz_zero_term(lambda xi: np.ones((1, np.size(xi))), width, xi_hi, order)[0]
    return float(ones + 1.0 - (2.0 / math.pi) * math.atan(xi_hi / width))


def _comb_window(stack, T, D, n, st, order):
    """Kernel-weighted Lambda over the n-th period of the Lorentzian comb.

    The comb sum_m L(xi - xi_m) integrates to the map
    phi = 2 atan(coth(D/2) tan(theta/2)), theta = hbar xi/k_B T - 2 pi n,
    under which the kernel is flat: the window integral is
    (1/2 pi) int Lambda d phi over [-pi, pi] ([0, pi] for n = 0).
    """
    th = math.tanh(D / 2.0)
    first = max(1e-14, 1e-7 * th)
    if n == 0:
        phi, wphi = two_sided_rule(0.0, math.pi, order, first)
    else:
        phi, wphi = two_sided_rule(-math.pi, math.pi, order, first)
    theta = 2.0 * np.arctan(th * np.tan(0.5 * phi))
    xi = (2.0 * math.pi * n + theta) / (HBAR / (KB * T))
    xi = np.maximum(xi, 0.0)
    return _k_integrals_imag(stack, xi, order, st.span) @ wphi / (2.0 * math.pi)


def _saturated(stack, th, st, order):
    T, D = th.T, th.D
    pref = KB * T / (2.0 * math.pi)
    if D == 0:
        return _matsubara(stack, th, st, order)
    if th.broaden == "zero":
        kernel = _stack_kernel(stack, st, order)
        b0 = _lorentz_zero_term(kernel, D * thermal_rate(T), st.span * C / stack.d, order)
        rest, n_used = _matsubara_terms(kernel, T, st, first=1, where={"d": stack.d, "D": D})
        acc = 0.5 * b0 + rest
        return _as_parts(pref, acc), n_used, graded_rule(st.span, order)[0].size
    acc = np.zeros(4)
    n = 0
    quiet = 0
    while True:
        term = _comb_window(stack, T, D, n, st, order)
        acc = acc + term
        big = np.abs(acc).max()
        quiet = quiet + 1 if big == 0 or np.abs(term).max() < st.matsubara_tail * big else 0
        n += 1
        if quiet >= 3:
            break
        if n >= st.max_terms:
            raise ConvergenceError("broadened sum not converged", partial=acc,
                                   where={"d": stack.d, "n": n, "D": D})
    return _as_parts(pref, acc), n, graded_rule(st.span, order)[0].size


_DISPATCH = {"zero-t": lambda s, th, st, p: _zero_t(s, st, p),
             "matsubara": _matsubara,
             "real-axis": _real_axis,
             "saturated": _saturated}


@lru_cache(maxsize=4096)
def evaluate(stack, thermal, settings=DEFAULT_SETTINGS):
    """Energy and pressure together, refined in quadrature order until the
    relative change drops below ``settings.rtol``."""
    if not isinstance(stack, LayerStack):
        raise TypeError("stack must be a LayerStack")
    fn = _DISPATCH[thermal.evaluator]
    prev = None
    err = math.inf
    for order in settings.orders:
        parts, n_used, kpts = fn(stack, thermal, settings, order)
        parts = tuple(float(p) for p in parts)
        if prev is not None:
            err = _rel_change(prev, parts)
            if err <= settings.rtol:
                return _Eval(parts, n_used, kpts, err)
        prev = parts
    raise ConvergenceError(
        f"{thermal.evaluator} quadrature not converged (rel change {err:.2e})",
        partial=_Eval(prev, n_used, kpts, err),
        where={"d": stack.d, "T": thermal.T, "D": thermal.D})


def _rel_change(a, b):
    va, vb = a[0] + a[1], b[0] + b[1]
    fa, fb = a[2] + a[3], b[2] + b[3]
    errs = []
    for x, y in ((va, vb), (fa, fb)):
        scale = abs(y)
        errs.append(0.0 if x == y else (abs(x - y) / scale if scale else math.inf))
    return max(errs)


def _refine(fn, settings, where):
    """Run ``fn(order)`` over ``settings.orders`` until the max relative
    change of its array output drops below ``settings.rtol``."""
    prev = None
    err = math.inf
    for order in settings.orders:
        cur = np.asarray(fn(order), dtype=float)
        if prev is not None:
            scale = np.abs(cur).max()
            err = 0.0 if scale == 0 else float(np.abs(cur - prev).max() / scale)
            if err <= settings.rtol:
                return cur, err
        prev = cur
    raise ConvergenceError(f"quadrature not converged (rel change {err:.2e})",
                           partial=prev, where=where)


def matsubara_term(stack, T, n, settings=DEFAULT_SETTINGS):
    """Contribution of the single Matsubara term n to the free energy.

    The n = 0 term carries its half weight, so summing this over all n
    reproduces :func:`energy_matsubara`.
    """
    if T <= 0 or n < 0:
        raise DomainError("need T > 0 and n >= 0")
    xi = np.array([n * matsubara_step(T)])
    lam, err = _refine(lambda p: _k_integrals_imag(stack, xi, p, settings.span)[:, 0],
                       settings, {"d": stack.d, "n": n, "T": T})
    pref = KB * T / (2.0 * math.pi) * (0.5 if n == 0 else 1.0)
    return _Eval(tuple(float(p) for p in _as_parts(pref, lam)), 1, 0, err).energy()


def thermal_sum(kernel_at_order, thermal, xi_hi, settings=DEFAULT_SETTINGS, where=None):
    """Primed Matsubara sum of an arbitrary imaginary-frequency kernel.

    ``kernel_at_order(order)`` must return a callable mapping an array of
    xi to an array of shape (m, len(xi)).  With the ``saturated``
    evaluator the n = 0 term is replaced by its Lorentzian average, the
    kernel being treated as negligible above ``xi_hi``.  Only zero-term
    broadening is supported here.  The k_B T prefactor is not applied.

    Returns (sum of shape (m,), estimated relative error).
    """
    T, D = thermal.T, thermal.D
    if thermal.evaluator not in ("matsubara", "saturated") or T <= 0:
        raise DomainError("thermal_sum needs a matsubara or saturated ThermalSpec with T > 0")
    if thermal.broaden != "zero":
        raise DomainError("thermal_sum broadens the n = 0 term only")
    where = dict(where or {}, D=D)

    def at_order(order):
        kernel = kernel_at_order(order)
        if D == 0:
            return _matsubara_terms(kernel, T, settings, weights={0: 0.5}, where=where)[0]
        b0 = _lorentz_zero_term(kernel, D * thermal_rate(T), xi_hi, order)
        rest, _ = _matsubara_terms(kernel, T, settings, first=1, where=where)
        return 0.5 * b0 + rest

    return _refine(at_order, settings, where)


# public API --------------------------------------------------------------

def energy_zero_t(stack, settings=DEFAULT_SETTINGS):
    return evaluate(stack, ThermalSpec(0.0, 0.0, "zero-t"), settings).energy()


def energy_matsubara(stack, thermal, settings=DEFAULT_SETTINGS):
    if thermal.evaluator != "matsubara":
        thermal = ThermalSpec(thermal.T, 0.0, "matsubara")
    return evaluate(stack, thermal, settings).energy()


def energy_real_axis(stack, thermal, settings=DEFAULT_SETTINGS):
    if thermal.evaluator != "real-axis":
        thermal = ThermalSpec(thermal.T, thermal.D, "real-axis")
    return evaluate(stack, thermal, settings).energy()


def energy_saturated(stack, thermal, settings=DEFAULT_SETTINGS):
    if thermal.evaluator != "saturated":
        thermal = ThermalSpec(thermal.T, thermal.D, "saturated", thermal.broaden)
    return evaluate(stack, thermal, settings).energy()


def energy(stack, thermal, settings=DEFAULT_SETTINGS):
    return evaluate(stack, thermal, settings).energy()


def pressure(stack, thermal, settings=DEFAULT_SETTINGS):
    """F = -dV/dd in N/m^2; negative for attraction."""
    return evaluate(stack, thermal, settings).pressure()
