"""Permittivity models on the imaginary and real frequency axes.

All models share one analytic form,

    eps(w) = 1 - sum_j wp_j^2 / (w (w + i nu_j))
               + sum_j s_j w_j^2 / (w_j^2 - w^2 - i g_j w)
               + 4 pi i sigma / w,

so that eps(i xi) = 1 + sum wp^2/(xi (xi + nu)) + sum s w0^2/(w0^2 + xi^2 + g xi)
+ 4 pi sigma / xi.  The ``kind`` label only restricts which terms may be
present.  ``sigma`` is a Gaussian-unit conductivity in s^-1.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .errors import DomainError, InvalidModelError

KINDS = ("vacuum", "ideal-metal", "drude", "plasma", "lorentz-oscillators", "composite")


@dataclass(frozen=True)
class Oscillator:
    strength: float
    omega: float
    width: float = 0.0


@dataclass(frozen=True)
class DrudeTerm:
    omega_p: float
    nu: float = 0.0


@dataclass(frozen=True)
class DielectricModel:
    """Immutable permittivity model.

    Use the classmethod constructors rather than filling fields by hand.
    ``intraband_lossless`` drops the relaxation rate of every Drude term
    while keeping oscillator widths, i.e. dissipation is removed from the
    intraband part only.
    """

    kind: str
    drude: tuple = ()
    oscillators: tuple = ()
    sigma: float = 0.0
    intraband_lossless: bool = False
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidModelError(f"unknown model kind {self.kind!r}")
        values = [self.sigma]
        for t in self.drude:
            values += [t.omega_p, t.nu]
        for o in self.oscillators:
            values += [o.strength, o.omega, o.width]
        if not all(math.isfinite(v) for v in values):
            raise InvalidModelError(f"{self.name or self.kind}: non-finite parameter")
        if any(v < 0 for v in values):
            raise InvalidModelError(f"{self.name or self.kind}: negative parameter")
        if any(o.omega == 0 for o in self.oscillators):
            raise InvalidModelError("oscillator resonance must be > 0")
        if self.kind in ("vacuum", "ideal-metal") and (self.drude or self.oscillators or self.sigma):
            raise InvalidModelError(f"{self.kind} takes no parameters")
        if self.kind in ("drude", "plasma") and (len(self.drude) != 1 or self.oscillators or self.sigma):
            raise InvalidModelError(f"{self.kind} needs exactly one free-carrier term")
        if self.kind == "plasma" and self.drude[0].nu != 0:
            raise InvalidModelError("plasma model has no relaxation rate")
        if self.kind == "lorentz-oscillators" and (self.drude or self.sigma):
            raise InvalidModelError("lorentz-oscillators carries oscillators only")

    # constructors

    @classmethod
    def vacuum(cls):
        return cls("vacuum", name="vacuum")

    @classmethod
    def ideal_metal(cls):
        return cls("ideal-metal", name="ideal")

    @classmethod
    def drude_model(cls, omega_p, nu, name="drude"):
        return cls("drude", drude=(DrudeTerm(omega_p, nu),), name=name)

    @classmethod
    def plasma_model(cls, omega_p, name="plasma"):
        return cls("plasma", drude=(DrudeTerm(omega_p, 0.0),), name=name)

    @classmethod
    def lorentz(cls, oscillators, name="oscillators"):
        return cls("lorentz-oscillators", oscillators=tuple(oscillators), name=name)

    @classmethod
    def composite(cls, oscillators=(), drude=(), sigma=0.0, name="composite"):
        return cls("composite", drude=tuple(drude), oscillators=tuple(oscillators),
                   sigma=float(sigma), name=name)

    # variants

    def lossless_intraband(self):
        """Same model with the intraband relaxation rates set to zero."""
        return replace(self, intraband_lossless=True)

    def without_carriers(self):
        """Drop every free-carrier contribution (Drude terms and conductivity)."""
        if self.kind in ("drude", "plasma"):
            return DielectricModel.vacuum()
        if self.kind != "composite":
            return self
        return replace(self, drude=(), sigma=0.0)

    def with_sigma(self, sigma):
        return DielectricModel.composite(self.oscillators, self.drude, sigma, name=self.name)

    # properties

    @property
    def is_ideal(self):
        return self.kind == "ideal-metal"

    @property
    def is_vacuum(self):
        return self.kind == "vacuum"

    def _nu(self, term):
        return 0.0 if self.intraband_lossless else term.nu

    @property
    def dissipationless(self):
        return (all(self._nu(t) == 0 for t in self.drude)
                and all(o.width == 0 for o in self.oscillators) and self.sigma == 0)

    def static_limit(self):
        """eps(i xi) as xi -> 0; ``inf`` for conductors."""
        if self.is_ideal or self.sigma > 0 or any(t.omega_p > 0 for t in self.drude):
            return math.inf
        return 1.0 + sum(o.strength for o in self.oscillators)

    def xi2eps_limit(self):
        """Limit of xi^2 eps(i xi) as xi -> 0, in (rad/s)^2.

        Nonzero only for dissipationless free carriers; it decides whether
        the TE reflectivity survives at zero frequency.
        """
        if self.is_ideal:
            return math.inf
        return sum(t.omega_p ** 2 for t in self.drude if self._nu(t) == 0)

    # evaluation

    def _eval_imag(self, xi):
        eps = np.ones_like(xi)
        for t in self.drude:
            eps = eps + t.omega_p ** 2 / (xi * (xi + self._nu(t)))
        for o in self.oscillators:
            eps = eps + o.strength * o.omega ** 2 / (o.omega ** 2 + xi * xi + o.width * xi)
        if self.sigma:
            eps = eps + 4.0 * math.pi * self.sigma / xi
        return eps

    def eval_complex(self, omega):
        """eps(omega) for complex omega in the closed upper half plane, omega != 0.

        No domain checks; the evaluators use this on deformed contours.
        """
        omega = np.asarray(omega, dtype=complex)
        if self.is_ideal:
            return np.full(omega.shape, complex(math.inf))
        eps = np.ones_like(omega)
        for t in self.drude:
            eps = eps - t.omega_p ** 2 / (omega * (omega + 1j * self._nu(t)))
        for o in self.oscillators:
            eps = eps + o.strength * o.omega ** 2 / (o.omega ** 2 - omega * omega - 1j * o.width * omega)
        if self.sigma:
            eps = eps + 4j * math.pi * self.sigma / omega
        return eps


def eval_imag(model, xi):
    """Permittivity on the imaginary axis, eps(i xi), for xi > 0.

    Returns a float for scalar input and an array otherwise.  ``xi = 0`` is
    allowed only for models without a divergence there; conductors must go
    through :meth:`DielectricModel.static_limit`.
    """
    arr = np.asarray(xi, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise DomainError("imaginary frequency must be finite and >= 0")
    if model.is_ideal:
        out = np.full(arr.shape, math.inf)
    elif np.any(arr == 0):
        if model.static_limit() == math.inf:
            raise DomainError(f"{model.name}: eps(i0) diverges; use static_limit()")
        with np.errstate(divide="ignore", invalid="ignore"):
            out = model._eval_imag(np.where(arr == 0, 1.0, arr))
        out = np.where(arr == 0, model.static_limit(), out)
    else:
        out = model._eval_imag(arr)
    return float(out) if out.ndim == 0 else out


def eval_real(model, omega):
    """Complex permittivity on the real frequency axis, omega > 0."""
    arr = np.asarray(omega, dtype=float)
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise DomainError("real frequency must be finite and > 0")
    out = model.eval_complex(arr)
    return complex(out) if out.ndim == 0 else out
