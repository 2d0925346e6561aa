import math

from hypothesis import given, settings, strategies as st
import mpmath as mp
import numpy as np
import pytest

from thermcas.dielectric import DielectricModel, DrudeTerm, Oscillator
from thermcas.errors import ConvergenceError, DomainError
from thermcas.lifshitz import (Settings, ThermalSpec, _lorentz_zero_term, damped_bose, energy,
                               energy_matsubara, energy_real_axis, energy_saturated, energy_zero_t,
                               lorentz_mass, matsubara_term, pressure)
from thermcas.modes import LayerStack
from thermcas.units import C, HBAR, KB

HBAR_C = HBAR * C


def ideal_energy(d):
    return -math.pi ** 2 * HBAR_C / (720 * d ** 3)


# damped distribution -----------------------------------------------------

def test_damped_bose_examples():
    T = 295.0
    assert damped_bose(0.0, T, 0.01) == pytest.approx(1 / math.expm1(0.01), rel=1e-15)
    assert damped_bose(0.0, T, 0.01) == pytest.approx(99.5008, abs=1e-4)
    assert damped_bose(0.0, T, 1.0) == pytest.approx(0.581977, abs=1e-6)
    w = KB * T / HBAR  # hbar beta w = 1
    assert damped_bose(w, T, 0.1) == pytest.approx(1 / math.expm1(1.1), rel=1e-12)
    assert damped_bose(w, T, 0.1) == pytest.approx(0.498961, abs=1e-6)
    assert damped_bose(w, T, 0.0) == pytest.approx(1 / math.expm1(1.0), rel=1e-14)


def test_damped_bose_errors():
    with pytest.raises(DomainError):
        damped_bose(0.0, 300.0, 0.0)
    with pytest.raises(DomainError):
        damped_bose(-1.0, 300.0, 0.1)
    assert damped_bose(1e14, 0.0, 0.0) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.floats(1e9, 1e16), st.floats(1.0, 1000.0), st.floats(0.0, 5.0), st.floats(1.001, 3.0))
def test_damped_bose_positive_and_decreasing(w, T, D, factor):
    n = damped_bose(w, T, D)
    assert n > 0 or HBAR * w / (KB * T) > 700
    assert damped_bose(w * factor, T, D) <= n
    assert damped_bose(w, T, D + 0.5) <= n


# spec validation ---------------------------------------------------------

def test_thermal_spec_rules():
    with pytest.raises(DomainError):
        ThermalSpec(0.0, 0.0, "matsubara")
    with pytest.raises(DomainError):
        ThermalSpec(0.0, 0.0, "saturated")
    with pytest.raises(DomainError):
        ThermalSpec(300.0, 0.1, "matsubara")
    with pytest.raises(DomainError):
        ThermalSpec(300.0, 0.1, "zero-t")
    with pytest.raises(DomainError):
        ThermalSpec(-1.0, 0.0, "zero-t")
    with pytest.raises(DomainError):
        ThermalSpec(300.0, 0.0, "bogus")
    ThermalSpec(0.0, 0.0, "real-axis")
    ThermalSpec(300.0, 0.1, "saturated", "full")


def test_stack_type_checked():
    with pytest.raises(TypeError):
        energy("not a stack", ThermalSpec(0.0, 0.0, "zero-t"))


# closed forms ------------------------------------------------------------

def test_vacuum_stack_is_zero(vacuum):
    stack = LayerStack.symmetric(vacuum, 1e-6)
    for th in (ThermalSpec(0.0, 0.0, "zero-t"), ThermalSpec(300.0), ThermalSpec(300.0, 0.0, "real-axis"),
               ThermalSpec(300.0, 0.1, "saturated")):
        e = energy(stack, th)
        assert e.V_total == 0.0 and e.V_TM == 0.0 and e.V_TE == 0.0
        assert pressure(stack, th).F_total == 0.0


@pytest.mark.parametrize("d", [1e-7, 1e-6, 5e-6])
def test_ideal_zero_t_energy(ideal, d):
    e = energy_zero_t(LayerStack.symmetric(ideal, d))
    assert e.V_total == pytest.approx(ideal_energy(d), rel=1e-6)
    assert e.V_TM == pytest.approx(e.V_TE, rel=1e-12)


def test_ideal_energy_number(ideal):
    assert energy_zero_t(LayerStack.symmetric(ideal, 1e-6)).V_total == pytest.approx(-4.3338e-10, rel=1e-4)


def test_ideal_static_term_is_zeta3(ideal):
    mp.mp.dps = 30
    T, d = 300.0, 1e-6
    e = matsubara_term(LayerStack.symmetric(ideal, d), T, 0)
    expected = -float(mp.zeta(3)) * KB * T / (8 * math.pi * d ** 2)
    assert e.V_total == pytest.approx(expected, rel=1e-6)
    assert e.V_total == pytest.approx(-1.9813e-10, rel=1e-4)
    # TE and TM share it equally for an ideal metal
    assert e.V_TE == pytest.approx(e.V_TM, rel=1e-12)


def test_drude_static_te_term_vanishes(gold):
    e = matsubara_term(LayerStack.symmetric(gold, 1e-6), 295.0, 0)
    assert e.V_TE == 0.0
    assert e.V_TM < 0


def test_matsubara_terms_sum_to_total(gold_stack):
    stack = gold_stack(1e-6)
    total = energy_matsubara(stack, ThermalSpec(295.0))
    partial = sum(matsubara_term(stack, 295.0, n).V_total for n in range(total.n_matsubara_used + 50))
    assert partial == pytest.approx(total.V_total, rel=1e-8)


# evaluator equivalence ---------------------------------------------------

INSTANCES = [("gold", 0.3e-6), ("gold", 1.0e-6), ("gold-plasma", 0.5e-6), ("gold-silicon", 0.4e-6)]


def _stack(name, d, gold, gold_plasma):
    if name == "gold":
        return LayerStack.symmetric(gold, d)
    if name == "gold-plasma":
        return LayerStack.symmetric(gold_plasma, d)
    si = DielectricModel.composite([Oscillator(10.66, 6.6e15)], [DrudeTerm(5e14, 5e13)])
    return LayerStack(gold, DielectricModel.vacuum(), si, d)


@pytest.mark.parametrize("name, d", INSTANCES)
def test_zero_t_matches_real_axis(name, d, gold, gold_plasma):
    stack = _stack(name, d, gold, gold_plasma)
    a = energy_zero_t(stack).V_total
    b = energy_real_axis(stack, ThermalSpec(0.0, 0.0, "real-axis")).V_total
    assert b == pytest.approx(a, rel=1e-4)


@pytest.mark.parametrize("name, d", INSTANCES)
def test_matsubara_matches_real_axis(name, d, gold, gold_plasma):
    stack = _stack(name, d, gold, gold_plasma)
    a = energy_matsubara(stack, ThermalSpec(295.0)).V_total
    b = energy_real_axis(stack, ThermalSpec(295.0, 0.0, "real-axis")).V_total
    assert b == pytest.approx(a, rel=1e-3)


@pytest.mark.parametrize("name, d", INSTANCES)
def test_matsubara_matches_small_d_saturated(name, d, gold, gold_plasma):
    stack = _stack(name, d, gold, gold_plasma)
    a = energy_matsubara(stack, ThermalSpec(295.0)).V_total
    b = energy_saturated(stack, ThermalSpec(295.0, 1e-8, "saturated")).V_total
    assert b == pytest.approx(a, rel=1e-4)


@pytest.mark.parametrize("D", [0.01, 0.1, 1.0])
def test_full_broadening_equals_damped_distribution(gold_stack, D):
    stack = gold_stack(0.5e-6)
    a = energy_saturated(stack, ThermalSpec(295.0, D, "saturated", "full"))
    b = energy_real_axis(stack, ThermalSpec(295.0, D, "real-axis"))
    assert a.V_total == pytest.approx(b.V_total, rel=1e-5)
    assert a.V_TE == pytest.approx(b.V_TE, rel=1e-5)


# Lorentzian kernel -------------------------------------------------------

@pytest.mark.parametrize("T, D, d", [(295.0, 0.01, 0.2e-6), (295.0, 1.0, 1.2e-6), (300.0, 0.1, 0.1e-6),
                                     (310.0, 1e-12, 7e-6), (310.0, 1e-10, 11e-6), (295.0, 1e-8, 1e-6)])
def test_lorentz_kernel_mass(gold_stack, T, D, d):
    for order in Settings().orders:
        assert abs(lorentz_mass(gold_stack(d), T, D, order) - 1) < 1e-8


def test_constant_integrand_is_reproduced():
    c = np.array([[-3.25], [7.5]])
    got = _lorentz_zero_term(lambda xi: np.broadcast_to(c, (2, np.size(xi))), 4e11, 1e30, 16)
    assert got == pytest.approx(c[:, 0], rel=1e-10)


# structure ---------------------------------------------------------------

@settings(max_examples=8, deadline=None)
@given(st.floats(0.1e-6, 3e-6), st.sampled_from(["zero-t", "matsubara", "saturated", "real-axis"]))
def test_additivity_and_attraction(d, evaluator):
    gold = DielectricModel.drude_model(1.3673403e16, 5.3174345e13)
    T = 0.0 if evaluator == "zero-t" else 295.0
    D = 0.1 if evaluator in ("saturated", "real-axis") else 0.0
    stack = LayerStack.symmetric(gold, d)
    e = energy(stack, ThermalSpec(T, D, evaluator))
    p = pressure(stack, ThermalSpec(T, D, evaluator))
    assert e.V_total == e.V_TM + e.V_TE
    assert p.F_total == p.F_TM + p.F_TE
    assert e.V_total < 0 and p.F_total < 0


@pytest.mark.parametrize("th", [ThermalSpec(0.0, 0.0, "zero-t"), ThermalSpec(295.0)])
def test_pressure_decreases_with_distance(gold_stack, th):
    grid = np.geomspace(0.1e-6, 5e-6, 8)
    mags = [abs(pressure(gold_stack(d), th).F_total) for d in grid]
    assert all(a > b for a, b in zip(mags, mags[1:]))


def test_ideal_pressure(ideal):
    p = pressure(LayerStack.symmetric(ideal, 1e-6), ThermalSpec(0.0, 0.0, "zero-t"))
    assert abs(p.F_total) == pytest.approx(math.pi ** 2 * HBAR_C / 240e-24, rel=1e-6)


@pytest.mark.parametrize("th", [ThermalSpec(0.0, 0.0, "zero-t"), ThermalSpec(295.0),
                                ThermalSpec(295.0, 0.1, "saturated"), ThermalSpec(295.0, 0.1, "real-axis")])
def test_pressure_matches_finite_difference(gold_stack, th):
    d = 0.5e-6
    h = 1e-4 * d
    fd = -(energy(gold_stack(d + h), th).V_total - energy(gold_stack(d - h), th).V_total) / (2 * h)
    assert pressure(gold_stack(d), th).F_total == pytest.approx(fd, rel=1e-5)


def test_saturation_direction(gold_stack):
    stack = gold_stack(0.5e-6)
    te = [energy_saturated(stack, ThermalSpec(295.0, D, "saturated")).V_TE for D in (0.01, 0.1, 1.0)]
    assert te[0] < te[1] < te[2] or te[0] > te[1] > te[2]
    # the broadened static TE term fades as D grows
    plain = energy_matsubara(stack, ThermalSpec(295.0)).V_TE
    static = [energy_saturated(stack, ThermalSpec(295.0, D, "saturated")).V_TE - plain
              for D in (1.0, 10.0, 100.0, 1000.0)]
    assert all(abs(a) > abs(b) for a, b in zip(static, static[1:]))
    assert abs(static[-1]) < 0.05 * abs(static[0])


def test_convergence_error_carries_partial(gold_stack):
    with pytest.raises(ConvergenceError) as info:
        energy_matsubara(gold_stack(0.1e-6), ThermalSpec(295.0), Settings(max_terms=5))
    assert info.value.partial is not None
    assert info.value.where["n"] == 4
    with pytest.raises(ConvergenceError) as info:
        energy_zero_t(gold_stack(0.5e-6), Settings(rtol=1e-17, orders=(8, 12)))
    assert info.value.partial.energy().V_total < 0


def test_metadata(gold_stack):
    e = energy_matsubara(gold_stack(1e-6), ThermalSpec(295.0))
    assert e.n_matsubara_used > 3 and e.k_points > 0 and 0 <= e.est_rel_error <= 1e-6
