"""Permittivity models and gate electrostatics against closed forms."""

import math

import numpy as np
import pytest
from scipy.constants import c, e, epsilon_0, k as k_B

from casifp.errors import BreakdownVoltageError
from casifp.materials import (
    EV,
    METALLIC_EPS_CAP,
    ConstantModel,
    DrudeLorentzModel,
    GateState,
    ItoGatedModel,
    OscillatorModel,
    TaucLorentz,
    accumulation_density,
    accumulation_thickness,
    breakdown_voltage,
    default_materials,
    ito_plasma_frequency,
    kk_transform,
)

XI_GRID = np.geomspace(1e12, 1e18, 25)


def test_constant_model_is_flat():
    vacuum = ConstantModel("vacuum", 1.0)
    assert np.all(vacuum.eps_imag(XI_GRID) == 1.0)
    assert np.all(vacuum.eps_real(XI_GRID) == 1.0)
    assert vacuum.static_eps == 1.0


def test_drude_lorentz_limits_and_monotonicity():
    gold = DrudeLorentzModel.from_ev("gold", 9.0, 0.035)
    eps = gold.eps_imag(XI_GRID)
    # free carriers: diverges toward xi=0 (capped), decays to 1 at high xi
    assert gold.eps_imag(0.0) == METALLIC_EPS_CAP
    assert np.all(np.diff(eps) < 0)
    assert eps[-1] == pytest.approx(1.0, abs=1e-3)
    # real axis: metallic (negative Re eps) below the plasma frequency
    omega = 2.0 * math.pi * c / 800e-9
    assert gold.eps_real(omega).real < 0
    assert gold.eps_real(omega).imag > 0


def test_kk_transform_reproduces_drude_pair():
    wp, g = 9.0 * EV, 0.035 * EV

    def im_eps(x):
        return wp**2 * g / (x * (x**2 + g**2))

    for xi in (1e13, 3e14, 1e16):
        closed = 1.0 + wp**2 / (xi * (xi + g))
        assert kk_transform(im_eps, xi, rel_tol=1e-8) == pytest.approx(
            closed, rel=1e-5
        )


def test_ito_declared_absorption_is_kk_consistent():
    """eps(i xi) of the gated model is the transform of its declared Im eps."""
    model = ItoGatedModel(default_materials().ito)
    for xi in (1e14, 1e15, 1e16):
        reference = kk_transform(
            model.im_eps_declared, xi, rel_tol=1e-8, peak_hint=6.2 * EV
        )
        assert model.eps_imag(xi) == pytest.approx(reference, rel=5e-3)


def test_oscillator_table_static_and_monotone(materials):
    glycerol = materials.glycerol
    strengths = sum(term[0] for term in glycerol.terms)
    assert glycerol.static_eps == pytest.approx(1.0 + strengths, rel=1e-12)
    assert glycerol.static_eps == pytest.approx(42.40, abs=1e-6)
    assert glycerol.eps_imag(0.0) == pytest.approx(glycerol.static_eps, rel=1e-12)
    eps = glycerol.eps_imag(XI_GRID)
    assert np.all(np.diff(eps) < 0)
    assert float(glycerol.eps_imag(1e19)) == pytest.approx(1.0, abs=1e-2)


def test_shipped_material_set(materials):
    assert isinstance(materials.gold, DrudeLorentzModel)
    for dielectric in (materials.teflon, materials.silica, materials.glycerol):
        assert isinstance(dielectric, OscillatorModel)
        assert 1.0 < dielectric.static_eps < 100.0
    assert materials.ito.total_thickness == pytest.approx(5e-9)
    # repulsion window ordering at the first Matsubara frequency (300 K)
    xi1 = 2.468e14
    teflon, glycerol, gold = (
        float(m.eps_imag(xi1))
        for m in (materials.teflon, materials.glycerol, materials.gold)
    )
    assert teflon < glycerol < gold


def test_ito_density_scaling(materials):
    model = ItoGatedModel(materials.ito)
    denser = model.with_density(4.0 * model.carrier_density)
    assert denser.plasma_frequency == pytest.approx(
        2.0 * model.plasma_frequency, rel=1e-12
    )
    assert ito_plasma_frequency(
        materials.ito.background_density, materials.ito.effective_mass
    ) == pytest.approx(model.plasma_frequency, rel=1e-12)
    # regression pins for the shipped parameter set
    assert float(model.eps_imag(2.468e14)) == pytest.approx(4.622, abs=0.05)
    omega = 2.0 * math.pi * c / 800e-9
    assert complex(model.eps_real(omega)).real == pytest.approx(3.884, abs=0.05)


def test_tauc_lorentz_gap_edge():
    tl = TaucLorentz(145.0, 6.2, 3.4, 3.75)
    below, above = tl.im_eps(np.array([3.0 * EV, 5.0 * EV]))
    assert below == 0.0
    assert above > 0.0


def test_accumulation_thickness_closed_form():
    n_b, t, eps_s = 1e25, 300.0, 9.3
    expected = (math.pi / math.sqrt(2.0)) * math.sqrt(
        k_B * t * epsilon_0 * eps_s / (n_b * e**2)
    )
    assert accumulation_thickness(n_b, t, eps_s) == pytest.approx(expected, rel=1e-13)
    # sqrt(T) growth, 1/sqrt(N) shrinkage
    assert accumulation_thickness(n_b, 4.0 * t) == pytest.approx(
        2.0 * accumulation_thickness(n_b, t), rel=1e-12
    )
    assert accumulation_thickness(4.0 * n_b, t) == pytest.approx(
        0.5 * accumulation_thickness(n_b, t), rel=1e-12
    )


def test_breakdown_voltage_linear():
    assert breakdown_voltage(150e-9) == pytest.approx(450.0, rel=1e-12)
    assert breakdown_voltage(300e-9) == pytest.approx(900.0, rel=1e-12)
    assert breakdown_voltage(0.0) == 0.0


def test_accumulation_density_gate_charge():
    n_b, l_s = 1e25, 150e-9
    l_a = accumulation_thickness(n_b, 300.0)
    assert accumulation_density(n_b, 0.0, l_s, l_a) == n_b
    v = 450.0
    expected = n_b + epsilon_0 * 3.9 * v / (e * l_s) / l_a
    assert accumulation_density(n_b, v, l_s, l_a) == pytest.approx(
        expected, rel=1e-13
    )
    grid = [accumulation_density(n_b, float(v), l_s, l_a) for v in np.linspace(0, 450, 7)]
    assert np.all(np.diff(grid) > 0)
    with pytest.raises(BreakdownVoltageError):
        accumulation_density(n_b, 451.0, l_s, l_a)


def test_gate_state_resolve(materials):
    state = GateState.resolve(450.0, 300.0, 150e-9, materials.ito)
    assert state.accumulation_thickness == pytest.approx(2.5606e-9, abs=0.01e-9)
    assert state.accumulation_density == pytest.approx(2.625e26, rel=1e-3)
    # thermal layer reaching the full film thickness is out of model range
    with pytest.raises(ValueError):
        GateState.resolve(0.0, 1200.0, 150e-9, materials.ito)


def test_negative_frequency_rejected(materials):
    with pytest.raises(ValueError):
        materials.gold.eps_imag(-1.0)
    with pytest.raises(ValueError):
        materials.gold.eps_real(0.0)
