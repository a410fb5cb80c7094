"""Reflection arithmetic against Fresnel and slab closed forms."""

import math

import numpy as np
import pytest
from scipy.constants import c

from casifp.materials import ConstantModel, default_materials
from casifp.stack import (
    Layer,
    LayerStack,
    amplitudes_real_freq,
    reflectance_real_freq,
    reflection_pair_imag_freq,
    stack_permittivities,
    transmittance_real_freq,
)
from casifp.stack import make_geometry


def _axial(eps, xi, k):
    return math.sqrt(eps * (xi / c) ** 2 + k * k)


def _fresnel(e1, e2, k1, k2):
    return (k1 - k2) / (k1 + k2), (e2 * k1 - e1 * k2) / (e2 * k1 + e1 * k2)


def _random_lossless_stack(rng):
    incident = ConstantModel("in", float(rng.uniform(1.0, 3.0)))
    exit_medium = ConstantModel("out", float(rng.uniform(1.0, 3.0)))
    layers = tuple(
        Layer(ConstantModel(f"m{j}", float(rng.uniform(1.1, 6.0))), float(rng.uniform(10e-9, 300e-9)))
        for j in range(rng.integers(1, 5))
    )
    return LayerStack(incident, layers, exit_medium)


def test_fresnel_two_interfaces():
    stack = LayerStack(ConstantModel("vacuum", 1.0), (), ConstantModel("medium", 2.0))
    xi = 1e15
    rte, rtm = reflection_pair_imag_freq(stack, xi, 0.0)
    root2 = math.sqrt(2.0)
    assert float(rte) == pytest.approx((1.0 - root2) / (1.0 + root2), rel=1e-12)
    assert float(rtm) == pytest.approx((2.0 - root2) / (2.0 + root2), rel=1e-12)


def test_slab_closed_form():
    e1, e2, e3 = 1.0, 3.0, 1.8
    thickness = 100e-9
    stack = LayerStack(
        ConstantModel("in", e1),
        (Layer(ConstantModel("slab", e2), thickness),),
        ConstantModel("out", e3),
    )
    for xi, k in ((8e14, 3e6), (2e15, 0.0), (1e13, 2e7)):
        k1, k2, k3 = (_axial(e, xi, k) for e in (e1, e2, e3))
        decay = math.exp(-2.0 * k2 * thickness)
        rte, rtm = reflection_pair_imag_freq(stack, xi, k)
        for got, r12, r23 in (
            (float(rte), _fresnel(e1, e2, k1, k2)[0], _fresnel(e2, e3, k2, k3)[0]),
            (float(rtm), _fresnel(e1, e2, k1, k2)[1], _fresnel(e2, e3, k2, k3)[1]),
        ):
            expected = (r12 + r23 * decay) / (1.0 + r12 * r23 * decay)
            assert got == pytest.approx(expected, rel=1e-12)


def test_layer_merge_equivalence():
    rng = np.random.default_rng(7)
    for _ in range(20):
        stack = _random_lossless_stack(rng)
        j = int(rng.integers(0, len(stack.layers)))
        layer = stack.layers[j]
        halves = (
            Layer(layer.material, 0.5 * layer.thickness),
            Layer(layer.material, 0.5 * layer.thickness),
        )
        split = LayerStack(
            stack.incident_halfspace,
            stack.layers[:j] + halves + stack.layers[j + 1 :],
            stack.exit_halfspace,
        )
        xi, k = float(rng.uniform(1e13, 1e16)), float(rng.uniform(0.0, 3e7))
        for a, b in zip(
            reflection_pair_imag_freq(stack, xi, k),
            reflection_pair_imag_freq(split, xi, k),
        ):
            assert float(a) == pytest.approx(float(b), abs=1e-12)


def test_exit_medium_extension_is_noop():
    # a finite layer of the exit material changes nothing
    base = LayerStack(
        ConstantModel("in", 1.0),
        (Layer(ConstantModel("film", 4.0), 50e-9),),
        ConstantModel("out", 2.5),
    )
    extended = LayerStack(
        base.incident_halfspace,
        base.layers + (Layer(ConstantModel("out", 2.5), 200e-9),),
        base.exit_halfspace,
    )
    rte_a, rtm_a = reflection_pair_imag_freq(base, 5e14, 1e6)
    rte_b, rtm_b = reflection_pair_imag_freq(extended, 5e14, 1e6)
    assert float(rte_a) == pytest.approx(float(rte_b), abs=1e-12)
    assert float(rtm_a) == pytest.approx(float(rtm_b), abs=1e-12)


def test_lossless_energy_conservation():
    rng = np.random.default_rng(11)
    omega = 2.0 * math.pi * c / np.linspace(400e-9, 1200e-9, 5)
    for _ in range(30):
        stack = _random_lossless_stack(rng)
        total = reflectance_real_freq(stack, omega) + transmittance_real_freq(
            stack, omega
        )
        np.testing.assert_allclose(total, 1.0, rtol=0, atol=1e-9)


def test_absorbing_stack_bounds(materials):
    stack = LayerStack(
        materials.glycerol,
        (Layer(materials.gold, 40e-9),),
        materials.glycerol,
    )
    omega = 2.0 * math.pi * c / np.linspace(400e-9, 1200e-9, 9)
    r = reflectance_real_freq(stack, omega)
    t = transmittance_real_freq(stack, omega)
    assert np.all((r >= 0.0) & (r <= 1.0))
    assert np.all(t >= 0.0)
    assert np.all(r + t < 1.0)  # a 40 nm gold film absorbs


def test_reflection_bounded_at_imag_freq():
    rng = np.random.default_rng(3)
    for _ in range(25):
        stack = _random_lossless_stack(rng)
        xi = float(rng.uniform(1e12, 1e17))
        k = float(rng.uniform(0.0, 5e7))
        rte, rtm = reflection_pair_imag_freq(stack, xi, k)
        assert abs(float(rte)) <= 1.0 + 1e-12
        assert abs(float(rtm)) <= 1.0 + 1e-12


def test_zero_frequency_te_vanishes(materials):
    stack = LayerStack(materials.glycerol, (), materials.gold)
    rte, rtm = reflection_pair_imag_freq(stack, 0.0, 2e6)
    assert float(rte) == 0.0
    assert float(rtm) == pytest.approx(1.0, abs=1e-12)


def test_cavity_geometry_gate_split(materials):
    grounded = make_geometry(materials)
    assert len(grounded.ito_layers()) == 1
    assert grounded.ito_layers()[0].thickness == pytest.approx(5e-9, abs=1e-15)

    biased = make_geometry(materials, voltage=450.0)
    background, accumulation = biased.ito_layers()
    state = biased.gate_state()
    assert accumulation.thickness == pytest.approx(state.accumulation_thickness)
    assert background.thickness + accumulation.thickness == pytest.approx(
        5e-9, abs=1e-15
    )
    assert (
        accumulation.material.carrier_density > background.material.carrier_density
    )


def test_cavity_stack_composition(materials):
    geometry = make_geometry(materials)
    lower = geometry.lower_stack()
    assert [layer.material.name for layer in lower.layers] == [
        "teflon",
        "ito",
        "silica",
    ]
    assert lower.incident_halfspace.name == "glycerol"
    assert lower.exit_halfspace.name == "gold"

    upper = geometry.upper_stack()
    assert [layer.material.name for layer in upper.layers] == ["gold"]
    assert upper.layers[0].thickness == pytest.approx(40e-9)
    assert upper.incident_halfspace.name == upper.exit_halfspace.name == "glycerol"

    full = geometry.full_stack(85e-9)
    assert [m.name for m in full.media] == [
        "glycerol",
        "gold",
        "glycerol",
        "teflon",
        "ito",
        "silica",
        "gold",
    ]


def test_with_conditions_and_validation(materials):
    geometry = make_geometry(materials)
    warmer = geometry.with_conditions(temperature=350.0, voltage=100.0)
    assert warmer.temperature == 350.0
    assert warmer.voltage == 100.0
    assert geometry.temperature == 300.0  # original untouched
    with pytest.raises(ValueError):
        make_geometry(materials, silica_thickness=-1e-9)
    with pytest.raises(ValueError):
        Layer(ConstantModel("x", 2.0), 0.0)


def test_stack_permittivity_table(materials):
    geometry = make_geometry(materials)
    names, matrix = stack_permittivities(
        geometry.full_stack(85e-9), np.array([1e14, 1e15])
    )
    assert names[0] == "glycerol_0" and names[2] == "glycerol_2"
    assert matrix.shape == (7, 2)
    assert np.all(matrix >= 1.0)


def test_amplitudes_require_positive_frequency():
    stack = LayerStack(ConstantModel("in", 1.0), (), ConstantModel("out", 2.0))
    with pytest.raises(ValueError):
        amplitudes_real_freq(stack, 0.0)
    with pytest.raises(ValueError):
        reflection_pair_imag_freq(stack, -1.0, 0.0)
