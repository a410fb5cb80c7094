"""Planar multilayers and their reflection coefficients.

Two evaluation axes, matching :mod:`casifp.materials`:

* imaginary frequency ``xi`` with transverse wavevector ``k`` (the quantities
  Matsubara sums consume), for both polarizations, and
* real frequency at normal incidence (what reflectance spectra consume).

Both use the same interface-by-interface combination, rolled up from the exit
half-space toward the incident one. On the imaginary axis every propagation
factor is a decaying real exponential, so arbitrarily thick layers saturate
instead of overflowing; on the real axis the passive sign convention
(``Im n >= 0``) gives ``|phase| <= 1`` and the same stability.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import c

from .materials import GateState, ItoGatedModel, MaterialSet, default_materials

__all__ = [
    "Layer",
    "LayerStack",
    "reflection_pair_imag_freq",
    "reflection_imag_freq",
    "amplitudes_real_freq",
    "reflectance_real_freq",
    "transmittance_real_freq",
    "stack_permittivities",
    "CavityGeometry",
    "make_geometry",
    "build_upper_stack",
    "build_lower_stack",
]


@dataclass(frozen=True)
class Layer:
    """A finite-thickness film of one material."""

    material: object
    thickness: float  # m

    def __post_init__(self):
        if not (np.isfinite(self.thickness) and self.thickness > 0):
            raise ValueError("layer thickness must be positive and finite")

    def describe(self):
        entry = {"material": self.material.name, "thickness_m": self.thickness}
        density = getattr(self.material, "carrier_density", None)
        if density is not None:
            entry["carrier_density_per_m3"] = density
        return entry


@dataclass(frozen=True)
class LayerStack:
    """Half-space, a tuple of layers, half-space."""

    incident_halfspace: object
    layers: tuple[Layer, ...]
    exit_halfspace: object

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def media(self):
        return (
            self.incident_halfspace,
            *(layer.material for layer in self.layers),
            self.exit_halfspace,
        )

    def describe(self):
        return {
            "incident": self.incident_halfspace.name,
            "layers": [layer.describe() for layer in self.layers],
            "exit": self.exit_halfspace.name,
        }


def _rte(k1, k2):
    den = k1 + k2
    with np.errstate(invalid="ignore", divide="ignore"):
        r = (k1 - k2) / den
    return np.where(den == 0.0, 0.0, r)


def _rtm(e1, e2, k1, k2):
    a = e2 * k1
    b = e1 * k2
    den = a + b
    with np.errstate(invalid="ignore", divide="ignore"):
        r = (a - b) / den
        fallback = (e2 - e1) / (e2 + e1)
    return np.where(den == 0.0, fallback, r)


def reflection_pair_imag_freq(stack, xi, k):
    """TE and TM reflection coefficients at imaginary frequency.

    Parameters
    ----------
    stack : LayerStack
        Multilayer seen from its incident half-space.
    xi : array_like
        Imaginary frequencies in rad/s, >= 0. Broadcast against ``k``; the
        intended fast path is a column ``[B, 1]`` against a row block
        ``[B, Q]`` so each material model is evaluated once per frequency.
    k : array_like
        Transverse wavevectors in rad/m, >= 0.

    Returns
    -------
    (ndarray, ndarray)
        ``(r_TE, r_TM)`` with the broadcast shape of ``xi`` and ``k``. Both
        are real; magnitudes never exceed 1 for passive media.

    Notes
    -----
    At ``xi = 0`` every axial wavevector equals ``k``, which makes TE
    reflection vanish identically and TM reflection depend only on the
    permittivity ratios; the ``k = 0`` corner is therefore evaluated at a
    1 rad/m stand-in wavevector, which is exact there.
    """
    xi = np.asarray(xi, dtype=float)
    k = np.asarray(k, dtype=float)
    if np.any(xi < 0) or np.any(k < 0):
        raise ValueError("xi and k must be non-negative")

    k_eff = np.where((xi == 0.0) & (k == 0.0), 1.0, k)
    ksq = k_eff * k_eff
    layers = stack.layers
    media = stack.media

    eps = [np.asarray(m.eps_imag(xi), dtype=float) for m in media]
    with np.errstate(over="ignore"):
        axial = [np.sqrt(ep * (xi / c) ** 2 + ksq) for ep in eps]

    r_te = _rte(axial[-2], axial[-1])
    r_tm = _rtm(eps[-2], eps[-1], axial[-2], axial[-1])
    for j in range(len(layers) - 1, -1, -1):
        decay = np.exp(-2.0 * axial[j + 1] * layers[j].thickness)
        ite = _rte(axial[j], axial[j + 1])
        itm = _rtm(eps[j], eps[j + 1], axial[j], axial[j + 1])
        r_te = (ite + r_te * decay) / (1.0 + ite * r_te * decay)
        r_tm = (itm + r_tm * decay) / (1.0 + itm * r_tm * decay)
    return r_te, r_tm


_POLARIZATIONS = {"TE": 0, "s": 0, "TM": 1, "p": 1}


def reflection_imag_freq(stack, xi, k, polarization="TM"):
    """One polarization of :func:`reflection_pair_imag_freq`.

    ``polarization`` is ``"TE"``/``"s"`` or ``"TM"``/``"p"``. Scalar inputs
    return a float.
    """
    try:
        index = _POLARIZATIONS[polarization]
    except KeyError:
        raise ValueError(f"unknown polarization {polarization!r}") from None
    pair = reflection_pair_imag_freq(stack, xi, k)[index]
    if np.ndim(xi) == 0 and np.ndim(k) == 0:
        return float(pair)
    return pair


def amplitudes_real_freq(stack, omega):
    """Complex reflection and transmission amplitudes at normal incidence.

    Parameters
    ----------
    stack : LayerStack
    omega : array_like
        Angular frequencies in rad/s, > 0.

    Returns
    -------
    (ndarray, ndarray)
        ``(r, t)`` complex amplitudes, shaped like ``omega``. At normal
        incidence the two polarizations are degenerate up to the sign of
        ``r``; the returned ``r`` follows the TE (electric-field) sign
        convention, consistent with the imaginary-axis functions.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("omega must be positive")

    layers = stack.layers
    media = stack.media
    index = [np.sqrt(np.asarray(m.eps_real(omega), dtype=complex)) for m in media]

    n1, n2 = index[-2], index[-1]
    r = (n1 - n2) / (n1 + n2)
    t = 2.0 * n1 / (n1 + n2)
    for j in range(len(layers) - 1, -1, -1):
        n1, n2 = index[j], index[j + 1]
        phase = np.exp(1j * n2 * (omega / c) * layers[j].thickness)
        r_if = (n1 - n2) / (n1 + n2)
        t_if = 2.0 * n1 / (n1 + n2)
        den = 1.0 + r_if * r * phase * phase
        r = (r_if + r * phase * phase) / den
        t = t_if * t * phase / den
    return r, t


def reflectance_real_freq(stack, omega):
    """Normal-incidence power reflectance ``|r|^2``."""
    r, _ = amplitudes_real_freq(stack, omega)
    return np.abs(r) ** 2


def transmittance_real_freq(stack, omega):
    """Normal-incidence power transmittance into the exit half-space."""
    omega = np.asarray(omega, dtype=float)
    _, t = amplitudes_real_freq(stack, omega)
    n_in = np.sqrt(np.asarray(stack.incident_halfspace.eps_real(omega), dtype=complex))
    n_out = np.sqrt(np.asarray(stack.exit_halfspace.eps_real(omega), dtype=complex))
    return np.abs(t) ** 2 * n_out.real / n_in.real


def stack_permittivities(stack, xi):
    """Permittivity of every medium in the stack at imaginary frequencies.

    Returns ``(names, matrix)`` where ``matrix[i, j]`` is medium ``i``
    evaluated at ``xi[j]``. Duplicate material names get positional suffixes
    so the table header stays unambiguous.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    media = stack.media
    raw = [m.name for m in media]
    names = []
    for pos, name in enumerate(raw):
        names.append(f"{name}_{pos}" if raw.count(name) > 1 else name)
    matrix = np.vstack([np.asarray(m.eps_imag(xi), dtype=float) for m in media])
    return names, matrix


# ---------------------------------------------------------------------------
# the tunable cavity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CavityGeometry:
    """Fixed fabrication parameters plus operating conditions of the cavity.

    The movable mirror is a gold plate immersed in glycerol; the fixed side
    is, from the liquid inwards, Teflon, a thin ITO film split by gating into
    a background and an accumulation sublayer, the silica gate spacer, and a
    gold substrate.
    """

    materials: MaterialSet
    plate_thickness: float = 40e-9
    teflon_thickness: float = 10e-9
    silica_thickness: float = 150e-9
    voltage: float = 0.0
    temperature: float = 300.0
    #: Resolve the accumulation layer at this temperature instead of
    #: ``temperature`` (None follows it); lets sweeps isolate the thermal
    #: radiation side from the gate electrostatics.
    gate_temperature: float | None = None

    def __post_init__(self):
        for label in ("plate_thickness", "teflon_thickness", "silica_thickness"):
            value = getattr(self, label)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{label} must be positive and finite")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.voltage < 0:
            raise ValueError("voltage must be non-negative")

    def with_conditions(
        self, voltage=None, temperature=None, silica_thickness=None, gate_temperature=None
    ):
        """Copy with some operating conditions replaced."""
        updates = {}
        if voltage is not None:
            updates["voltage"] = float(voltage)
        if temperature is not None:
            updates["temperature"] = float(temperature)
        if silica_thickness is not None:
            updates["silica_thickness"] = float(silica_thickness)
        if gate_temperature is not None:
            updates["gate_temperature"] = float(gate_temperature)
        return replace(self, **updates)

    def gate_state(self):
        gate_t = self.temperature if self.gate_temperature is None else self.gate_temperature
        return GateState.resolve(
            self.voltage, gate_t, self.silica_thickness, self.materials.ito
        )

    def ito_layers(self):
        """The gated ITO film as stack layers, accumulation side at the gate.

        With no gate-induced excess the two sublayers have identical carrier
        density and collapse into one film; the split is exact either way.
        """
        ito = self.materials.ito
        gate = self.gate_state()
        if gate.accumulation_density == ito.background_density:
            return (Layer(ItoGatedModel(ito), ito.total_thickness),)
        return (
            Layer(ItoGatedModel(ito), ito.total_thickness - gate.accumulation_thickness),
            Layer(
                ItoGatedModel(ito, gate.accumulation_density),
                gate.accumulation_thickness,
            ),
        )

    def lower_layers(self):
        m = self.materials
        return (
            Layer(m.teflon, self.teflon_thickness),
            *self.ito_layers(),
            Layer(m.silica, self.silica_thickness),
        )

    def upper_stack(self):
        """The suspended plate, seen from the liquid gap."""
        m = self.materials
        return LayerStack(m.glycerol, (Layer(m.gold, self.plate_thickness),), m.glycerol)

    def lower_stack(self):
        """The fixed coated substrate, seen from the liquid gap."""
        m = self.materials
        return LayerStack(m.glycerol, self.lower_layers(), m.gold)

    def full_stack(self, gap):
        """The whole cavity at a given gap, for real-frequency spectra.

        Light arrives through the liquid above the plate; the gold substrate
        is the exit half-space.
        """
        if not (np.isfinite(gap) and gap > 0):
            raise ValueError("gap must be positive and finite")
        m = self.materials
        return LayerStack(
            m.glycerol,
            (
                Layer(m.gold, self.plate_thickness),
                Layer(m.glycerol, gap),
                *self.lower_layers(),
            ),
            m.gold,
        )

    def describe(self):
        gate = self.gate_state()
        return {
            "plate_thickness_m": self.plate_thickness,
            "teflon_thickness_m": self.teflon_thickness,
            "silica_thickness_m": self.silica_thickness,
            "voltage_v": self.voltage,
            "temperature_k": self.temperature,
            "accumulation_thickness_m": gate.accumulation_thickness,
            "accumulation_density_per_m3": gate.accumulation_density,
            "lower_stack": self.lower_stack().describe(),
            "upper_stack": self.upper_stack().describe(),
        }


def make_geometry(materials=None, **conditions):
    """Build a :class:`CavityGeometry` with the shipped materials by default."""
    return CavityGeometry(materials=materials or default_materials(), **conditions)


def build_upper_stack(geometry):
    """The suspended plate of a :class:`CavityGeometry`, seen from the gap."""
    return geometry.upper_stack()


def build_lower_stack(geometry):
    """The coated substrate of a :class:`CavityGeometry`, seen from the gap."""
    return geometry.lower_stack()
