"""Dielectric response models and gate electrostatics for the cavity materials.

Every model evaluates on two frequency axes:

* imaginary frequency ``eps(i*xi)`` (real, monotone decreasing), which is what
  Matsubara/Lifshitz sums consume, and
* real frequency ``eps(omega)`` (complex, passive), which is what transfer
  matrix spectra consume.

Shipped parameter sets live in JSON files under ``casifp/data``; point the
``CASIFP_DATA_DIR`` environment variable at a directory with files of the same
names to override them without touching code.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np
from scipy.constants import c, e, epsilon_0, hbar, k as k_B, m_e
from scipy.integrate import quad

from .errors import BreakdownVoltageError, QuadratureError

__all__ = [
    "EV",
    "METALLIC_EPS_CAP",
    "BREAKDOWN_FIELD",
    "SILICA_GATE_EPS",
    "DATA_ENV_VAR",
    "MATERIAL_NAMES",
    "ConstantModel",
    "DrudeLorentzModel",
    "OscillatorModel",
    "TaucLorentz",
    "ItoParams",
    "ItoGatedModel",
    "GateState",
    "MaterialSet",
    "eps_imag_freq",
    "eps_real_freq",
    "kk_transform",
    "kk_real_part",
    "ito_plasma_frequency",
    "accumulation_thickness",
    "accumulation_density",
    "breakdown_voltage",
    "data_dir",
    "load_material",
    "load_ito_params",
    "default_materials",
]

EV = e / hbar  # rad/s per electronvolt

#: Finite stand-in for the divergent zero-frequency permittivity of a free
#: carrier (Drude) term. Must be large enough that TM Fresnel coefficients
#: round to their metallic limit and small enough that products with
#: wavevectors stay finite in double precision.
METALLIC_EPS_CAP = 1e40

BREAKDOWN_FIELD = 3.0e9  # V/m, dielectric strength of the silica gate oxide
SILICA_GATE_EPS = 3.9  # static permittivity entering the sheet-charge balance

DATA_ENV_VAR = "CASIFP_DATA_DIR"

#: The shipped material data files, one JSON per name.
MATERIAL_NAMES = ("gold", "teflon", "silica", "glycerol", "ito")


def _as_nonneg(value, name):
    arr = np.asarray(value, dtype=float)
    if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite and non-negative")
    return arr


def _like(value, arr):
    """Return a float for scalar input, the array otherwise."""
    if np.ndim(value) == 0:
        return arr[()] if isinstance(arr, np.ndarray) else arr
    return arr


# ---------------------------------------------------------------------------
# permittivity models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantModel:
    """Dispersionless permittivity, mostly for tests and idealized limits."""

    name: str
    eps: float = 1.0

    def __post_init__(self):
        if not self.eps >= 1.0:
            raise ValueError("constant permittivity must be >= 1")

    def eps_imag(self, xi):
        xi = _as_nonneg(xi, "xi")
        return _like(xi, np.full_like(xi, self.eps))

    def eps_real(self, omega):
        omega = _as_nonneg(omega, "omega")
        return _like(omega, np.full_like(omega, self.eps).astype(complex))

    @property
    def static_eps(self):
        return self.eps


@dataclass(frozen=True)
class DrudeLorentzModel:
    """Generalized Drude-Lorentz permittivity, the natural model for metals.

    ``eps(i xi) = 1 + wp^2 / (xi (xi + g)) + sum_j S_j w_j^2 / (w_j^2 + xi^2 + G_j xi)``

    All frequencies are stored in rad/s (use :meth:`from_ev` for eV input).
    Oscillator strengths ``S_j`` are dimensionless, so the oscillator block
    contributes ``sum_j S_j`` at zero frequency while the free-carrier term
    diverges there; ``eps_imag(0)`` reports :data:`METALLIC_EPS_CAP` instead,
    which reproduces the metallic TM limit in downstream Fresnel arithmetic
    while keeping TE reflection at zero frequency exactly zero.
    """

    name: str
    plasma_frequency: float  # rad/s
    drude_damping: float = 0.0  # rad/s
    oscillators: tuple[tuple[float, float, float], ...] = ()  # (S, w0, G) rad/s

    def __post_init__(self):
        if not self.plasma_frequency > 0:
            raise ValueError("plasma frequency must be positive")
        if self.drude_damping < 0:
            raise ValueError("Drude damping must be non-negative")
        object.__setattr__(
            self, "oscillators", tuple(tuple(map(float, o)) for o in self.oscillators)
        )
        for strength, center, width in self.oscillators:
            if strength <= 0 or center <= 0 or width <= 0:
                raise ValueError("oscillator strength, center and width must be positive")

    @classmethod
    def from_ev(cls, name, plasma_ev, damping_ev, oscillators_ev=()):
        return cls(
            name=name,
            plasma_frequency=plasma_ev * EV,
            drude_damping=damping_ev * EV,
            oscillators=tuple((s, w * EV, g * EV) for s, w, g in oscillators_ev),
        )

    def eps_imag(self, xi):
        x = _as_nonneg(xi, "xi")
        with np.errstate(divide="ignore"):
            out = 1.0 + self.plasma_frequency**2 / (x * (x + self.drude_damping))
        for s, w0, g in self.oscillators:
            out = out + s * w0**2 / (w0**2 + x * (x + g))
        out = np.where(np.isfinite(out), out, METALLIC_EPS_CAP)
        return _like(xi, out)

    def eps_real(self, omega):
        w = _as_nonneg(omega, "omega")
        if np.any(w == 0):
            raise ValueError("omega must be positive")
        w = w.astype(complex)
        out = 1.0 - self.plasma_frequency**2 / (w * (w + 1j * self.drude_damping))
        for s, w0, g in self.oscillators:
            out = out + s * w0**2 / (w0**2 - w * (w + 1j * g))
        return _like(omega, out)

    @property
    def static_eps(self):
        return METALLIC_EPS_CAP


@dataclass(frozen=True)
class OscillatorModel:
    """Undamped-oscillator fit ``eps(i xi) = 1 + sum_i C_i / (1 + (xi/w_i)^2)``.

    The form used for the transparent dielectrics (Teflon, silica, glycerol):
    static permittivity ``1 + sum C_i``, approaching 1 at high frequency. The
    real-frequency evaluation is lossless and only valid away from the
    resonances ``w_i``; the shipped tables keep the visible window clear.
    """

    name: str
    terms: tuple[tuple[float, float], ...]  # (C_i, w_i rad/s)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((float(cw), float(w)) for cw, w in self.terms))
        if not self.terms:
            raise ValueError("oscillator table needs at least one term")
        for strength, freq in self.terms:
            if strength <= 0 or freq <= 0:
                raise ValueError("oscillator strengths and frequencies must be positive")

    def eps_imag(self, xi):
        x = _as_nonneg(xi, "xi")
        out = np.ones_like(x)
        for strength, freq in self.terms:
            out = out + strength * freq**2 / (freq**2 + x**2)
        return _like(xi, out)

    def eps_real(self, omega):
        w = _as_nonneg(omega, "omega")
        out = np.ones_like(w)
        for strength, freq in self.terms:
            out = out + strength * freq**2 / (freq**2 - w**2)
        return _like(omega, out.astype(complex))

    @property
    def static_eps(self):
        return 1.0 + sum(strength for strength, _ in self.terms)


@dataclass(frozen=True)
class TaucLorentz:
    """Interband absorption of an amorphous oxide, zero below the gap.

    Parameters are in eV: amplitude A, resonance E0, broadening C, gap Eg.
    ``im_eps`` takes rad/s like every other evaluator here.
    """

    amplitude: float
    resonance: float
    broadening: float
    gap: float

    def __post_init__(self):
        if min(self.amplitude, self.resonance, self.broadening, self.gap) <= 0:
            raise ValueError("Tauc-Lorentz parameters must be positive")

    def im_eps(self, omega):
        w = _as_nonneg(omega, "omega")
        energy = w / EV
        out = np.zeros_like(energy)
        sel = energy > self.gap
        if np.any(sel):
            en = energy[sel]
            a, e0, cc, eg = self.amplitude, self.resonance, self.broadening, self.gap
            out[sel] = (
                a * e0 * cc * (en - eg) ** 2 / (((en**2 - e0**2) ** 2 + cc**2 * en**2) * en)
            )
        return _like(omega, out)


# ---------------------------------------------------------------------------
# Kramers-Kronig machinery
# ---------------------------------------------------------------------------


def _quad_checked(func, a, b, rel_tol, what, **kwargs):
    out = quad(func, a, b, epsabs=0.0, epsrel=rel_tol, limit=400, full_output=1, **kwargs)
    if len(out) > 3:
        value, abserr = out[0], out[1]
        raise QuadratureError(
            f"quadrature failure in {what}: {out[3]}", partial=value, estimate=abserr
        )
    return out[0]


def _tail_integral(func, a, rel_tol, what):
    """``Int_a^inf func`` via x = a/u; steep power-law tails defeat the
    integrator's built-in linear map."""
    def folded(u):
        x = a / u
        return func(x) * a / (u * u)

    return _quad_checked(folded, 0.0, 1.0, rel_tol, what)


def kk_transform(im_eps, xi, rel_tol=1e-6, peak_hint=None):
    """Permittivity at imaginary frequency from an absorption spectrum.

    Evaluates ``eps(i xi) = 1 + (2/pi) Int_0^inf x Im eps(x) / (x^2 + xi^2) dx``.

    Parameters
    ----------
    im_eps : callable
        Absorption ``Im eps(x)`` for real ``x`` in rad/s. Must be >= 0.
    xi : float
        Imaginary frequency in rad/s, >= 0.
    rel_tol : float
        Relative quadrature tolerance passed to the adaptive integrator.
    peak_hint : float, optional
        Frequency near which the absorption is concentrated; the integral is
        split around it so narrow lines are not missed.

    Returns
    -------
    float
        ``eps(i xi)``, real.

    Raises
    ------
    QuadratureError
        If the adaptive integrator reports non-convergence; the exception
        carries the partial estimate.
    """
    xi = float(xi)
    if xi < 0:
        raise ValueError("xi must be non-negative")

    if xi > 0:
        def integrand(x):
            return x * im_eps(x) / (x * x + xi * xi)
    else:
        def integrand(x):
            return im_eps(x) / x

    if peak_hint is not None and peak_hint > 0:
        cuts = (0.0, peak_hint / 2.0, 2.0 * peak_hint)
    else:
        cuts = (0.0, max(xi, 1e15))
    total = _tail_integral(integrand, cuts[-1], rel_tol, "kk_transform")
    for a, b in zip(cuts[:-1], cuts[1:]):
        total += _quad_checked(integrand, a, b, rel_tol, "kk_transform")
    return 1.0 + (2.0 / math.pi) * total


def kk_real_part(im_eps, omega, rel_tol=1e-8):
    """``Re eps(omega) - 1`` from absorption via the principal-value transform.

    Evaluates ``(2/pi) P Int_0^inf x Im eps(x) / (x^2 - omega^2) dx`` with a
    Cauchy-weighted panel straddling the pole and the combined (pole-free)
    integrand elsewhere, so a conductor's 1/x absorption stays integrable.
    """
    w = float(omega)
    if w <= 0:
        raise ValueError("omega must be positive")
    a, b = 0.5 * w, 2.0 * w

    def combined(x):
        return x * im_eps(x) / (x * x - w * w)

    total = _quad_checked(combined, 0.0, a, rel_tol, "kk_real_part")
    total += _quad_checked(
        lambda x: x * im_eps(x) / (x + w),
        a, b, rel_tol, "kk_real_part", weight="cauchy", wvar=w,
    )
    total += _tail_integral(combined, b, rel_tol, "kk_real_part")
    return (2.0 / math.pi) * total


# ---------------------------------------------------------------------------
# gated ITO
# ---------------------------------------------------------------------------


def ito_plasma_frequency(density, effective_mass):
    """Free-carrier plasma frequency ``sqrt(N e^2 / (eps0 m*))`` in rad/s."""
    if density <= 0 or effective_mass <= 0:
        raise ValueError("density and effective mass must be positive")
    return math.sqrt(density * e**2 / (epsilon_0 * effective_mass))


@dataclass(frozen=True)
class ItoParams:
    """Fabrication-fixed ITO parameters; carrier density varies with gating."""

    background_density: float = 1e25  # m^-3
    static_permittivity: float = 9.3
    effective_mass: float = 0.35 * m_e  # kg
    drude_damping: float = 1.8e14  # rad/s
    tauc_lorentz: TaucLorentz = field(default_factory=lambda: TaucLorentz(145.0, 6.2, 3.4, 3.75))
    total_thickness: float = 5e-9  # m

    def __post_init__(self):
        if self.background_density <= 0:
            raise ValueError("background density must be positive")
        if self.static_permittivity <= 1:
            raise ValueError("static permittivity must exceed 1")
        if self.effective_mass <= 0 or self.drude_damping < 0:
            raise ValueError("bad effective mass or damping")
        if self.total_thickness <= 0:
            raise ValueError("total thickness must be positive")


# Tauc-Lorentz transforms depend only on the four TL parameters, never on the
# carrier density, so they are computed once per parameter set and shared by
# every gated instance. Built on first use, read-only afterwards.
_TL_IMAG_CACHE: dict[TaucLorentz, tuple[np.ndarray, np.ndarray]] = {}
_TL_REAL_CACHE: dict[TaucLorentz, tuple[np.ndarray, np.ndarray]] = {}

_TL_XI_GRID = np.geomspace(1e10, 1e19, 481)
_TL_W_GRID = np.geomspace(3e14, 1.5e16, 241)


def _tl_imag_table(tl):
    if tl not in _TL_IMAG_CACHE:
        hint = tl.resonance * EV
        vals = np.array([kk_transform(tl.im_eps, x, 1e-9, peak_hint=hint) - 1.0 for x in _TL_XI_GRID])
        _TL_IMAG_CACHE[tl] = (np.log(_TL_XI_GRID), vals)
    return _TL_IMAG_CACHE[tl]


def _tl_real_table(tl):
    if tl not in _TL_REAL_CACHE:
        vals = np.array([kk_real_part(tl.im_eps, w) for w in _TL_W_GRID])
        _TL_REAL_CACHE[tl] = (np.log(_TL_W_GRID), vals)
    return _TL_REAL_CACHE[tl]


def _interp_log(log_grid, values, freq, tail_power=0.0):
    """Interpolate a smooth table in log frequency with clamped ends.

    ``tail_power = p`` extends the high side as ``value * (f_max/f)^p``.
    """
    f = np.maximum(np.asarray(freq, dtype=float), 1e-300)
    lo, hi = log_grid[0], log_grid[-1]
    lx = np.clip(np.log(f), lo, hi)
    out = np.interp(lx, log_grid, values)
    if tail_power:
        over = np.log(f) > hi
        if np.any(over):
            out = np.where(over, values[-1] * np.exp(tail_power * (hi - np.log(f))), out)
    return out


@dataclass(frozen=True)
class ItoGatedModel:
    """ITO permittivity built from its declared absorption via Kramers-Kronig.

    ``Im eps`` is the sum of Drude free-carrier absorption (density-dependent)
    and Tauc-Lorentz interband absorption (density-independent). The Drude
    Kramers-Kronig pair is analytic; the Tauc-Lorentz part is transformed
    numerically once per parameter set and interpolated afterwards, so
    gate-induced density changes are cheap.
    """

    params: ItoParams
    carrier_density: float = 0.0  # 0 means the background density
    name: str = "ito"

    def __post_init__(self):
        density = self.carrier_density or self.params.background_density
        if density <= 0:
            raise ValueError("carrier density must be positive")
        object.__setattr__(self, "carrier_density", float(density))
        object.__setattr__(
            self, "plasma_frequency", ito_plasma_frequency(density, self.params.effective_mass)
        )
        tl = self.params.tauc_lorentz
        object.__setattr__(self, "_tl_ix", _tl_imag_table(tl))
        object.__setattr__(self, "_tl_re", _tl_real_table(tl))

    def with_density(self, density):
        """New instance at a different carrier density, tables shared."""
        return replace(self, carrier_density=float(density))

    def eps_imag(self, xi):
        x = _as_nonneg(xi, "xi")
        g = self.params.drude_damping
        with np.errstate(divide="ignore"):
            drude = self.plasma_frequency**2 / (x * (x + g))
        tl = _interp_log(*self._tl_ix, x, tail_power=2.0)
        out = 1.0 + drude + tl
        out = np.where(np.isfinite(out), out, METALLIC_EPS_CAP)
        return _like(xi, out)

    def eps_real(self, omega):
        w = _as_nonneg(omega, "omega")
        if np.any(w == 0):
            raise ValueError("omega must be positive")
        g = self.params.drude_damping
        wc = w.astype(complex)
        drude = -self.plasma_frequency**2 / (wc * (wc + 1j * g))
        tl_re = _interp_log(*self._tl_re, w)
        tl_im = self.params.tauc_lorentz.im_eps(w)
        out = 1.0 + drude + tl_re + 1j * tl_im
        return _like(omega, out)

    def im_eps_declared(self, x):
        """The declared absorption spectrum (Drude + Tauc-Lorentz) at real x.

        This is the function whose Kramers-Kronig transform :meth:`eps_imag`
        implements; kept public so the consistency can be checked directly
        against a reference quadrature.
        """
        x = _as_nonneg(x, "x")
        g = self.params.drude_damping
        with np.errstate(divide="ignore"):
            drude = self.plasma_frequency**2 * g / (x * (x**2 + g**2))
        drude = np.where(np.isfinite(drude), drude, np.inf)
        return _like(x, drude + self.params.tauc_lorentz.im_eps(x))

    @property
    def static_eps(self):
        return METALLIC_EPS_CAP


# ---------------------------------------------------------------------------
# gate electrostatics
# ---------------------------------------------------------------------------


def accumulation_thickness(background_density, temperature, static_permittivity=9.3):
    """Thermal thickness of the gate-induced accumulation layer, in meters.

    ``L_a = (pi / sqrt(2)) sqrt(k_B T eps0 eps_ITO / (N_b e^2))``

    Grows as sqrt(T), shrinks as 1/sqrt(N_b).
    """
    if background_density <= 0 or temperature <= 0 or static_permittivity <= 0:
        raise ValueError("density, temperature and permittivity must be positive")
    inner = k_B * temperature * epsilon_0 * static_permittivity / (background_density * e**2)
    return (math.pi / math.sqrt(2.0)) * math.sqrt(inner)


def breakdown_voltage(silica_thickness):
    """Largest gate voltage the silica spacer can stand, ``E_b * L_s``."""
    if silica_thickness < 0:
        raise ValueError("silica thickness must be non-negative")
    return BREAKDOWN_FIELD * silica_thickness


def accumulation_density(background_density, voltage, silica_thickness, layer_thickness):
    """Carrier density in the accumulation layer under a gate voltage.

    ``N_a = N_b + eps0 eps_s V_g / (e L_s L_a)`` with the induced sheet charge
    spread over the accumulation thickness. ``V_g = 0`` returns exactly the
    background density. Voltages above the silica breakdown are rejected.
    """
    if voltage < 0:
        raise ValueError("gate voltage must be non-negative")
    vb = breakdown_voltage(silica_thickness)
    if voltage > vb:
        raise BreakdownVoltageError(
            f"gate voltage {voltage:g} V exceeds the breakdown voltage "
            f"{vb:g} V of a {silica_thickness * 1e9:g} nm silica spacer"
        )
    if layer_thickness <= 0:
        raise ValueError("accumulation layer thickness must be positive")
    if voltage == 0:
        return background_density
    sheet = epsilon_0 * SILICA_GATE_EPS * voltage / (e * silica_thickness)
    return background_density + sheet / layer_thickness


@dataclass(frozen=True)
class GateState:
    """Resolved electrical state of the gated ITO film."""

    voltage: float  # V
    temperature: float  # K
    silica_thickness: float  # m
    accumulation_thickness: float  # m
    accumulation_density: float  # m^-3

    @classmethod
    def resolve(cls, voltage, temperature, silica_thickness, ito):
        """Derive the accumulation layer for given operating conditions.

        Raises ``ValueError`` if the thermal accumulation thickness reaches
        the full film (the two-sublayer split then has no background left) and
        ``BreakdownVoltageError`` above the silica breakdown voltage.
        """
        la = accumulation_thickness(
            ito.background_density, temperature, ito.static_permittivity
        )
        if la >= ito.total_thickness:
            raise ValueError(
                f"accumulation layer {la * 1e9:.2f} nm would fill the "
                f"{ito.total_thickness * 1e9:.2f} nm ITO film; "
                "temperature or density out of the model's range"
            )
        na = accumulation_density(ito.background_density, voltage, silica_thickness, la)
        return cls(
            voltage=float(voltage),
            temperature=float(temperature),
            silica_thickness=float(silica_thickness),
            accumulation_thickness=la,
            accumulation_density=na,
        )


# ---------------------------------------------------------------------------
# data files
# ---------------------------------------------------------------------------


def data_dir():
    """Directory holding the material JSON files (env var wins)."""
    override = os.environ.get(DATA_ENV_VAR)
    if override:
        return override
    return str(resources.files("casifp").joinpath("data"))


def _read_json(name, directory):
    path = os.path.join(directory or data_dir(), f"{name}.json")
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def load_material(name, directory=None):
    """Build the permittivity model described by ``<name>.json``."""
    doc = _read_json(name, directory)
    kind = doc.get("model_kind")
    params = doc.get("parameters", {})
    label = doc.get("name", name)
    if kind == "drude_lorentz":
        return DrudeLorentzModel.from_ev(
            label,
            params["plasma_frequency_ev"],
            params["drude_damping_ev"],
            tuple(tuple(o) for o in params.get("oscillators_ev", ())),
        )
    if kind == "oscillator_table":
        return OscillatorModel(label, tuple(tuple(t) for t in params["terms"]))
    if kind == "ito_gated":
        return ItoGatedModel(_ito_params_from(params), name=label)
    raise ValueError(f"unknown model_kind {kind!r} in {name}.json")


def _ito_params_from(params):
    tl = params["tauc_lorentz_ev"]
    return ItoParams(
        background_density=params["background_density_per_m3"],
        static_permittivity=params["static_permittivity"],
        effective_mass=params["effective_mass_ratio"] * m_e,
        drude_damping=params["drude_damping_rad_s"],
        tauc_lorentz=TaucLorentz(tl["amplitude"], tl["resonance"], tl["broadening"], tl["gap"]),
        total_thickness=params["total_thickness_m"],
    )


def load_ito_params(directory=None):
    return _ito_params_from(_read_json("ito", directory)["parameters"])


@dataclass(frozen=True)
class MaterialSet:
    """The materials a cavity is built from.

    The four optical models are ready to evaluate; ITO is carried as its
    parameter record because the carrier density is decided per layer when a
    stack is assembled.
    """

    gold: DrudeLorentzModel
    teflon: OscillatorModel
    silica: OscillatorModel
    glycerol: OscillatorModel
    ito: ItoParams


_MATERIAL_CACHE: dict[str, MaterialSet] = {}


def default_materials(directory=None):
    """Load (and cache) the shipped material set."""
    key = directory or data_dir()
    if key not in _MATERIAL_CACHE:
        _MATERIAL_CACHE[key] = MaterialSet(
            gold=load_material("gold", directory),
            teflon=load_material("teflon", directory),
            silica=load_material("silica", directory),
            glycerol=load_material("glycerol", directory),
            ito=load_ito_params(directory),
        )
    return _MATERIAL_CACHE[key]


# thin functional aliases for the two evaluation axes


def eps_imag_freq(material, xi):
    """``eps(i xi)`` of a model; real, >= 1, monotone decreasing in xi."""
    return material.eps_imag(xi)


def eps_real_freq(material, omega):
    """``eps(omega)`` of a model at real frequency; complex, Im >= 0."""
    return material.eps_real(omega)
