"""Normal-incidence reflectance spectra of the cavity and dip extraction.

The suspended plate and the gold substrate form the mirrors of a liquid
Fabry-Perot cavity; its resonances show up as dips in the reflectance R(λ).
Tracking the dip against gate voltage and temperature is the package's
optical readout of the floating height.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c
from scipy.signal import find_peaks, peak_widths

from .equilibrium import sweep_equilibrium
from .errors import ResonanceNotDetectableError
from .stack import make_geometry, reflectance_real_freq

__all__ = [
    "DEFAULT_WAVELENGTH_RANGE",
    "DEFAULT_WAVELENGTH_POINTS",
    "DIP_MIN_Q",
    "DIP_THRESHOLD",
    "Spectrum",
    "Resonance",
    "full_cavity_stack",
    "reflectance_spectrum",
    "cavity_spectrum",
    "find_resonances",
    "find_resonance",
    "ResonanceSweep",
    "resonance_vs_stimulus",
]

DEFAULT_WAVELENGTH_RANGE = (400e-9, 1200e-9)
DEFAULT_WAVELENGTH_POINTS = 1601

#: Minimum dip depth (prominence in reflectance units) considered resolvable;
#: matches the assumed +/- 0.05 reflectance measurement band.
DIP_THRESHOLD = 0.05

#: Minimum quality factor for a dip to anchor a wavelength readout. Modes
#: pushed into the metal's absorption edge broaden to Q below ten, where the
#: measurement band smears the dip position over tens of nanometers; usable
#: cavity modes in this geometry sit well above fifty.
DIP_MIN_Q = 15.0


@dataclass(frozen=True)
class Spectrum:
    """Sampled reflectance with the conditions it was computed under.

    ``wavelengths`` ascend strictly; the snapshot fields are None when the
    spectrum came from a bare stack rather than a cavity configuration.
    """

    wavelengths: np.ndarray  # m
    reflectance: np.ndarray
    gap: float | None = None
    voltage: float | None = None
    temperature: float | None = None
    silica_thickness: float | None = None

    def __post_init__(self):
        w = np.asarray(self.wavelengths, dtype=float)
        r = np.asarray(self.reflectance, dtype=float)
        if w.ndim != 1 or w.shape != r.shape or w.size < 3:
            raise ValueError("need matching 1-d wavelength/reflectance arrays (>= 3 points)")
        if np.any(np.diff(w) <= 0):
            raise ValueError("wavelengths must be strictly increasing")
        object.__setattr__(self, "wavelengths", w)
        object.__setattr__(self, "reflectance", r)


@dataclass(frozen=True)
class Resonance:
    """One reflectance dip.

    ``depth`` is the dip's prominence in reflectance units; ``q_factor`` is
    ``wavelength / fwhm``; ``mode_order`` is a best-effort round-trip-phase
    label (None when the cavity composition is unknown).
    """

    wavelength: float  # m
    depth: float
    fwhm: float  # m
    q_factor: float
    reflectance_min: float
    mode_order: int | None = None


def full_cavity_stack(geometry, gap):
    """Both mirrors and everything between them, for a given gap."""
    return geometry.full_stack(gap)


def reflectance_spectrum(
    stack,
    lambda_range=DEFAULT_WAVELENGTH_RANGE,
    points=DEFAULT_WAVELENGTH_POINTS,
    snapshot=None,
):
    """Normal-incidence R(λ) of a stack on a uniform wavelength grid.

    ``snapshot`` optionally carries (gap, voltage, temperature,
    silica_thickness) metadata into the returned :class:`Spectrum`.
    """
    lo, hi = (float(x) for x in lambda_range)
    if not 0.0 < lo < hi:
        raise ValueError("lambda_range must be positive and increasing")
    if int(points) < 3:
        raise ValueError("need at least 3 spectral points")
    wavelengths = np.linspace(lo, hi, int(points))
    omega = 2.0 * math.pi * c / wavelengths
    reflectance = reflectance_real_freq(stack, omega)
    return Spectrum(wavelengths, reflectance, *(snapshot or (None,) * 4))


def cavity_spectrum(
    gap,
    geometry=None,
    lambda_range=DEFAULT_WAVELENGTH_RANGE,
    points=DEFAULT_WAVELENGTH_POINTS,
):
    """R(λ) of the cavity at one gap, with its conditions recorded."""
    geometry = geometry or make_geometry()
    return reflectance_spectrum(
        geometry.full_stack(gap),
        lambda_range,
        points,
        snapshot=(
            float(gap),
            geometry.voltage,
            geometry.temperature,
            geometry.silica_thickness,
        ),
    )


def _parabolic_vertex(x, y):
    """Vertex of the parabola through three points; falls back to the middle."""
    denom = (y[0] - 2.0 * y[1] + y[2])
    if denom <= 0.0:
        return x[1], y[1]
    # uniform-grid form is exact here; spectra use uniform grids
    step = 0.5 * (x[2] - x[0])
    shift = 0.5 * (y[0] - y[2]) / denom
    shift = float(np.clip(shift, -1.0, 1.0))
    return x[1] + shift * step, y[1] - 0.25 * (y[0] - y[2]) * shift


def _mode_order(geometry, gap, wavelength):
    """Round-trip-phase mode label from the optical path between the mirrors."""
    stack = geometry.full_stack(gap)
    omega = 2.0 * math.pi * c / wavelength
    path = 0.0
    for layer in stack.layers[1:]:  # everything between the gold surfaces
        index = complex(np.sqrt(complex(layer.material.eps_real(omega))))
        path += index.real * layer.thickness
    return max(1, round(2.0 * path / wavelength))


def find_resonances(spectrum, threshold=DIP_THRESHOLD, min_q=DIP_MIN_Q, geometry=None):
    """All usable reflectance dips, ascending in wavelength.

    Dips are local minima of R with prominence at least ``threshold``; each
    position is refined by parabolic interpolation through the minimum and
    its neighbors, and the FWHM is measured at half prominence. A dip must
    also reach ``min_q`` to count as detected: the dip position is only a
    trustworthy distance readout while the linewidth stays narrow against
    the reflectance measurement band, and modes degraded by mirror
    absorption fall far below that. ``None`` disables the quality gate.
    Mode orders are filled in when ``geometry`` is given and the spectrum
    knows its gap.
    """
    w = spectrum.wavelengths
    r = spectrum.reflectance
    indices, props = find_peaks(-r, prominence=threshold)
    if indices.size == 0:
        return ()
    widths = peak_widths(-r, indices, rel_height=0.5)
    samples = np.arange(w.size)
    left = np.interp(widths[2], samples, w)
    right = np.interp(widths[3], samples, w)

    out = []
    for j, i in enumerate(indices):
        wavelength, r_min = _parabolic_vertex(w[i - 1 : i + 2], r[i - 1 : i + 2])
        fwhm = float(right[j] - left[j])
        order = None
        if geometry is not None and spectrum.gap is not None:
            order = _mode_order(geometry, spectrum.gap, wavelength)
        quality = float(wavelength / fwhm)
        if min_q is not None and quality < min_q:
            continue
        out.append(
            Resonance(
                wavelength=float(wavelength),
                depth=float(props["prominences"][j]),
                fwhm=fwhm,
                q_factor=quality,
                reflectance_min=float(r_min),
                mode_order=order,
            )
        )
    return tuple(out)


def find_resonance(spectrum, threshold=DIP_THRESHOLD, min_q=DIP_MIN_Q, geometry=None):
    """The deepest usable dip.

    Raises
    ------
    ResonanceNotDetectableError
        If no dip reaches both the ``threshold`` prominence and the
        ``min_q`` quality gate in the sampled window.
    """
    dips = find_resonances(spectrum, threshold, min_q, geometry)
    if not dips:
        lo, hi = spectrum.wavelengths[0], spectrum.wavelengths[-1]
        raise ResonanceNotDetectableError(
            f"no reflectance dip deeper than {threshold:g} with Q above "
            f"{0.0 if min_q is None else min_q:g} between "
            f"{lo * 1e9:.0f} and {hi * 1e9:.0f} nm"
        )
    return max(dips, key=lambda dip: dip.depth)


@dataclass(frozen=True)
class ResonanceSweep:
    """Resonance tracked across an equilibrium sweep.

    Per grid value: the floating height (NaN on failure), the extracted
    :class:`Resonance` (None when equilibrium or detection failed), and the
    failure message. ``tuning_range`` is the full span of detected dip
    wavelengths.
    """

    axis: str
    values: tuple[float, ...]
    distances: tuple[float, ...]
    resonances: tuple[Resonance | None, ...]
    failures: tuple[str | None, ...]

    @property
    def wavelengths(self):
        """Dip wavelengths in meters, NaN where not detected."""
        return np.array(
            [r.wavelength if r is not None else math.nan for r in self.resonances]
        )

    @property
    def tuning_range(self):
        """max - min of the detected dip wavelengths (0 if fewer than 2)."""
        w = self.wavelengths
        w = w[np.isfinite(w)]
        if w.size < 2:
            return 0.0
        return float(w.max() - w.min())


def resonance_vs_stimulus(
    axis,
    grid,
    geometry=None,
    forces=None,
    spec=None,
    lambda_range=DEFAULT_WAVELENGTH_RANGE,
    points=DEFAULT_WAVELENGTH_POINTS,
    threshold=DIP_THRESHOLD,
    min_q=DIP_MIN_Q,
    map_fn=None,
):
    """Dip wavelength against gate voltage or temperature.

    Composes the equilibrium sweep with a spectrum and dip extraction at each
    node's floating height. Nodes whose equilibrium fails or whose dip is
    undetectable are recorded, not fatal.
    """
    if axis not in ("voltage", "temperature"):
        raise ValueError("axis must be 'voltage' or 'temperature'")
    geometry = geometry or make_geometry()
    sweep = sweep_equilibrium(
        axis, grid, geometry, forces, spec, map_fn=map_fn
    )
    distances, resonances, failures = [], [], []
    for value, point, failure in zip(sweep.values, sweep.points, sweep.failures):
        if point is None:
            distances.append(math.nan)
            resonances.append(None)
            failures.append(failure)
            continue
        node = geometry.with_conditions(**{axis: value})
        spectrum = cavity_spectrum(point.distance, node, lambda_range, points)
        try:
            resonance = find_resonance(spectrum, threshold, min_q, node)
            failures.append(None)
        except ResonanceNotDetectableError as exc:
            resonance = None
            failures.append(str(exc))
        distances.append(point.distance)
        resonances.append(resonance)
    return ResonanceSweep(
        axis=axis,
        values=sweep.values,
        distances=tuple(distances),
        resonances=tuple(resonances),
        failures=tuple(failures),
    )
