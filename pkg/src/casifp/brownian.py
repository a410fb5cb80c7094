"""Thermal position statistics of the floating plate.

The plate sits in a potential well U(d) built from the interaction free
energy and the net body force; at finite temperature its height fluctuates
with Boltzmann weight exp(-U/kT). These routines build U on an adaptive
grid, normalize the position distribution, and compare scenarios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import k as k_B

from .casimir import cavity_interaction
from .equilibrium import BodyForces
from .errors import GridCoverageError
from .stack import make_geometry

__all__ = [
    "DEFAULT_AREA",
    "DEFAULT_RANGE",
    "BOUNDARY_DENSITY_RATIO",
    "PotentialProfile",
    "potential_profile",
    "PositionDistribution",
    "position_distribution",
    "ScenarioComparison",
    "compare_distributions",
]

#: 20 um x 20 um plate.
DEFAULT_AREA = 4e-10

DEFAULT_RANGE = (5e-9, 500e-9)

#: Edge density above this fraction of the peak means the grid clipped the well.
BOUNDARY_DENSITY_RATIO = 1e-8


def _parabolic_min(x, y, i):
    """Refined minimum near index ``i`` on a possibly non-uniform grid."""
    if i <= 0 or i >= x.size - 1:
        return float(x[i]), float(y[i])
    x0, x1, x2 = x[i - 1], x[i], x[i + 1]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    # quadratic fit via divided differences
    d1 = (y1 - y0) / (x1 - x0)
    d2 = (y2 - y1) / (x2 - x1)
    curv = (d2 - d1) / (x2 - x0)  # half the second derivative
    if not math.isfinite(curv) or curv <= 0.0:
        return float(x1), float(y1)
    vertex = 0.5 * (x0 + x1) - d1 / (2.0 * curv)
    vertex = float(np.clip(vertex, x0, x2))
    # the interpolating quadratic in Newton form, evaluated at its vertex
    value = y0 + d1 * (vertex - x0) + curv * (vertex - x0) * (vertex - x1)
    return vertex, float(value)


@dataclass(frozen=True)
class PotentialProfile:
    """U(d) for one scenario.

    ``energies`` holds the total potential (interaction energy over the
    plate area plus the body-force ramp) on an ascending grid. The recorded
    temperature is the bath the profile was built for; distributions may
    override it.
    """

    distances: np.ndarray  # m, ascending
    energies: np.ndarray  # J
    area: float
    temperature: float
    load_pressure: float

    def __post_init__(self):
        d = np.asarray(self.distances, dtype=float)
        u = np.asarray(self.energies, dtype=float)
        if d.ndim != 1 or d.shape != u.shape or d.size < 5:
            raise ValueError("need matching 1-d distance/energy arrays (>= 5 points)")
        if np.any(np.diff(d) <= 0):
            raise ValueError("distances must be strictly increasing")
        if not (self.area > 0.0 and self.temperature > 0.0):
            raise ValueError("area and temperature must be positive")
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "energies", u)

    def minimum(self):
        """(location, energy) of the well floor, parabolically refined."""
        i = int(np.argmin(self.energies))
        return _parabolic_min(self.distances, self.energies, i)


def _total_energy(distances, geometry, load, area, spec):
    results = [cavity_interaction(float(d), geometry, spec) for d in distances]
    interaction = np.array([r.energy_per_area for r in results])
    return interaction * area + load * area * np.asarray(distances)


def potential_profile(
    geometry=None,
    forces=None,
    area=DEFAULT_AREA,
    d_range=DEFAULT_RANGE,
    coarse_points=400,
    refine_points=1600,
    spec=None,
    map_fn=None,
):
    """Build U(d) on a log-coarse grid densified around the well.

    The coarse pass locates the minimum; a linear window of
    ``refine_points`` spanning roughly twelve thermal widths is then merged
    in so the distribution integrals converge. A minimum on the boundary of
    ``d_range`` raises :class:`GridCoverageError`.
    """
    geometry = geometry or make_geometry()
    forces = forces or BodyForces()
    load = forces.load_pressure(geometry.plate_thickness)
    lo, hi = (float(x) for x in d_range)
    if not 0.0 < lo < hi:
        raise ValueError("d_range must be positive and increasing")

    run = map_fn or map
    coarse = np.geomspace(lo, hi, int(coarse_points))
    u_coarse = np.array(
        list(
            run(
                lambda d: float(
                    cavity_interaction(d, geometry, spec).energy_per_area
                )
                * area
                + load * area * d,
                coarse,
            )
        )
    )

    i = int(np.argmin(u_coarse))
    if i == 0 or i == coarse.size - 1:
        raise GridCoverageError(
            f"potential minimum sits on the d_range boundary "
            f"({coarse[i] * 1e9:.1f} nm); widen d_range"
        )
    d0, _ = _parabolic_min(coarse, u_coarse, i)

    # thermal width from the local curvature; generous fallback when flat
    d1 = (u_coarse[i] - u_coarse[i - 1]) / (coarse[i] - coarse[i - 1])
    d2 = (u_coarse[i + 1] - u_coarse[i]) / (coarse[i + 1] - coarse[i])
    curvature = 2.0 * (d2 - d1) / (coarse[i + 1] - coarse[i - 1])
    if math.isfinite(curvature) and curvature > 0.0:
        sigma = math.sqrt(k_B * geometry.temperature / curvature)
        half_width = 12.0 * sigma
    else:
        half_width = 0.4 * d0
    win_lo = max(lo, d0 - half_width)
    win_hi = min(hi, d0 + half_width)
    window = np.linspace(win_lo, win_hi, int(refine_points))
    u_window = np.array(
        list(
            run(
                lambda d: float(
                    cavity_interaction(d, geometry, spec).energy_per_area
                )
                * area
                + load * area * d,
                window,
            )
        )
    )

    d_all = np.concatenate([coarse, window])
    u_all = np.concatenate([u_coarse, u_window])
    order = np.argsort(d_all, kind="stable")
    d_all, u_all = d_all[order], u_all[order]
    keep = np.concatenate([[True], np.diff(d_all) > 0])
    return PotentialProfile(
        distances=d_all[keep],
        energies=u_all[keep],
        area=area,
        temperature=geometry.temperature,
        load_pressure=load,
    )


@dataclass(frozen=True)
class PositionDistribution:
    """Normalized Boltzmann density of the plate height.

    ``offset`` is mean minus the potential-minimum location: thermal
    occupation of an asymmetric well shifts the average height away from
    the force-balance point.
    """

    distances: np.ndarray  # m
    density: np.ndarray  # 1/m
    temperature: float
    mean: float
    std: float
    most_probable: float
    peak_density: float
    potential_minimum: float

    @property
    def offset(self):
        return self.mean - self.potential_minimum


def position_distribution(profile, temperature=None):
    """Boltzmann-normalize a potential profile.

    The well depth is referenced to its minimum before exponentiating, so
    deep wells cannot underflow the normalization. Edge densities above
    ``BOUNDARY_DENSITY_RATIO`` of the peak raise :class:`GridCoverageError`.
    """
    t = float(temperature if temperature is not None else profile.temperature)
    if t <= 0.0:
        raise ValueError("temperature must be positive")
    d = profile.distances
    u = profile.energies
    weight = np.exp(-(u - u.min()) / (k_B * t))
    norm = np.trapezoid(weight, d)
    if not (norm > 0.0 and math.isfinite(norm)):
        raise GridCoverageError("Boltzmann weight integrates to nothing on this grid")
    rho = weight / norm

    peak = float(rho.max())
    edge = max(rho[0], rho[-1])
    if edge > BOUNDARY_DENSITY_RATIO * peak:
        raise GridCoverageError(
            f"edge density {edge / peak:.2e} of peak exceeds "
            f"{BOUNDARY_DENSITY_RATIO:g}; widen d_range"
        )

    mean = float(np.trapezoid(rho * d, d))
    var = float(np.trapezoid(rho * (d - mean) ** 2, d))
    i = int(np.argmax(rho))
    mode, neg_peak = _parabolic_min(d, -rho, i)
    d_min, _ = profile.minimum()
    return PositionDistribution(
        distances=d,
        density=rho,
        temperature=t,
        mean=mean,
        std=math.sqrt(max(var, 0.0)),
        most_probable=float(mode),
        peak_density=float(-neg_peak),
        potential_minimum=float(d_min),
    )


def _overlap(a, b):
    """``integral of min(rho_a, rho_b)`` on the union grid (0 outside support)."""
    grid = np.union1d(a.distances, b.distances)
    rho_a = np.interp(grid, a.distances, a.density, left=0.0, right=0.0)
    rho_b = np.interp(grid, b.distances, b.density, left=0.0, right=0.0)
    return float(np.trapezoid(np.minimum(rho_a, rho_b), grid))


@dataclass(frozen=True)
class ScenarioComparison:
    """Distributions for several (voltage, temperature, silica) scenarios.

    ``overlaps[i, j]`` is the shared probability mass between scenarios i
    and j (1 on the diagonal, NaN where a scenario failed).
    """

    scenarios: tuple[tuple[float, float, float], ...]
    distributions: tuple[PositionDistribution | None, ...]
    failures: tuple[str | None, ...]
    overlaps: np.ndarray


def compare_distributions(
    scenarios,
    geometry=None,
    forces=None,
    area=DEFAULT_AREA,
    d_range=DEFAULT_RANGE,
    coarse_points=400,
    refine_points=1600,
    spec=None,
    map_fn=None,
):
    """Position statistics for a list of (voltage, temperature, silica) tuples.

    Scenario failures (no well in range, breakdown voltage, convergence)
    are recorded per scenario; the pairwise overlap matrix has NaN in the
    affected rows.
    """
    from .errors import CasifpError

    geometry = geometry or make_geometry()
    keys = ("voltage", "temperature", "silica_thickness")
    cleaned = tuple(tuple(float(x) for x in s) for s in scenarios)
    if any(len(s) != 3 for s in cleaned):
        raise ValueError("each scenario is (voltage, temperature, silica_thickness)")

    distributions, failures = [], []
    for scenario in cleaned:
        node = geometry.with_conditions(**dict(zip(keys, scenario)))
        try:
            profile = potential_profile(
                node, forces, area, d_range, coarse_points, refine_points, spec, map_fn
            )
            distributions.append(position_distribution(profile))
            failures.append(None)
        except (CasifpError, ValueError) as exc:
            distributions.append(None)
            failures.append(f"{type(exc).__name__}: {exc}")

    n = len(cleaned)
    overlaps = np.full((n, n), math.nan)
    for i in range(n):
        if distributions[i] is None:
            continue
        overlaps[i, i] = 1.0
        for j in range(i + 1, n):
            if distributions[j] is None:
                continue
            overlaps[i, j] = overlaps[j, i] = _overlap(
                distributions[i], distributions[j]
            )
    return ScenarioComparison(
        scenarios=cleaned,
        distributions=tuple(distributions),
        failures=tuple(failures),
        overlaps=overlaps,
    )
