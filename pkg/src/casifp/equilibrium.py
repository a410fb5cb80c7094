"""Mechanical equilibrium of the suspended plate.

The plate's weight per unit area, less buoyancy, loads it toward the
substrate; the repulsive branch of the cavity pressure carries it. A stable
floating height is a root of ``P(d) - load`` where the pressure falls with
increasing gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .casimir import QuadratureSpec, cavity_interaction
from .errors import NoSuspensionError
from .stack import make_geometry

__all__ = [
    "BodyForces",
    "gb_pressure",
    "EquilibriumPoint",
    "cavity_pressure_curve",
    "find_equilibrium_roots",
    "find_equilibrium",
    "cavity_equilibrium",
    "SweepResult",
    "sweep_equilibrium",
]

#: Default numerical controls for root finding: tighter than the general
#: default so the discrete Matsubara-count steps stay far below the residual
#: the root is resolved to.
_SOLVER_SPEC = QuadratureSpec(rel_tol=1e-8)

_DERIVATIVE_STEP = 1e-10  # m, central-difference step for stability checks
_DEFAULT_BRACKET = (10e-9, 500e-9)


@dataclass(frozen=True)
class BodyForces:
    """Densities and gravity that set the plate's load per unit area."""

    plate_density: float = 19300.0  # kg/m^3, gold
    liquid_density: float = 1260.0  # kg/m^3, glycerol
    gravity: float = 9.8  # m/s^2

    def __post_init__(self):
        if self.plate_density <= 0 or self.liquid_density < 0 or self.gravity <= 0:
            raise ValueError("densities and gravity must be positive")
        if self.plate_density <= self.liquid_density:
            raise ValueError("the plate must be denser than the liquid")

    def load_pressure(self, plate_thickness):
        """Weight minus buoyancy per unit area, in Pa, for a given thickness."""
        if plate_thickness < 0:
            raise ValueError("plate thickness must be non-negative")
        return (self.plate_density - self.liquid_density) * self.gravity * plate_thickness


def gb_pressure(plate_thickness=40e-9, forces=None):
    """Gravity-minus-buoyancy load of the immersed plate, in Pa."""
    return (forces or BodyForces()).load_pressure(plate_thickness)


@dataclass(frozen=True)
class EquilibriumPoint:
    """A root of the force balance.

    ``distance`` in meters; ``stable`` is True where the pressure falls with
    increasing gap; ``casimir_zero_crossing`` is where the bare pressure
    curve itself changes sign (None if it does not in the scanned bracket);
    ``residual_pressure`` is the force-balance residual at the root, in Pa.
    """

    distance: float
    stable: bool
    casimir_zero_crossing: float | None
    residual_pressure: float


def cavity_pressure_curve(distances, geometry=None, spec=None):
    """Evaluate the cavity interaction on a grid of gaps.

    Returns a list of :class:`casifp.casimir.CasimirResult`, one per input
    distance, in input order.
    """
    geometry = geometry or make_geometry()
    return [cavity_interaction(float(d), geometry, spec) for d in np.asarray(distances, float)]


def find_equilibrium_roots(
    pressure_curve, load, bracket=_DEFAULT_BRACKET, scan_points=60
):
    """All roots of ``pressure_curve(d) = load`` in the bracket.

    The curve is scanned on a logarithmic grid to find sign changes, each of
    which is refined by bracketed root finding to well below 0.01 nm. Roots
    closer together than the scan resolution can be missed; the default grid
    resolves the single repulsive-to-attractive crossing of this system.

    Returns ``(points, zero_crossing)``: a tuple of :class:`EquilibriumPoint`
    in ascending distance, and the root of ``pressure_curve`` itself (None if
    the bare curve does not change sign in the bracket).
    """
    lo, hi = (float(x) for x in bracket)
    if not 0.0 < lo < hi:
        raise ValueError("bracket must be positive and increasing")
    if not load > 0:
        raise ValueError("load must be positive")

    def imbalance(d):
        return pressure_curve(d) - load

    grid = np.geomspace(lo, hi, int(scan_points))
    values = np.array([imbalance(d) for d in grid])
    roots = [float(a) for a, fa in zip(grid, values) if fa == 0.0]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if fa * fb < 0.0:
            roots.append(brentq(imbalance, a, b, xtol=1e-12))
    roots.sort()

    pressures = values + load
    zero_crossing = None
    sign_change = np.nonzero(pressures[:-1] * pressures[1:] < 0.0)[0]
    if sign_change.size:
        i = sign_change[0]
        zero_crossing = brentq(pressure_curve, grid[i], grid[i + 1], xtol=1e-12)

    points = []
    for root in roots:
        h = _DERIVATIVE_STEP
        slope = (pressure_curve(root + h) - pressure_curve(root - h)) / (2.0 * h)
        points.append(
            EquilibriumPoint(
                distance=root,
                stable=bool(slope < 0.0),
                casimir_zero_crossing=zero_crossing,
                residual_pressure=imbalance(root),
            )
        )
    return tuple(points), zero_crossing


def find_equilibrium(pressure_curve, load, bracket=_DEFAULT_BRACKET, scan_points=60):
    """The stable root of ``pressure_curve(d) = load``.

    Parameters
    ----------
    pressure_curve : callable
        Continuous pressure in Pa as a function of separation in m.
    load : float
        Downward load in Pa, > 0.
    bracket : (float, float)
        Search interval in meters.

    Returns
    -------
    EquilibriumPoint
        The stable root of smallest distance (unstable roots are flagged and
        available from :func:`find_equilibrium_roots`).

    Raises
    ------
    NoSuspensionError
        If the balance has no root in the bracket, or only unstable ones.
    """
    points, _ = find_equilibrium_roots(pressure_curve, load, bracket, scan_points)
    for point in points:
        if point.stable:
            return point
    lo, hi = bracket
    if points:
        raise NoSuspensionError(
            f"only unstable force-balance roots between {lo * 1e9:.0f} and "
            f"{hi * 1e9:.0f} nm; nothing can float there"
        )
    raise NoSuspensionError(
        f"the pressure never balances the {load:.3g} Pa load between "
        f"{lo * 1e9:.0f} and {hi * 1e9:.0f} nm"
    )


def cavity_equilibrium(
    geometry=None,
    forces=None,
    spec=None,
    bracket=_DEFAULT_BRACKET,
    scan_points=60,
):
    """The floating height of the plate in a given cavity configuration."""
    geometry = geometry or make_geometry()
    forces = forces or BodyForces()
    spec = spec or _SOLVER_SPEC
    load = forces.load_pressure(geometry.plate_thickness)

    def pressure(d):
        return cavity_interaction(d, geometry, spec).pressure

    return find_equilibrium(pressure, load, bracket, scan_points)


@dataclass(frozen=True)
class SweepResult:
    """Equilibrium distance as one operating condition varies.

    ``points`` holds an :class:`EquilibriumPoint` per grid value, None where
    the configuration failed; ``failures`` holds the matching error message.
    ``frozen_gate_temperature`` records a gate temperature held fixed during
    a temperature sweep (None when the gate follows the swept temperature).
    """

    axis: str
    values: tuple[float, ...]
    points: tuple[EquilibriumPoint | None, ...]
    failures: tuple[str | None, ...]
    frozen_gate_temperature: float | None = None

    @property
    def distances(self):
        """Equilibrium distances in meters, NaN where a node failed."""
        return np.array(
            [p.distance if p is not None else math.nan for p in self.points]
        )

    @property
    def trend(self):
        """``"increasing"``, ``"decreasing"``, ``"flat"``, or ``"mixed"``."""
        d = self.distances
        d = d[np.isfinite(d)]
        if d.size < 2:
            return "flat"
        diffs = np.diff(d)
        if np.all(diffs > 0):
            return "increasing"
        if np.all(diffs < 0):
            return "decreasing"
        if np.all(diffs == 0):
            return "flat"
        return "mixed"


_SWEEP_AXES = ("voltage", "temperature", "silica_thickness")


def sweep_equilibrium(
    axis,
    grid,
    geometry=None,
    forces=None,
    spec=None,
    bracket=_DEFAULT_BRACKET,
    scan_points=60,
    freeze_gate_temperature=None,
    map_fn=None,
):
    """Track the floating height while one operating condition varies.

    Parameters
    ----------
    axis : str
        One of ``"voltage"``, ``"temperature"``, ``"silica_thickness"``.
    grid : array_like
        Values of that condition, in V, K, or m.
    freeze_gate_temperature : float, optional
        For temperature sweeps only: resolve the gate's accumulation layer at
        this fixed temperature while the thermal sum follows the swept one,
        isolating the radiation-side temperature dependence.
    map_fn : callable, optional
        Order-preserving ``map(fn, nodes)`` replacement, for running nodes
        concurrently.

    Returns
    -------
    SweepResult
        Nodes that raise configuration or suspension errors are recorded as
        failures instead of aborting the sweep.
    """
    if axis not in _SWEEP_AXES:
        raise ValueError(f"axis must be one of {_SWEEP_AXES}")
    if freeze_gate_temperature is not None and axis != "temperature":
        raise ValueError("freeze_gate_temperature only applies to temperature sweeps")
    geometry = geometry or make_geometry()
    values = tuple(float(v) for v in np.asarray(grid, dtype=float))

    def solve(value):
        node = geometry.with_conditions(**{axis: value})
        if freeze_gate_temperature is not None:
            node = node.with_conditions(gate_temperature=freeze_gate_temperature)
        try:
            node.gate_state()
            return cavity_equilibrium(node, forces, spec, bracket, scan_points), None
        except Exception as exc:
            if type(exc).__module__.split(".")[0] == "casifp" or isinstance(
                exc, ValueError
            ):
                return None, f"{type(exc).__name__}: {exc}"
            raise

    outcomes = list((map_fn or map)(solve, values))
    return SweepResult(
        axis=axis,
        values=values,
        points=tuple(point for point, _ in outcomes),
        failures=tuple(message for _, message in outcomes),
        frozen_gate_temperature=freeze_gate_temperature,
    )
