"""Thermal Lifshitz interaction between two multilayers across a liquid gap.

The free energy per unit area and the normal pressure are Matsubara sums over
imaginary frequencies ``xi_n = 2 pi k_B T n / hbar`` (the ``n = 0`` term at
half weight) of wavevector integrals over both polarizations:

.. math::

    E/A = \\frac{k_B T}{8 \\pi d^2} \\sideset{}{'}\\sum_n \\int_{x_n}^\\infty
          x \\sum_\\alpha \\ln(1 - r_1 r_2 e^{-x}) \\, dx

    P   = -\\frac{k_B T}{8 \\pi d^3} \\sideset{}{'}\\sum_n \\int_{x_n}^\\infty
          x^2 \\sum_\\alpha \\frac{r_1 r_2 e^{-x}}{1 - r_1 r_2 e^{-x}} \\, dx

written in the dimensionless axial variable ``x = 2 K d`` of the gap medium,
whose lower limit ``x_n = 2 d sqrt(eps_gap(i xi_n)) xi_n / c`` is where the
transverse wavevector reaches zero. The pressure integrand is the exact
``-d/dd`` of the energy integrand, so the two stay consistent to quadrature
accuracy. Positive pressure pushes the bodies apart.

Each wavevector integral uses a fixed composite Gauss-Legendre rule evaluated
at two node densities; the coarse/fine difference plus a geometric
extrapolation of the Matsubara tail gives the reported error bounds. All
reductions run in a fixed order so equal inputs give bit-equal outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.constants import c, hbar, k as k_B

from .errors import ConvergenceError
from .stack import make_geometry, reflection_pair_imag_freq

__all__ = [
    "QuadratureSpec",
    "CasimirResult",
    "matsubara_frequency",
    "matsubara_floor",
    "matsubara_cutoff",
    "lifshitz_interaction",
    "cavity_interaction",
    "casimir_energy_per_area",
    "casimir_pressure",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Numerical controls of the Matsubara/wavevector evaluation.

    Parameters
    ----------
    segment_edges : tuple of float
        Breakpoints of the composite rule in the shifted variable
        ``u = x - x_n``; the first must be 0, the last is the cutoff, beyond
        which the ``e^{-x}`` factor is below 4e-31.
    nodes_per_segment : int
        Gauss-Legendre nodes per segment of the coarse pass; the fine pass
        uses ``refine_factor`` times as many and provides the reported value.
    rel_tol : float
        Target for the estimated relative error of the Matsubara tail,
        measured against the sum of absolute term magnitudes (so the target
        stays meaningful where cancellation drives the net value through
        zero).
    min_terms : int
        Evaluate at least this many nonzero Matsubara terms regardless of the
        tail estimate; 0 defers entirely to the automatic floor.
    max_matsubara : int
        Give up (``ConvergenceError``) past this many terms.
    block_size : int
        Largest number of Matsubara terms evaluated as one vectorized block.
    """

    segment_edges: tuple[float, ...] = (
        0.0, 0.02, 0.08, 0.25, 0.7, 1.6, 3.5, 7.5, 16.0, 34.0, 70.0,
    )
    nodes_per_segment: int = 8
    refine_factor: int = 2
    rel_tol: float = 1e-6
    min_terms: int = 0
    max_matsubara: int = 5_000_000
    block_size: int = 4096

    def __post_init__(self):
        edges = tuple(float(x) for x in self.segment_edges)
        object.__setattr__(self, "segment_edges", edges)
        if len(edges) < 2 or edges[0] != 0.0 or any(
            b <= a for a, b in zip(edges[:-1], edges[1:])
        ):
            raise ValueError("segment_edges must start at 0 and increase")
        if self.nodes_per_segment < 2 or self.refine_factor < 2:
            raise ValueError("need at least 2 nodes per segment and refine_factor >= 2")
        if self.nodes_per_segment * (len(edges) - 1) < 16:
            raise ValueError("the coarse rule must have at least 16 nodes in total")
        if not 0.0 < self.rel_tol <= 0.1:
            raise ValueError("rel_tol must be in (0, 0.1]")
        if self.min_terms < 0 or self.max_matsubara < 1 or self.block_size < 1:
            raise ValueError("term counts must be non-negative")

    def with_tolerance(self, rel_tol):
        return replace(self, rel_tol=float(rel_tol))


@lru_cache(maxsize=None)
def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


@lru_cache(maxsize=32)
def _composite_rule(edges, nodes_per_segment):
    base_x, base_w = _gauss_legendre(nodes_per_segment)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        xs.append(a + half * (base_x + 1.0))
        ws.append(half * base_w)
    return np.concatenate(xs), np.concatenate(ws)


def matsubara_frequency(n, temperature):
    """The n-th thermal imaginary frequency ``2 pi k_B T n / hbar`` in rad/s."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if np.any(np.asarray(n) < 0):
        raise ValueError("the Matsubara index must be non-negative")
    return 2.0 * math.pi * k_B * temperature * np.asarray(n, dtype=float) / hbar


def matsubara_floor(distance, temperature, gap_material=None):
    """Physical lower bound on the number of Matsubara terms.

    The terms start decaying once ``x_n = 2 d sqrt(eps_gap(i xi_n)) xi_n / c``
    passes order one; this returns ``ceil(hbar c / (2 k_B T d sqrt(eps_1)))``
    (the gap permittivity frozen at the first Matsubara frequency), clamped to
    at least 8. The adaptive sum never trusts a tail estimate before this
    many terms.
    """
    if distance <= 0:
        raise ValueError("distance must be positive")
    if gap_material is None:
        from .materials import default_materials

        gap_material = default_materials().glycerol
    eps1 = float(gap_material.eps_imag(matsubara_frequency(1, temperature)))
    estimate = hbar * c / (2.0 * k_B * temperature * distance * math.sqrt(eps1))
    return max(8, math.ceil(estimate))


@dataclass(frozen=True)
class CasimirResult:
    """One converged evaluation of the interaction at a single gap.

    ``energy_per_area`` is in J/m^2, ``pressure`` in Pa (positive repulsive).
    ``matsubara_terms_used`` is the largest Matsubara index evaluated.
    ``estimated_relative_error`` combines the coarse/fine quadrature
    difference and the extrapolated Matsubara tail, relative to the sum of
    absolute term magnitudes; ``energy_error`` and ``pressure_error`` are the
    same bounds as absolute values.
    """

    distance: float
    temperature: float
    energy_per_area: float
    pressure: float
    matsubara_terms_used: int
    estimated_relative_error: float
    energy_error: float
    pressure_error: float


def _tail_estimate(magnitudes):
    """Geometric-extrapolation bound on the remaining Matsubara tail."""
    if len(magnitudes) < 2:
        return math.inf
    last = magnitudes[-1]
    if last == 0.0:
        return 0.0
    span = min(len(magnitudes), 5)
    first = magnitudes[-span]
    if not 0.0 < last < first:
        return math.inf
    ratio = (last / first) ** (1.0 / (span - 1))
    return last * ratio / (1.0 - ratio)


def _block_terms(upper, lower, gap, distance, xi_col, u_row, w_coarse, w_fine):
    """Coarse and fine wavevector integrals for one block of frequencies.

    Returns ``(e_coarse, p_coarse, e_fine, p_fine)`` per-frequency arrays of
    the dimensionless energy and pressure integrals (prefactors applied by
    the caller).
    """
    eps_gap = np.asarray(gap.eps_imag(xi_col), dtype=float)
    x_n = 2.0 * distance * np.sqrt(eps_gap) * xi_col / c
    x = x_n + u_row
    k = np.sqrt(u_row * (x + x_n)) / (2.0 * distance)

    r1_te, r1_tm = reflection_pair_imag_freq(upper, xi_col, k)
    r2_te, r2_tm = reflection_pair_imag_freq(lower, xi_col, k)
    decay = np.exp(-x)
    y_te = r1_te * r2_te * decay
    y_tm = r1_tm * r2_tm * decay

    e_nodes = x * (np.log1p(-y_te) + np.log1p(-y_tm))
    p_nodes = x * x * (y_te / (1.0 - y_te) + y_tm / (1.0 - y_tm))
    return (
        (w_coarse * e_nodes).sum(axis=1),
        (w_coarse * p_nodes).sum(axis=1),
        (w_fine * e_nodes).sum(axis=1),
        (w_fine * p_nodes).sum(axis=1),
    )


def lifshitz_interaction(distance, temperature, upper, lower, spec=None, gap=None):
    """Evaluate the interaction between two stacks across their shared gap.

    Parameters
    ----------
    distance : float
        Surface separation in meters, > 0.
    temperature : float
        Kelvin, > 0.
    upper, lower : LayerStack
        The facing multilayers, each described from its side of the gap; both
        must have the same incident half-space, which is the gap medium.
    spec : QuadratureSpec, optional
    gap : material model, optional
        Override for the gap medium (defaults to the stacks' shared incident
        half-space).

    Returns
    -------
    CasimirResult

    Raises
    ------
    ConvergenceError
        If the Matsubara sum has not met ``spec.rel_tol`` after
        ``spec.max_matsubara`` terms; the exception carries the partial
        result and its error estimate.
    """
    spec = spec or QuadratureSpec()
    distance = float(distance)
    temperature = float(temperature)
    if not (np.isfinite(distance) and distance > 0):
        raise ValueError("distance must be positive and finite")
    if not (np.isfinite(temperature) and temperature > 0):
        raise ValueError("temperature must be positive and finite")
    if gap is None:
        if upper.incident_halfspace != lower.incident_halfspace:
            raise ValueError(
                "the stacks' incident half-spaces differ; they must share the "
                "gap medium (or pass it explicitly as gap=...)"
            )
        gap = upper.incident_halfspace

    u1, w1 = _composite_rule(spec.segment_edges, spec.nodes_per_segment)
    u2, w2 = _composite_rule(
        spec.segment_edges, spec.nodes_per_segment * spec.refine_factor
    )
    u_all = np.concatenate([u1, u2])[None, :]
    w_coarse = np.concatenate([w1, np.zeros_like(w2)])[None, :]
    w_fine = np.concatenate([np.zeros_like(w1), w2])[None, :]

    def block(ns):
        xi = matsubara_frequency(ns, temperature)[:, None]
        return _block_terms(
            upper, lower, gap, distance, xi, u_all, w_coarse, w_fine
        )

    # n = 0 at half weight
    e0_c, p0_c, e0_f, p0_f = block(np.array([0.0]))
    totals = np.array([0.5 * e0_c[0], 0.5 * p0_c[0], 0.5 * e0_f[0], 0.5 * p0_f[0]])
    abs_sums = np.array([0.5 * abs(e0_f[0]), 0.5 * abs(p0_f[0])])

    floor = max(matsubara_floor(distance, temperature, gap), spec.min_terms)
    tail_e: list[float] = []
    tail_p: list[float] = []
    tails = (math.inf, math.inf)
    n_done = 0
    size = 64
    while n_done < spec.max_matsubara:
        size = min(size, spec.max_matsubara - n_done)
        ns = np.arange(n_done + 1, n_done + size + 1, dtype=float)
        e_c, p_c, e_f, p_f = block(ns)
        totals += np.array([e_c.sum(), p_c.sum(), e_f.sum(), p_f.sum()])
        abs_sums += np.array([np.abs(e_f).sum(), np.abs(p_f).sum()])
        n_done += size

        keep = min(8, size)
        tail_e = (tail_e + list(np.abs(e_f[-keep:])))[-8:]
        tail_p = (tail_p + list(np.abs(p_f[-keep:])))[-8:]
        if n_done >= floor:
            tails = (_tail_estimate(tail_e), _tail_estimate(tail_p))
            ok_e = tails[0] <= 0.25 * spec.rel_tol * abs_sums[0] or abs_sums[0] == 0
            ok_p = tails[1] <= 0.25 * spec.rel_tol * abs_sums[1] or abs_sums[1] == 0
            if ok_e and ok_p:
                break
        size = min(2 * size, spec.block_size)
    else:
        partial = _pack_result(
            distance, temperature, totals, abs_sums, tails, n_done
        )
        raise ConvergenceError(
            f"Matsubara sum not converged after {n_done} terms "
            f"(estimated relative error {partial.estimated_relative_error:.2e}, "
            f"target {spec.rel_tol:.2e})",
            partial=partial,
            estimate=partial.estimated_relative_error,
        )

    return _pack_result(distance, temperature, totals, abs_sums, tails, n_done)


def _pack_result(distance, temperature, totals, abs_sums, tails, n_done):
    pref_e = k_B * temperature / (8.0 * math.pi * distance**2)
    pref_p = -k_B * temperature / (8.0 * math.pi * distance**3)
    e_coarse, p_coarse, e_fine, p_fine = totals
    bound_e = abs(e_fine - e_coarse) + (tails[0] if math.isfinite(tails[0]) else 0.0)
    bound_p = abs(p_fine - p_coarse) + (tails[1] if math.isfinite(tails[1]) else 0.0)
    rel = 0.0
    if abs_sums[0] > 0:
        rel = bound_e / abs_sums[0]
    if abs_sums[1] > 0:
        rel = max(rel, bound_p / abs_sums[1])
    return CasimirResult(
        distance=distance,
        temperature=temperature,
        energy_per_area=pref_e * e_fine,
        pressure=pref_p * p_fine,
        matsubara_terms_used=n_done,
        estimated_relative_error=rel,
        energy_error=abs(pref_e) * bound_e,
        pressure_error=abs(pref_p) * bound_p,
    )


def casimir_energy_per_area(distance, temperature, upper, lower, spec=None, gap=None):
    """Free energy per unit area between two stacks, in J/m^2 (< 0 binding)."""
    return lifshitz_interaction(distance, temperature, upper, lower, spec, gap).energy_per_area


def casimir_pressure(distance, temperature, upper, lower, spec=None, gap=None):
    """Normal pressure between two stacks, in Pa (positive repulsive)."""
    return lifshitz_interaction(distance, temperature, upper, lower, spec, gap).pressure


def cavity_interaction(distance, geometry=None, spec=None):
    """The gold plate against the gated coated substrate, through glycerol."""
    geometry = geometry or make_geometry()
    return lifshitz_interaction(
        distance,
        geometry.temperature,
        geometry.upper_stack(),
        geometry.lower_stack(),
        spec,
        geometry.materials.glycerol,
    )


def matsubara_cutoff(temperature, distance, rel_tol=1e-6, upper=None, lower=None, spec=None):
    """How many Matsubara terms a converged sum actually used.

    Runs the adaptive evaluation at the requested tolerance (on the default
    cavity at ``temperature`` unless both stacks are given) and reports the
    largest index it needed. Always at least :func:`matsubara_floor`; block
    evaluation rounds the count up. Loosening ``rel_tol`` never increases the
    result.

    Raises
    ------
    ConvergenceError
        If the hard term limit is exceeded before reaching ``rel_tol``.
    """
    if (upper is None) != (lower is None):
        raise ValueError("pass both stacks or neither")
    gap = None
    if upper is None:
        geometry = make_geometry(temperature=temperature)
        upper = geometry.upper_stack()
        lower = geometry.lower_stack()
        gap = geometry.materials.glycerol
    base = spec or QuadratureSpec()
    result = lifshitz_interaction(
        distance, temperature, upper, lower, base.with_tolerance(rel_tol), gap
    )
    return result.matsubara_terms_used
