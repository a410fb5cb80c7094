"""Casimir-suspended Fabry-Perot cavities with a gated ITO film.

A thin gold plate immersed in glycerol above a layered substrate floats
where Casimir-Lifshitz repulsion balances its weight. The subpackages
compute dielectric responses on the imaginary and real frequency axes
(:mod:`casifp.materials`), layered reflection coefficients
(:mod:`casifp.stack`), the interaction free energy and pressure
(:mod:`casifp.casimir`), floating heights (:mod:`casifp.equilibrium`),
cavity reflectance spectra (:mod:`casifp.optics`), and thermal position
statistics (:mod:`casifp.brownian`). :mod:`casifp.cli` exposes the same
pipelines as a command line tool.
"""

from .brownian import (
    PositionDistribution,
    PotentialProfile,
    ScenarioComparison,
    compare_distributions,
    position_distribution,
    potential_profile,
)
from .casimir import (
    CasimirResult,
    QuadratureSpec,
    casimir_energy_per_area,
    casimir_pressure,
    cavity_interaction,
    lifshitz_interaction,
    matsubara_cutoff,
    matsubara_floor,
    matsubara_frequency,
)
from .config import (
    RunManifest,
    ScenarioConfig,
    SweepRange,
    emit_table,
    parse_area,
    parse_config,
    parse_length,
    parse_temperature,
    parse_voltage,
    read_table,
)
from .equilibrium import (
    BodyForces,
    EquilibriumPoint,
    SweepResult,
    cavity_equilibrium,
    cavity_pressure_curve,
    find_equilibrium,
    find_equilibrium_roots,
    gb_pressure,
    sweep_equilibrium,
)
from .errors import (
    BreakdownVoltageError,
    CasifpError,
    ConfigError,
    ConvergenceError,
    GridCoverageError,
    NoSuspensionError,
    NumericalError,
    QuadratureError,
    ResonanceNotDetectableError,
    StageError,
)
from .figures import FIGURE_IDS, run_figure
from .materials import (
    ConstantModel,
    DrudeLorentzModel,
    GateState,
    ItoGatedModel,
    ItoParams,
    MaterialSet,
    OscillatorModel,
    TaucLorentz,
    accumulation_density,
    accumulation_thickness,
    breakdown_voltage,
    default_materials,
    ito_plasma_frequency,
    kk_real_part,
    kk_transform,
    load_material,
)
from .optics import (
    DIP_MIN_Q,
    DIP_THRESHOLD,
    Resonance,
    ResonanceSweep,
    Spectrum,
    cavity_spectrum,
    find_resonance,
    find_resonances,
    full_cavity_stack,
    reflectance_spectrum,
    resonance_vs_stimulus,
)
from .stack import (
    CavityGeometry,
    Layer,
    LayerStack,
    build_lower_stack,
    build_upper_stack,
    make_geometry,
    reflectance_real_freq,
    reflection_imag_freq,
    reflection_pair_imag_freq,
    transmittance_real_freq,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "CasifpError",
    "ConfigError",
    "BreakdownVoltageError",
    "NumericalError",
    "QuadratureError",
    "ConvergenceError",
    "NoSuspensionError",
    "ResonanceNotDetectableError",
    "GridCoverageError",
    "StageError",
    # materials
    "ConstantModel",
    "DrudeLorentzModel",
    "OscillatorModel",
    "TaucLorentz",
    "ItoParams",
    "ItoGatedModel",
    "GateState",
    "MaterialSet",
    "kk_transform",
    "kk_real_part",
    "ito_plasma_frequency",
    "accumulation_thickness",
    "accumulation_density",
    "breakdown_voltage",
    "load_material",
    "default_materials",
    # stack
    "Layer",
    "LayerStack",
    "CavityGeometry",
    "make_geometry",
    "build_upper_stack",
    "build_lower_stack",
    "reflection_pair_imag_freq",
    "reflection_imag_freq",
    "reflectance_real_freq",
    "transmittance_real_freq",
    # casimir
    "QuadratureSpec",
    "CasimirResult",
    "matsubara_frequency",
    "matsubara_floor",
    "matsubara_cutoff",
    "lifshitz_interaction",
    "casimir_energy_per_area",
    "casimir_pressure",
    "cavity_interaction",
    # equilibrium
    "BodyForces",
    "EquilibriumPoint",
    "SweepResult",
    "gb_pressure",
    "cavity_pressure_curve",
    "find_equilibrium_roots",
    "find_equilibrium",
    "cavity_equilibrium",
    "sweep_equilibrium",
    # optics
    "DIP_MIN_Q",
    "DIP_THRESHOLD",
    "Spectrum",
    "Resonance",
    "ResonanceSweep",
    "full_cavity_stack",
    "reflectance_spectrum",
    "cavity_spectrum",
    "find_resonances",
    "find_resonance",
    "resonance_vs_stimulus",
    # brownian
    "PotentialProfile",
    "potential_profile",
    "PositionDistribution",
    "position_distribution",
    "ScenarioComparison",
    "compare_distributions",
    # config
    "ScenarioConfig",
    "SweepRange",
    "RunManifest",
    "parse_config",
    "parse_length",
    "parse_voltage",
    "parse_temperature",
    "parse_area",
    "emit_table",
    "read_table",
    # figures
    "FIGURE_IDS",
    "run_figure",
]
