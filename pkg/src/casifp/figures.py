"""Reproduction drivers: one CSV bundle per published figure panel.

Each driver resolves its grids from a :class:`ScenarioConfig`, runs the
corresponding sweep, and emits manifest-stamped CSVs plus a JSON manifest
sidecar. Grids are deterministic functions of the config, so identical
config and data files produce byte-identical table bodies. A failing stage
still writes the manifest (with the failure recorded) and keeps whatever
tables were already complete.
"""

from __future__ import annotations

import math

import numpy as np

from .brownian import compare_distributions
from .casimir import cavity_interaction
from .config import RunManifest, ScenarioConfig, emit_table
from .equilibrium import BodyForces, cavity_equilibrium, sweep_equilibrium
from .errors import StageError
from .optics import cavity_spectrum, resonance_vs_stimulus
from .stack import CavityGeometry

__all__ = ["FIGURE_IDS", "run_figure"]

#: Separation grid shared by the pressure-curve panels, in meters.
_PRESSURE_GRID = tuple(np.linspace(40e-9, 200e-9, 81))

#: Gate thicknesses of the multi-curve equilibrium panels, in meters.
_LS_CURVES = (100e-9, 150e-9, 200e-9)

#: Gate-thickness grid of the equilibrium inset and the mode map, in meters.
_LS_SPAN = tuple(np.linspace(50e-9, 400e-9, 15))
_LS_MAP = tuple(np.linspace(50e-9, 400e-9, 36))


def _pressure_panel(config, label_values, condition):
    """Pressure-vs-separation rows for a family of operating points."""
    geometry = config.geometry().with_conditions(**{condition: label_values[0]})
    spec = config.quadrature()
    forces = BodyForces()
    load = forces.load_pressure(config.plate_thickness)
    columns = [f"P_Pa_{condition[0].upper()}{value:g}" for value in label_values]
    rows = []
    for d in _PRESSURE_GRID:
        row = {"d_nm": d * 1e9}
        for value, column in zip(label_values, columns):
            node = geometry.with_conditions(**{condition: value})
            row[column] = cavity_interaction(d, node, spec).pressure
        row["load_Pa"] = load
        rows.append(row)
    return ("d_nm", *columns, "load_Pa"), rows


def _fig2a(config, emit, map_fn):
    vb = config.breakdown
    voltages = tuple(vb * k / 3.0 for k in range(4))
    schema, rows = _pressure_panel(config, voltages, "voltage")
    return [emit("fig2a", schema, rows)]


def _fig3a(config, emit, map_fn):
    schema, rows = _pressure_panel(config, (300.0, 350.0, 400.0), "temperature")
    return [emit("fig3a", schema, rows)]


def _equilibrium_curves(config, axis, grids, map_fn):
    """Long-format d_e rows across ``axis`` for each gate thickness."""
    rows = []
    spec = config.quadrature()
    for thickness, grid in grids:
        geometry = config.geometry().with_conditions(silica_thickness=thickness)
        sweep = sweep_equilibrium(axis, grid, geometry, spec=spec, map_fn=map_fn)
        for value, point, failure in zip(sweep.values, sweep.points, sweep.failures):
            rows.append(
                {
                    "L_s_nm": thickness * 1e9,
                    ("V" if axis == "voltage" else "T_K"): value,
                    "d_e_nm": math.nan if point is None else point.distance * 1e9,
                    "stable": False if point is None else point.stable,
                }
            )
    key = "V" if axis == "voltage" else "T_K"
    return ("L_s_nm", key, "d_e_nm", "stable"), rows


def _fig2b(config, emit, map_fn):
    from .materials import breakdown_voltage

    grids = [
        (ls, tuple(np.linspace(0.0, breakdown_voltage(ls), 13))) for ls in _LS_CURVES
    ]
    schema, rows = _equilibrium_curves(config, "voltage", grids, map_fn)
    paths = [emit("fig2b", schema, rows)]

    inset_rows = []
    spec = config.quadrature()
    for ls in _LS_SPAN:
        geometry = config.geometry().with_conditions(silica_thickness=ls)
        sweep = sweep_equilibrium(
            "voltage", (0.0, breakdown_voltage(ls)), geometry, spec=spec, map_fn=map_fn
        )
        d0, db = (
            math.nan if p is None else p.distance * 1e9 for p in sweep.points
        )
        inset_rows.append(
            {
                "L_s_nm": ls * 1e9,
                "d_e_V0_nm": d0,
                "d_e_Vb_nm": db,
                "delta_nm": d0 - db,
            }
        )
    paths.append(
        emit("fig2b_inset", ("L_s_nm", "d_e_V0_nm", "d_e_Vb_nm", "delta_nm"), inset_rows)
    )
    return paths


def _fig3b(config, emit, map_fn):
    grid = tuple(np.linspace(300.0, 400.0, 11))
    grids = [(ls, grid) for ls in _LS_CURVES]
    schema, rows = _equilibrium_curves(config, "temperature", grids, map_fn)
    return [emit("fig3b", schema, rows)]


def _fig4a(config, emit, map_fn):
    geometry = config.geometry()
    rows = []
    for ls in _LS_MAP:
        node = geometry.with_conditions(silica_thickness=ls)
        spectrum = cavity_spectrum(
            60e-9, node, config.lambda_range(), config.lambda_points
        )
        rows.extend(
            {"L_s_nm": ls * 1e9, "lambda_nm": w * 1e9, "R": r}
            for w, r in zip(spectrum.wavelengths, spectrum.reflectance)
        )
    return [emit("fig4a", ("L_s_nm", "lambda_nm", "R"), rows)]


def _resonance_rows(sweep):
    reference = next(
        (r.wavelength for r in sweep.resonances if r is not None), math.nan
    )
    rows = []
    for value, distance, resonance in zip(
        sweep.values, sweep.distances, sweep.resonances
    ):
        detected = resonance is not None
        rows.append(
            {
                "stimulus": value,
                "d_e_nm": distance * 1e9,
                "lambda_res_nm": resonance.wavelength * 1e9 if detected else math.nan,
                "q_factor": resonance.q_factor if detected else math.nan,
                "delta_lambda_nm": (resonance.wavelength - reference) * 1e9
                if detected
                else math.nan,
            }
        )
    return ("stimulus", "d_e_nm", "lambda_res_nm", "q_factor", "delta_lambda_nm"), rows


def _fig4b(config, emit, map_fn):
    geometry = config.geometry()
    spec = config.quadrature()
    paths = []
    for axis, grid in (
        ("voltage", tuple(np.linspace(0.0, config.breakdown, 11))),
        ("temperature", tuple(np.linspace(300.0, 400.0, 11))),
    ):
        sweep = resonance_vs_stimulus(
            axis,
            grid,
            geometry,
            spec=spec,
            lambda_range=config.lambda_range(),
            points=config.lambda_points,
            map_fn=map_fn,
        )
        schema, rows = _resonance_rows(sweep)
        paths.append(emit(f"fig4b_{axis}", schema, rows))
    return paths


def _brownian_panel(config, emit, map_fn, figure_id, silica_thickness):
    """The six published scenarios: a voltage series and a temperature series.

    The (V=0, 300 K) initial state opens both series, matching the dashed
    reference curve in the published panels.
    """
    from .materials import breakdown_voltage

    vb = breakdown_voltage(silica_thickness)
    series = [
        ("voltage", 0.0, 300.0),
        ("voltage", vb / 2.0, 300.0),
        ("voltage", vb, 300.0),
        ("temperature", 0.0, 300.0),
        ("temperature", 0.0, 350.0),
        ("temperature", 0.0, 400.0),
    ]
    scenarios = [(v, t, silica_thickness) for _, v, t in series]
    comparison = compare_distributions(
        scenarios,
        config.geometry().with_conditions(silica_thickness=silica_thickness),
        area=config.area,
        coarse_points=200,
        refine_points=800,
        spec=config.quadrature(),
        map_fn=map_fn,
    )

    curve_rows, summary_rows = [], []
    for i, ((label, v, t), dist) in enumerate(zip(series, comparison.distributions)):
        tag = {"series": label, "voltage_V": v, "temperature_K": t}
        if dist is None:
            summary_rows.append(
                {
                    **tag,
                    "d_min_nm": math.nan,
                    "mean_nm": math.nan,
                    "offset_nm": math.nan,
                    "peak_rho_per_nm": math.nan,
                    "overlap_with_initial": math.nan,
                }
            )
            continue
        curve_rows.extend(
            {**tag, "d_nm": d * 1e9, "rho_per_nm": rho * 1e-9}
            for d, rho in zip(dist.distances, dist.density)
        )
        summary_rows.append(
            {
                **tag,
                "d_min_nm": dist.potential_minimum * 1e9,
                "mean_nm": dist.mean * 1e9,
                "offset_nm": dist.offset * 1e9,
                "peak_rho_per_nm": dist.peak_density * 1e-9,
                "overlap_with_initial": float(comparison.overlaps[0, i]),
            }
        )
    return [
        emit(
            figure_id,
            ("series", "voltage_V", "temperature_K", "d_nm", "rho_per_nm"),
            curve_rows,
        ),
        emit(
            f"{figure_id}_summary",
            (
                "series",
                "voltage_V",
                "temperature_K",
                "d_min_nm",
                "mean_nm",
                "offset_nm",
                "peak_rho_per_nm",
                "overlap_with_initial",
            ),
            summary_rows,
        ),
    ]


def _fig5a(config, emit, map_fn):
    return _brownian_panel(config, emit, map_fn, "fig5a", 300e-9)


def _fig5b(config, emit, map_fn):
    return _brownian_panel(config, emit, map_fn, "fig5b", config.silica_thickness)


_DRIVERS = {
    "fig2a": _fig2a,
    "fig2b": _fig2b,
    "fig3a": _fig3a,
    "fig3b": _fig3b,
    "fig4a": _fig4a,
    "fig4b": _fig4b,
    "fig5a": _fig5a,
    "fig5b": _fig5b,
}

FIGURE_IDS = tuple(sorted(_DRIVERS))


def run_figure(figure_id, config=None, map_fn=None):
    """Emit the CSV bundle behind one published figure panel.

    Returns the written paths (the manifest sidecar last). On a stage
    failure the manifest records the failed stage, completed tables stay on
    disk, and a :class:`StageError` naming the stage is raised.
    """
    if figure_id not in _DRIVERS:
        from .errors import ConfigError

        raise ConfigError(
            f"unknown figure {figure_id!r}; expected one of {', '.join(FIGURE_IDS)}"
        )
    config = (config or ScenarioConfig()).validate()
    manifest = RunManifest.collect(config)
    out_dir = config.out_dir
    written = []

    def emit(name, schema, rows):
        path = emit_table(
            rows,
            schema,
            f"{out_dir}/{name}.csv",
            manifest=manifest,
            json_mirror=config.json,
        )
        written.append(path)
        return path

    current = {"stage": "setup"}
    try:
        with manifest.stage(figure_id):
            current["stage"] = figure_id
            _DRIVERS[figure_id](config, emit, map_fn)
    except Exception as exc:
        manifest.stages[f"{current['stage']}:failed"] = str(exc)
        manifest.write(f"{out_dir}/{figure_id}.manifest.json")
        raise StageError(figure_id, current["stage"], exc) from exc
    written.append(manifest.write(f"{out_dir}/{figure_id}.manifest.json"))
    return written
