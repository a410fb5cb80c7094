"""Command-line interface: scenario parsing, sweeps, and CSV emission.

Every physical input carries an explicit unit (``--silica 150nm``,
``--voltage Vb/2``, ``--area 20x20um``); bare lengths are rejected because a
silent nm/m slip is the dominant failure mode in this domain. Subcommands
write manifest-stamped CSVs into ``--out-dir`` and print the written paths.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from scipy.constants import c

from .brownian import position_distribution, potential_profile
from .casimir import cavity_interaction
from .config import (
    RunManifest,
    emit_table,
    parse_config,
    parse_length,
    parse_temperature,
    parse_voltage,
)
from .equilibrium import cavity_equilibrium, sweep_equilibrium
from .errors import CasifpError, ConfigError, NumericalError
from .figures import FIGURE_IDS, run_figure
from .optics import cavity_spectrum, resonance_vs_stimulus

__all__ = ["main", "console_entry"]

#: Config keys fed from the shared scenario flags, in flag order.
_SCENARIO_KEYS = (
    "voltage",
    "temperature",
    "silica",
    "plate",
    "teflon",
    "ito",
    "area",
    "lambda_min",
    "lambda_max",
    "lambda_points",
    "tol",
    "data_dir",
    "out_dir",
    "json",
)


def _scenario_flags(parser):
    g = parser.add_argument_group("scenario")
    g.add_argument("--voltage", help="gate bias: volts, 'Vb', or 'Vb/2'")
    g.add_argument("--temperature", help="kelvin, e.g. 300 or 300K")
    g.add_argument("--silica", help="gate oxide thickness, e.g. 150nm")
    g.add_argument("--plate", help="plate thickness, e.g. 40nm")
    g.add_argument("--teflon", help="coating thickness, e.g. 10nm")
    g.add_argument("--ito", help="conductor thickness, e.g. 5nm")
    g.add_argument("--area", help="plate area, e.g. 20x20um")
    g.add_argument("--lambda-min", help="spectral window start, e.g. 400nm")
    g.add_argument("--lambda-max", help="spectral window end, e.g. 1200nm")
    g.add_argument("--lambda-points", type=int, help="spectral sample count")
    g.add_argument("--data-dir", help="material data directory override")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="casifp",
        description="Gate-tuned Casimir cavities: pressures, equilibria, "
        "spectra, and Brownian statistics as CSV tables.",
    )
    parser.add_argument("--config", help="JSON scenario file; flags override it")
    parser.add_argument(
        "--jobs", type=int, default=1, help="concurrent sweep nodes (default 1)"
    )
    parser.add_argument("--tol", type=float, help="relative pressure tolerance")
    parser.add_argument("--out-dir", help="output directory (default '.')")
    parser.add_argument(
        "--json",
        action="store_const",
        const=True,
        help="also write a JSON mirror next to each CSV",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pressure", help="pressure and energy across separations")
    p.add_argument("--d-min", default="40nm", help="smallest separation")
    p.add_argument("--d-max", default="200nm", help="largest separation")
    p.add_argument("--points", type=int, default=81)
    p.add_argument("--out", help="output CSV path")
    _scenario_flags(p)
    p.set_defaults(handler=_cmd_pressure)

    p = sub.add_parser("equilibrium", help="floating height, single or swept")
    p.add_argument("--axis", choices=("voltage", "temperature"))
    p.add_argument("--from", dest="sweep_from", help="sweep start ('Vb' allowed)")
    p.add_argument("--to", dest="sweep_to", help="sweep end ('Vb' allowed)")
    p.add_argument("--points", type=int, default=21)
    p.add_argument("--out", help="output CSV path")
    _scenario_flags(p)
    p.set_defaults(handler=_cmd_equilibrium)

    p = sub.add_parser("spectrum", help="normal-incidence reflectance R(lambda)")
    p.add_argument("--d", required=True, help="gap, e.g. 85nm")
    p.add_argument(
        "--dump-layers",
        metavar="WAVELENGTH",
        help="also dump per-layer permittivity at this wavelength",
    )
    p.add_argument("--out", help="output CSV path")
    _scenario_flags(p)
    p.set_defaults(handler=_cmd_spectrum)

    p = sub.add_parser(
        "resonance-sweep", help="dip wavelength against voltage or temperature"
    )
    p.add_argument("--axis", choices=("voltage", "temperature"), default="voltage")
    p.add_argument("--from", dest="sweep_from", help="sweep start ('Vb' allowed)")
    p.add_argument("--to", dest="sweep_to", help="sweep end ('Vb' allowed)")
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--out", help="output CSV path")
    _scenario_flags(p)
    p.set_defaults(handler=_cmd_resonance)

    p = sub.add_parser("brownian", help="suspension probability distribution")
    p.add_argument("--out", help="output CSV path")
    _scenario_flags(p)
    p.set_defaults(handler=_cmd_brownian)

    p = sub.add_parser("figure", help="emit the data behind one published figure")
    p.add_argument("figure_id", choices=FIGURE_IDS)
    _scenario_flags(p)
    p.set_defaults(handler=_cmd_figure)
    return parser


def _resolve_config(args):
    flags = {}
    for key in _SCENARIO_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            flags[key] = value
    return parse_config(args.config, **flags)


def _target(args, config, default_name):
    if getattr(args, "out", None):
        return args.out
    return str(Path(config.out_dir) / default_name)


def _sweep_grid(args, config):
    """Resolve the sweep grid of an --axis command against the scenario."""
    axis = args.axis
    if axis == "temperature":
        lo = parse_temperature(args.sweep_from) if args.sweep_from else 300.0
        hi = parse_temperature(args.sweep_to) if args.sweep_to else 400.0
    else:
        vb = config.breakdown
        lo = parse_voltage(args.sweep_from, vb) if args.sweep_from else 0.0
        hi = parse_voltage(args.sweep_to, vb) if args.sweep_to else vb
    if args.points < 2:
        raise ConfigError("a sweep needs at least 2 points")
    return tuple(float(v) for v in np.linspace(lo, hi, args.points))


def _cmd_pressure(args, config, map_fn, manifest):
    d_lo = parse_length(args.d_min, "d-min")
    d_hi = parse_length(args.d_max, "d-max")
    if not 0.0 < d_lo < d_hi:
        raise ConfigError("need 0 < d-min < d-max")
    if args.points < 1:
        raise ConfigError("points must be at least 1")
    geometry = config.geometry()
    spec = config.quadrature()
    grid = np.linspace(d_lo, d_hi, args.points)

    def one(d):
        result = cavity_interaction(float(d), geometry, spec)
        return {
            "d_nm": d * 1e9,
            "pressure_Pa": result.pressure,
            "energy_J_per_m2": result.energy_per_area,
            "n_terms": result.matsubara_terms_used,
            "rel_err": result.estimated_relative_error,
        }

    with manifest.stage("pressure"):
        rows = list(map_fn(one, grid))
    return [
        emit_table(
            rows,
            ("d_nm", "pressure_Pa", "energy_J_per_m2", "n_terms", "rel_err"),
            _target(args, config, "pressure.csv"),
            manifest=manifest,
            json_mirror=bool(config.json),
        )
    ]


def _cmd_equilibrium(args, config, map_fn, manifest):
    geometry = config.geometry()
    spec = config.quadrature()
    if args.axis is None:
        if args.sweep_from or args.sweep_to:
            raise ConfigError("--from/--to need --axis voltage|temperature")
        with manifest.stage("equilibrium"):
            point = cavity_equilibrium(geometry, spec=spec)
        rows = [
            {
                "d_e_nm": point.distance * 1e9,
                "zero_crossing_nm": point.casimir_zero_crossing * 1e9,
                "stable": point.stable,
                "residual_Pa": point.residual_pressure,
            }
        ]
        schema = ("d_e_nm", "zero_crossing_nm", "stable", "residual_Pa")
    else:
        grid = _sweep_grid(args, config)
        with manifest.stage(f"equilibrium-{args.axis}"):
            sweep = sweep_equilibrium(
                args.axis, grid, geometry, spec=spec, map_fn=map_fn
            )
        rows = [
            {
                "axis_value": value,
                "d_e_nm": math.nan if pt is None else pt.distance * 1e9,
                "zero_crossing_nm": math.nan
                if pt is None
                else pt.casimir_zero_crossing * 1e9,
                "stable": False if pt is None else pt.stable,
            }
            for value, pt in zip(sweep.values, sweep.points)
        ]
        schema = ("axis_value", "d_e_nm", "zero_crossing_nm", "stable")
    return [
        emit_table(
            rows,
            schema,
            _target(args, config, "equilibrium.csv"),
            manifest=manifest,
            json_mirror=bool(config.json),
        )
    ]


def _cmd_spectrum(args, config, map_fn, manifest):
    gap = parse_length(args.d, "d")
    geometry = config.geometry()
    with manifest.stage("spectrum"):
        spectrum = cavity_spectrum(
            gap, geometry, config.lambda_range(), config.lambda_points
        )
    rows = [
        {"lambda_nm": w * 1e9, "R": r}
        for w, r in zip(spectrum.wavelengths, spectrum.reflectance)
    ]
    target = _target(args, config, "spectrum.csv")
    written = [
        emit_table(
            rows,
            ("lambda_nm", "R"),
            target,
            manifest=manifest,
            json_mirror=bool(config.json),
        )
    ]
    if args.dump_layers:
        written.append(_dump_layers(args, config, geometry, gap, target, manifest))
    return written


def _dump_layers(args, config, geometry, gap, target, manifest):
    wavelength = parse_length(args.dump_layers, "dump-layers")
    omega = 2.0 * math.pi * c / wavelength
    stack = geometry.full_stack(gap)
    entries = [("incident", stack.incident_halfspace, math.inf)]
    entries += [(f"layer{i}", l.material, l.thickness) for i, l in enumerate(stack.layers, 1)]
    entries.append(("exit", stack.exit_halfspace, math.inf))
    rows = []
    for position, material, thickness in entries:
        eps = complex(material.eps_real(omega))
        rows.append(
            {
                "position": position,
                "material": material.name,
                "thickness_nm": thickness * 1e9,
                "eps_re": eps.real,
                "eps_im": eps.imag,
            }
        )
    path = Path(target)
    return emit_table(
        rows,
        ("position", "material", "thickness_nm", "eps_re", "eps_im"),
        path.with_name(f"{path.stem}_layers.csv"),
        manifest=manifest,
        json_mirror=bool(config.json),
    )


def _cmd_resonance(args, config, map_fn, manifest):
    geometry = config.geometry()
    grid = _sweep_grid(args, config)
    with manifest.stage(f"resonance-{args.axis}"):
        sweep = resonance_vs_stimulus(
            args.axis,
            grid,
            geometry,
            spec=config.quadrature(),
            lambda_range=config.lambda_range(),
            points=config.lambda_points,
            map_fn=map_fn,
        )
    reference = next(
        (r.wavelength for r in sweep.resonances if r is not None), math.nan
    )
    rows = []
    for value, distance, resonance in zip(
        sweep.values, sweep.distances, sweep.resonances
    ):
        found = resonance is not None
        rows.append(
            {
                "stimulus": value,
                "d_e_nm": distance * 1e9,
                "lambda_res_nm": resonance.wavelength * 1e9 if found else math.nan,
                "Q": resonance.q_factor if found else math.nan,
                "delta_lambda_nm": (resonance.wavelength - reference) * 1e9
                if found
                else math.nan,
            }
        )
    return [
        emit_table(
            rows,
            ("stimulus", "d_e_nm", "lambda_res_nm", "Q", "delta_lambda_nm"),
            _target(args, config, "resonance_sweep.csv"),
            manifest=manifest,
            json_mirror=bool(config.json),
        )
    ]


def _cmd_brownian(args, config, map_fn, manifest):
    geometry = config.geometry()
    with manifest.stage("brownian"):
        profile = potential_profile(
            geometry, area=config.area, spec=config.quadrature(), map_fn=map_fn
        )
        dist = position_distribution(profile)
    rows = [
        {"d_nm": d * 1e9, "rho_per_nm": rho * 1e-9}
        for d, rho in zip(dist.distances, dist.density)
    ]
    target = _target(args, config, "brownian.csv")
    mirror = bool(config.json)
    written = [
        emit_table(
            rows, ("d_nm", "rho_per_nm"), target, manifest=manifest, json_mirror=mirror
        )
    ]
    summary = [
        {
            "d_mean_nm": dist.mean * 1e9,
            "d_e_nm": dist.potential_minimum * 1e9,
            "offset_nm": dist.offset * 1e9,
            "peak_rho": dist.peak_density * 1e-9,
        }
    ]
    path = Path(target)
    written.append(
        emit_table(
            summary,
            ("d_mean_nm", "d_e_nm", "offset_nm", "peak_rho"),
            path.with_name(f"{path.stem}_summary.csv"),
            manifest=manifest,
            json_mirror=mirror,
        )
    )
    return written


def _cmd_figure(args, config, map_fn, manifest):
    return run_figure(args.figure_id, config, map_fn=map_fn)


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    pool = None
    try:
        config = _resolve_config(args)
        if args.jobs > 1:
            pool = ThreadPoolExecutor(max_workers=args.jobs)

            def map_fn(fn, items):
                return list(pool.map(fn, items))

        else:

            def map_fn(fn, items):
                return [fn(x) for x in items]

        manifest = RunManifest.collect(config)
        written = args.handler(args, config, map_fn, manifest)
        for path in written:
            print(path)
        return 0
    except ConfigError as exc:
        print(f"casifp: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"casifp: {exc}", file=sys.stderr)
        return 3
    except CasifpError as exc:
        print(f"casifp: {exc}", file=sys.stderr)
        return 3
    finally:
        if pool is not None:
            pool.shutdown()


def console_entry():
    sys.exit(main())
