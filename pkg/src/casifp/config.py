"""Scenario configuration, unit-checked parsing, and tabular output.

Physical lengths on the outer interfaces always carry explicit units; a bare
number is rejected rather than guessed at, since a silent nm/m mix-up is the
dominant failure mode in this domain. Voltages and temperatures accept bare
volts and kelvin. Every emitted table carries the hash of a RunManifest so a
CSV can be traced back to the exact configuration and data files behind it.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import re
import time
from contextlib import contextmanager
from decimal import Decimal
from dataclasses import asdict, dataclass, field, fields, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .casimir import QuadratureSpec
from .errors import BreakdownVoltageError, ConfigError
from .materials import (
    MATERIAL_NAMES,
    breakdown_voltage,
    data_dir,
    default_materials,
)
from .stack import CavityGeometry

__all__ = [
    "SweepRange",
    "ScenarioConfig",
    "RunManifest",
    "parse_config",
    "parse_length",
    "parse_voltage",
    "parse_temperature",
    "parse_area",
    "emit_table",
    "read_table",
]

#: Decimal exponent per unit; applied via Decimal.scaleb so '0.15um' and
#: '150nm' resolve to the same float, not two off-by-one-ulp neighbours.
_LENGTH_UNITS = {
    "nm": -9,
    "um": -6,
    "µm": -6,
    "mm": -3,
    "cm": -2,
    "m": 0,
}

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_LENGTH_RE = re.compile(rf"^\s*({_NUMBER})\s*([a-zµ]+)\s*$")
_VOLT_RE = re.compile(rf"^\s*({_NUMBER})\s*(k?V|mV)?\s*$")
_VB_RE = re.compile(rf"^\s*[vV]_?b\s*(?:/\s*({_NUMBER}))?\s*$")
_TEMP_RE = re.compile(rf"^\s*({_NUMBER})\s*K?\s*$")
_AREA_RE = re.compile(
    rf"^\s*({_NUMBER})\s*([a-zµ]+)?\s*[x×]\s*({_NUMBER})\s*([a-zµ]+)\s*$"
)


def parse_length(text, what="length"):
    """A length string with a mandatory unit, in meters."""
    if isinstance(text, (int, float)):
        raise ConfigError(
            f"{what} {text!r} needs an explicit unit (nm, um, mm, m)"
        )
    match = _LENGTH_RE.match(str(text))
    if not match or match.group(2) not in _LENGTH_UNITS:
        raise ConfigError(
            f"could not parse {what} {text!r}; expected e.g. '150nm' or '0.15um'"
        )
    return float(Decimal(match.group(1)).scaleb(_LENGTH_UNITS[match.group(2)]))


def parse_voltage(text, breakdown=None, what="voltage"):
    """A gate voltage, in volts.

    Accepts bare numbers (volts), 'mV'/'V'/'kV' suffixes, and the breakdown
    token 'Vb' with an optional divisor ('Vb/2'), resolved against the
    ``breakdown`` voltage of the configured gate.
    """
    if isinstance(text, (int, float)):
        return float(text)
    token = _VB_RE.match(str(text))
    if token:
        if breakdown is None:
            raise ConfigError(f"{what} {text!r} used before the gate is configured")
        divisor = float(token.group(1)) if token.group(1) else 1.0
        if divisor <= 0:
            raise ConfigError(f"{what} {text!r} has a non-positive divisor")
        return breakdown / divisor
    match = _VOLT_RE.match(str(text))
    if not match:
        raise ConfigError(f"could not parse {what} {text!r}; expected e.g. '450', '450V' or 'Vb/2'")
    scale = {"mV": 1e-3, "V": 1.0, "kV": 1e3, None: 1.0}[match.group(2)]
    return float(match.group(1)) * scale


def parse_temperature(text, what="temperature"):
    """A temperature, bare kelvin or with a 'K' suffix."""
    if isinstance(text, (int, float)):
        return float(text)
    match = _TEMP_RE.match(str(text))
    if not match:
        raise ConfigError(f"could not parse {what} {text!r}; expected e.g. '300' or '350K'")
    return float(match.group(1))


def parse_area(text, what="area"):
    """A plate area like '20x20um' or '20um x 20um', in square meters."""
    if isinstance(text, (int, float)):
        raise ConfigError(f"{what} {text!r} needs explicit units, e.g. '20x20um'")
    match = _AREA_RE.match(str(text))
    if not match:
        raise ConfigError(f"could not parse {what} {text!r}; expected e.g. '20x20um'")
    first, unit_first, second, unit_second = match.groups()
    if unit_second not in _LENGTH_UNITS or (
        unit_first is not None and unit_first not in _LENGTH_UNITS
    ):
        raise ConfigError(f"could not parse {what} {text!r}; unknown length unit")
    side_b = float(Decimal(second).scaleb(_LENGTH_UNITS[unit_second]))
    side_a = float(Decimal(first).scaleb(_LENGTH_UNITS[unit_first or unit_second]))
    return side_a * side_b


@dataclass(frozen=True)
class SweepRange:
    """An inclusive linear grid of one operating condition."""

    start: float
    stop: float
    points: int

    def __post_init__(self):
        if self.points < 1:
            raise ConfigError("a sweep needs at least one point")
        if not (np.isfinite(self.start) and np.isfinite(self.stop)):
            raise ConfigError("sweep endpoints must be finite")

    def values(self):
        return tuple(float(v) for v in np.linspace(self.start, self.stop, self.points))

    @property
    def maximum(self):
        return max(self.start, self.stop)

    @property
    def minimum(self):
        return min(self.start, self.stop)


#: Config-file keys, their parsers, and the ScenarioConfig fields they fill.
#: Sweepable quantities additionally accept {"from": .., "to": .., "points": ..}.
_LENGTH_KEYS = {
    "plate": "plate_thickness",
    "teflon": "teflon_thickness",
    "ito": "ito_thickness",
    "silica": "silica_thickness",
    "lambda_min": "lambda_min",
    "lambda_max": "lambda_max",
}
_PLAIN_KEYS = {
    "lambda_points": int,
    "tol": float,
    "data_dir": str,
    "out_dir": str,
    "json": bool,
}
_KNOWN_KEYS = (
    sorted(_LENGTH_KEYS) + ["voltage", "temperature", "area"] + sorted(_PLAIN_KEYS)
)


@dataclass(frozen=True)
class ScenarioConfig:
    """One fully resolved computation scenario.

    All lengths in meters, voltages in volts, temperatures in kelvin.
    ``voltage`` and ``temperature`` are scalars or :class:`SweepRange`;
    operations that need a single operating point reject sweeps. ``tol``
    of None leaves each module at its own default tolerance.
    """

    plate_thickness: float = 40e-9
    teflon_thickness: float = 10e-9
    ito_thickness: float = 5e-9
    silica_thickness: float = 150e-9
    voltage: float | SweepRange = 0.0
    temperature: float | SweepRange = 300.0
    area: float = 400e-12
    lambda_min: float = 400e-9
    lambda_max: float = 1200e-9
    lambda_points: int = 1601
    tol: float | None = None
    data_dir: str | None = None
    out_dir: str = "."
    json: bool = False

    @property
    def breakdown(self):
        """Breakdown voltage of the configured gate, in volts."""
        return breakdown_voltage(self.silica_thickness)

    def validate(self):
        for label in ("plate_thickness", "teflon_thickness", "ito_thickness", "silica_thickness"):
            value = getattr(self, label)
            if not (np.isfinite(value) and 0 < value < 1e-3):
                raise ConfigError(f"{label} must be positive and below 1 mm, got {value!r}")
        temps = (
            (self.temperature,)
            if not isinstance(self.temperature, SweepRange)
            else (self.temperature.minimum, self.temperature.maximum)
        )
        if min(temps) <= 0:
            raise ConfigError("temperature must be positive")
        volts = (
            (self.voltage, self.voltage)
            if not isinstance(self.voltage, SweepRange)
            else (self.voltage.minimum, self.voltage.maximum)
        )
        if volts[0] < 0:
            raise ConfigError("voltage must be non-negative")
        limit = self.breakdown
        if volts[1] > limit:
            raise BreakdownVoltageError(
                f"voltage {volts[1]:g} V exceeds the breakdown voltage "
                f"{limit:g} V of a {self.silica_thickness * 1e9:g} nm gate"
            )
        if not 0 < self.lambda_min < self.lambda_max:
            raise ConfigError("need 0 < lambda_min < lambda_max")
        if self.lambda_min < 400e-9 - 1e-12 or self.lambda_max > 1200e-9 + 1e-12:
            raise ConfigError(
                "wavelength window must stay within the 400-1200 nm validity "
                "range of the shipped optical data"
            )
        if self.lambda_points < 3:
            raise ConfigError("lambda_points must be at least 3")
        if self.area <= 0:
            raise ConfigError("area must be positive")
        if self.tol is not None and not 0 < self.tol <= 0.1:
            raise ConfigError("tol must be in (0, 0.1]")
        return self

    def scalar(self, name):
        value = getattr(self, name)
        if isinstance(value, SweepRange):
            raise ConfigError(f"{name} is a sweep here; this operation needs one value")
        return value

    def materials(self):
        mats = default_materials(self.data_dir)
        if self.ito_thickness != mats.ito.total_thickness:
            mats = replace(mats, ito=replace(mats.ito, total_thickness=self.ito_thickness))
        return mats

    def geometry(self):
        """A CavityGeometry at this scenario's (scalar) operating point."""
        return CavityGeometry(
            materials=self.materials(),
            plate_thickness=self.plate_thickness,
            teflon_thickness=self.teflon_thickness,
            silica_thickness=self.silica_thickness,
            voltage=self.scalar("voltage"),
            temperature=self.scalar("temperature"),
        )

    def quadrature(self):
        """QuadratureSpec override, or None to use module defaults."""
        if self.tol is None:
            return None
        return QuadratureSpec(rel_tol=self.tol)

    def lambda_range(self):
        return (self.lambda_min, self.lambda_max)

    def snapshot(self):
        """JSON-safe dict of the resolved scenario (for the manifest)."""
        out = {}
        for spec in fields(self):
            value = getattr(self, spec.name)
            if isinstance(value, SweepRange):
                value = {"from": value.start, "to": value.stop, "points": value.points}
            out[spec.name] = value
        return out


def _parse_sweepable(key, raw, parser, breakdown=None):
    if isinstance(raw, dict):
        extras = set(raw) - {"from", "to", "points"}
        if extras:
            raise ConfigError(f"unknown {key} sweep key {sorted(extras)[0]!r}")
        missing = {"from", "to", "points"} - set(raw)
        if missing:
            raise ConfigError(f"{key} sweep is missing {sorted(missing)[0]!r}")
        return SweepRange(
            start=parser(raw["from"]),
            stop=parser(raw["to"]),
            points=int(raw["points"]),
        )
    return parser(raw)


def parse_config(path=None, **flags):
    """Resolve a scenario from an optional JSON file plus inline flags.

    Precedence is flags > file > defaults. Unknown keys are rejected, all
    lengths require units, and the resolved voltage is checked against the
    breakdown voltage of the resolved gate (so '--voltage Vb/2' works no
    matter where the silica thickness came from).
    """
    file_values = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as handle:
                file_values = json.load(handle)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(file_values, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = set(file_values) - set(_KNOWN_KEYS)
    if unknown:
        raise ConfigError(
            f"unknown config key {sorted(unknown)[0]!r} (known keys: {', '.join(_KNOWN_KEYS)})"
        )
    unknown = {k for k, v in flags.items() if v is not None} - set(_KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config flag {sorted(unknown)[0]!r}")

    merged = dict(file_values)
    merged.update({k: v for k, v in flags.items() if v is not None})

    resolved = {}
    for key, field_name in _LENGTH_KEYS.items():
        if key in merged:
            resolved[field_name] = parse_length(merged[key], what=key)
    for key, cast in _PLAIN_KEYS.items():
        if key in merged:
            try:
                resolved[key] = cast(merged[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key!r}: {merged[key]!r}") from exc
    if "area" in merged:
        resolved["area"] = parse_area(merged["area"])
    if "temperature" in merged:
        resolved["temperature"] = _parse_sweepable(
            "temperature", merged["temperature"], parse_temperature
        )

    # Voltage last: 'Vb' tokens resolve against the gate configured above.
    partial = ScenarioConfig(**resolved)
    if "voltage" in merged:
        resolved["voltage"] = _parse_sweepable(
            "voltage",
            merged["voltage"],
            lambda raw: parse_voltage(raw, breakdown=partial.breakdown),
        )
    return ScenarioConfig(**resolved).validate()


def _sha256_file(path):
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _tool_version():
    try:
        from importlib import metadata

        return metadata.version("casifp")
    except Exception:
        return "unknown"


@dataclass
class RunManifest:
    """Everything needed to reproduce an output byte-for-byte.

    The deterministic hash covers the config snapshot, the data-file
    checksums, and the tool version; wall-clock timings and the creation
    stamp are carried for the record but excluded from the hash so reruns
    of the same scenario emit byte-identical table bodies.
    """

    config: dict
    data_files: dict
    version: str = field(default_factory=_tool_version)
    stages: dict = field(default_factory=dict)
    created: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    @classmethod
    def collect(cls, scenario):
        directory = scenario.data_dir or data_dir()
        checksums = {
            name: _sha256_file(os.path.join(directory, f"{name}.json"))
            for name in MATERIAL_NAMES
        }
        return cls(config=scenario.snapshot(), data_files=checksums)

    def deterministic_hash(self):
        payload = json.dumps(
            {"config": self.config, "data": self.data_files, "version": self.version},
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode()).hexdigest()

    @contextmanager
    def stage(self, name):
        """Record the wall time of one named pipeline stage."""
        begin = time.perf_counter()
        try:
            yield
        finally:
            self.stages[name] = round(time.perf_counter() - begin, 3)

    def write(self, target):
        target = Path(target)
        target.parent.mkdir(parents=True, exist_ok=True)
        payload = asdict(self)
        payload["hash"] = self.deterministic_hash()
        target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return target


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def emit_table(rows, schema, target, manifest=None, json_mirror=False):
    """Write rows (mappings) as a CSV with a manifest-stamped header.

    Column order follows ``schema`` exactly; floats are written with repr so
    a reparse reproduces them bit-for-bit; a row missing a schema column, or
    carrying an extra one, is rejected naming the offending column. Empty
    ``rows`` produce a header-only file. With ``json_mirror`` a sibling
    ``.json`` carrying the same payload is written next to the CSV.
    """
    schema = tuple(schema)
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    stamp = manifest.deterministic_hash() if manifest is not None else "unmanifested"

    checked = []
    for i, row in enumerate(rows):
        for column in schema:
            if column not in row:
                raise ConfigError(f"row {i} is missing column {column!r}")
        for key in row:
            if key not in schema:
                raise ConfigError(f"row {i} has unexpected column {key!r}")
        checked.append([row[column] for column in schema])

    with open(target, "w", newline="", encoding="utf-8") as handle:
        handle.write(f"# manifest {stamp}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(schema)
        for values in checked:
            writer.writerow([_cell(v) for v in values])
    if json_mirror:
        mirror = target.with_suffix(".json")
        mirror.write_text(
            json.dumps(
                {"manifest": stamp, "columns": list(schema), "rows": checked},
                indent=2,
            )
            + "\n"
        )
    return target


def _parse_cell(text):
    if re.fullmatch(r"[+-]?\d+", text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def read_table(path):
    """Reparse an emitted CSV into (columns, rows-as-dicts, manifest hash)."""
    with open(path, encoding="utf-8") as handle:
        first = handle.readline().rstrip("\n")
        stamp = first.removeprefix("# manifest ").strip() if first.startswith("#") else None
        reader = csv.reader(handle if stamp is not None else [first] + handle.readlines())
        columns = tuple(next(reader))
        rows = [
            {c: _parse_cell(v) for c, v in zip(columns, line)} for line in reader if line
        ]
    return columns, rows, stamp

