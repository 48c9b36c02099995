"""Monte Carlo DOA sweeps driven by a JSON experiment config."""

from __future__ import annotations

import copy
import dataclasses
import io
import json
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any

import jsonschema
import numpy as np
import scipy

from .coarray import SensorArray, central_consecutive, fodca
from .designs import FohaDesign, optimize_foha
from .metrics import reference_coupling_model
from .music import UnresolvedError, estimate_doa
from .signals import Modulation, SimScenario, SourceConfig, generate_snapshots

AXES = ("snr", "snapshots", "sources", "separation")
CSV_HEADER = "axis,value,rmse_deg,trials,resolved_fraction"

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["design", "sweep"],
    "properties": {
        "design": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "n"],
                    "properties": {
                        "kind": {"enum": ["na", "cna", "NA", "CNA"]},
                        "n": {"type": "integer", "minimum": 4},
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["positions"],
                    "properties": {
                        "positions": {
                            "type": "array", "minItems": 2,
                            "items": {"type": "integer", "minimum": 0},
                        },
                    },
                },
            ],
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["axis", "values"],
            "properties": {
                "axis": {"enum": list(AXES)},
                "values": {"type": "array", "minItems": 1, "items": {"type": "number"}},
            },
        },
        "snr_db": {"type": "number"},
        "snapshots": {"type": "integer", "minimum": 2},
        "sources": {"type": "integer", "minimum": 1},
        "angles": {
            "type": "object",
            "required": ["rule"],
            "additionalProperties": False,
            "properties": {
                "rule": {"enum": ["uniform", "explicit", "cluster"]},
                "range": {"type": "array", "items": {"type": "number"},
                          "minItems": 2, "maxItems": 2},
                "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "center": {"type": "number"},
            },
        },
        "separation_deg": {"type": "number", "exclusiveMinimum": 0},
        "modulation": {"enum": ["qpsk", "bpsk", "QPSK", "BPSK"]},
        "coupling": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "enabled": {"type": "boolean"},
                "B": {"type": "integer", "minimum": 1},
            },
        },
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "grid_size": {"type": "integer", "minimum": 3},
        "method": {"enum": ["smoothing", "toeplitz"]},
    },
}

DEFAULTS = {
    "snr_db": 10.0,
    "snapshots": 2000,
    "sources": 4,
    "angles": {"rule": "uniform", "range": [-60.0, 60.0]},
    "separation_deg": 1.0,
    "modulation": "qpsk",
    "coupling": {"enabled": False, "B": 100},
    "trials": 50,
    "seed": 0,
    "grid_size": 4001,
    "method": "smoothing",
}


class ConfigError(ValueError):
    """Invalid experiment config; the message names the offending field."""


def _field_path(path) -> str:
    out = ""
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def _line_of(text: str, path) -> int | None:
    # best effort: first line mentioning the last named key of the path
    keys = [p for p in path if isinstance(p, str)]
    if not keys:
        return None
    needle = f'"{keys[-1]}"'
    for lineno, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return lineno
    return None


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    design: dict
    axis: str
    values: tuple
    snr_db: float
    snapshots: int
    sources: int
    angles: dict
    separation_deg: float
    modulation: str
    coupling: dict
    trials: int
    seed: int
    grid_size: int
    method: str

    @classmethod
    def from_dict(cls, doc: dict, text: str | None = None) -> "ExperimentConfig":
        validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
        if errors:
            lines = []
            for err in errors:
                where = _field_path(err.absolute_path)
                lineno = _line_of(text, err.absolute_path) if text else None
                prefix = f"line {lineno}: " if lineno else ""
                lines.append(f"{prefix}{where}: {err.message}")
            raise ConfigError("\n".join(lines))
        merged = copy.deepcopy(DEFAULTS)
        for key, value in doc.items():
            if key in ("coupling",) and isinstance(value, dict):
                merged[key].update(value)
            elif key != "sweep":
                merged[key] = value
        sweep = doc["sweep"]
        axis = sweep["axis"]
        values = list(sweep["values"])
        if axis in ("snapshots", "sources"):
            if any(float(v) != int(v) for v in values):
                raise ConfigError(f"sweep.values: {axis} values must be integers")
            values = [int(v) for v in values]
        else:
            values = [float(v) for v in values]
        diffs = np.diff(values)
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ConfigError("sweep.values: values must be strictly monotone")
        if axis == "snapshots" and min(values) < 2:
            raise ConfigError("sweep.values: need at least 2 snapshots")
        if axis == "sources" and min(values) < 1:
            raise ConfigError("sweep.values: need at least 1 source")
        if axis == "separation" and min(values) <= 0:
            raise ConfigError("sweep.values: separations must be positive")
        if axis == "separation" and "angles" not in doc:
            merged["angles"] = {"rule": "cluster", "center": 0.0}
        angles = merged["angles"]
        rule = angles["rule"]
        if rule == "uniform":
            angles.setdefault("range", [-60.0, 60.0])
            lo, hi = angles["range"]
            if not -90 < lo < hi < 90:
                raise ConfigError("angles.range: need -90 < low < high < 90")
        elif rule == "explicit":
            if "values" not in angles:
                raise ConfigError("angles.values: required for the explicit rule")
            if axis == "sources" or axis == "separation":
                raise ConfigError(f"angles.rule: explicit angles cannot sweep {axis}")
            merged["sources"] = len(angles["values"])
        elif rule == "cluster":
            angles.setdefault("center", 0.0)
        if axis == "separation" and rule != "cluster":
            raise ConfigError("angles.rule: a separation sweep needs the cluster rule")
        return cls(
            design=merged["design"], axis=axis, values=tuple(values),
            snr_db=float(merged["snr_db"]), snapshots=int(merged["snapshots"]),
            sources=int(merged["sources"]), angles=angles,
            separation_deg=float(merged["separation_deg"]),
            modulation=str(merged["modulation"]).upper(), coupling=merged["coupling"],
            trials=int(merged["trials"]), seed=int(merged["seed"]),
            grid_size=int(merged["grid_size"]), method=merged["method"],
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("<root>: config must be a JSON object")
        return cls.from_dict(doc, text)

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return dataclasses.replace(self, **kwargs)

    def to_json(self) -> dict:
        return {
            "design": self.design,
            "sweep": {"axis": self.axis, "values": list(self.values)},
            "snr_db": self.snr_db,
            "snapshots": self.snapshots,
            "sources": self.sources,
            "angles": self.angles,
            "separation_deg": self.separation_deg,
            "modulation": self.modulation.lower(),
            "coupling": self.coupling,
            "trials": self.trials,
            "seed": self.seed,
            "grid_size": self.grid_size,
            "method": self.method,
        }


def uniform_angles(D: int, low: float, high: float) -> np.ndarray:
    """``D`` equally spaced angles with both endpoints included."""
    if D == 1:
        return np.array([(low + high) / 2.0])
    return np.linspace(low, high, D)


def cluster_angles(D: int, separation: float, center: float = 0.0) -> np.ndarray:
    """``D`` angles spaced by ``separation`` and centred on ``center``."""
    return center + separation * (np.arange(D) - (D - 1) / 2.0)


def resolve_geometry(design_spec: dict) -> tuple[SensorArray, int, FohaDesign | None]:
    """Array, one-sided consecutive extent and design (if optimized) for a spec."""
    if "positions" in design_spec:
        P = SensorArray(design_spec["positions"])
        return P, central_consecutive(fodca(P)), None
    design = optimize_foha(int(design_spec["n"]), design_spec["kind"])
    return design.P, design.E, design


@dataclasses.dataclass(frozen=True)
class SweepPoint:
    snr_db: float
    snapshots: int
    angles: tuple[float, ...]


def sweep_points(config: ExperimentConfig) -> list[SweepPoint]:
    points = []
    for value in config.values:
        snr, K, D, sep = config.snr_db, config.snapshots, config.sources, config.separation_deg
        if config.axis == "snr":
            snr = float(value)
        elif config.axis == "snapshots":
            K = int(value)
        elif config.axis == "sources":
            D = int(value)
        else:
            sep = float(value)
        rule = config.angles["rule"]
        if rule == "uniform":
            angles = uniform_angles(D, *config.angles["range"])
        elif rule == "explicit":
            angles = np.asarray(config.angles["values"], dtype=float)
        else:
            angles = cluster_angles(D, sep, config.angles.get("center", 0.0))
        if np.any(np.abs(angles) >= 90):
            raise ConfigError(f"sweep value {value} puts a source outside (-90, 90)")
        points.append(SweepPoint(snr, K, tuple(float(a) for a in angles)))
    return points


def trial_seed(base_seed: int, trial: int) -> np.random.SeedSequence:
    """Seed of one trial, independent of sweep value and execution order."""
    return np.random.SeedSequence([base_seed, trial])


@dataclasses.dataclass(frozen=True)
class TrialOutcome:
    estimates: np.ndarray
    resolved: bool


def _fill_unresolved(peaks: np.ndarray, truth: np.ndarray) -> np.ndarray:
    # each true angle takes its nearest detected peak
    if peaks.size == 0:
        return np.zeros_like(truth)
    nearest = np.abs(truth[:, None] - peaks[None, :]).argmin(axis=1)
    return peaks[nearest]


def run_trial(P: SensorArray, U: int, point: SweepPoint, config: ExperimentConfig,
              trial: int) -> TrialOutcome:
    coupling = None
    if config.coupling.get("enabled"):
        coupling = reference_coupling_model(int(config.coupling.get("B", 100)))
    scenario = SimScenario(P, point.snr_db, point.snapshots, coupling,
                           trial_seed(config.seed, trial))
    sources = SourceConfig(point.angles, Modulation.parse(config.modulation))
    X = generate_snapshots(scenario, sources)
    truth = np.sort(np.asarray(point.angles))
    try:
        result = estimate_doa(X, P, U, sources.D, config.grid_size, config.method)
    except UnresolvedError as exc:
        return TrialOutcome(np.sort(_fill_unresolved(exc.peaks_deg, truth)), False)
    return TrialOutcome(result.angles_deg, True)


@dataclasses.dataclass(frozen=True)
class SweepRow:
    axis: str
    value: Any
    rmse_deg: float
    trials: int
    resolved_fraction: float

    def to_csv(self) -> str:
        value = self.value if isinstance(self.value, int) else repr(float(self.value))
        return f"{self.axis},{value},{self.rmse_deg!r},{self.trials},{self.resolved_fraction!r}"


def run_sweep(config: ExperimentConfig, threads: int | None = None) -> list[SweepRow]:
    """Runs every (sweep value, trial) pair and reduces per sweep value.

    Results are collected in trial-index order before reduction, so the
    output does not depend on ``threads``.
    """
    P, U, _ = resolve_geometry(config.design)
    points = sweep_points(config)
    for point in points:
        if len(point.angles) >= U + 1:
            raise ConfigError(f"{len(point.angles)} sources exceed the virtual array "
                              f"(U + 1 = {U + 1})")
    tasks = [(i, t) for i in range(len(points)) for t in range(config.trials)]
    workers = threads or os.cpu_count() or 1

    def work(task):
        i, t = task
        return run_trial(P, U, points[i], config, t)

    if workers == 1:
        outcomes = [work(task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(work, tasks))
    rows = []
    for i, (value, point) in enumerate(zip(config.values, points)):
        chunk = outcomes[i * config.trials:(i + 1) * config.trials]
        truth = np.sort(np.asarray(point.angles))
        sq = sum(float(np.sum((o.estimates - truth) ** 2)) for o in chunk)
        err = float(np.sqrt(sq / (len(chunk) * truth.size)))
        resolved = sum(o.resolved for o in chunk) / len(chunk)
        rows.append(SweepRow(config.axis, value, err, len(chunk), resolved))
    return rows


def rows_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for row in rows:
        buf.write(row.to_csv() + "\n")
    return buf.getvalue()


def run_manifest(config: ExperimentConfig, threads: int | None, wall_time: float) -> dict:
    from . import __version__

    P, U, design = resolve_geometry(config.design)
    return {
        "config": config.to_json(),
        "geometry": {"positions": list(P.positions), "U": U,
                     "design": design.to_json() if design else None},
        "threads": threads,
        "wall_time_s": wall_time,
        "versions": {
            "foha": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "platform": platform.platform(),
        },
    }


def simulate(config: ExperimentConfig, threads: int | None = None) -> tuple[str, dict]:
    """Runs a sweep; returns the CSV text and the run manifest."""
    start = time.perf_counter()
    rows = run_sweep(config, threads)
    manifest = run_manifest(config, threads, time.perf_counter() - start)
    return rows_to_csv(rows), manifest
