"""Running scenarios, merging config overrides and serializing reports."""
from __future__ import annotations

import configparser
import csv
import datetime as _dt
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .scenarios import REGISTRY, Check, Scenario

DEFAULT_SEED = 20240501
REPORT_VERSION = 1


class ConfigError(ValueError):
    """Unknown scenario, malformed config file or bad parameter value."""


class NoSeries(ValueError):
    """The scenario produces no data series."""


@dataclass
class Report:
    scenario: str
    seed: int
    parameters: dict
    checks: list[Check]
    timestamp: str
    elapsed: float
    series: list[tuple] | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def body(self) -> dict:
        """Everything except the timestamp and timing; deterministic for a fixed seed."""
        return {
            "version": REPORT_VERSION,
            "scenario": self.scenario,
            "seed": self.seed,
            "parameters": self.parameters,
            "checks": [_check_json(c) for c in self.checks],
            "pass": self.passed,
        }

    def to_json(self) -> str:
        doc = {"body": self.body(), "timestamp": self.timestamp, "elapsed_seconds": round(self.elapsed, 3)}
        return json.dumps(doc, sort_keys=True, indent=2)


def _number(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (complex, np.complexfloating)):
        z = complex(x)
        if z.imag == 0:
            return _number(z.real)
        return {"re": _number(z.real), "im": _number(z.imag)}
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _check_json(c: Check) -> dict:
    return {
        "name": c.name,
        "lhs": _number(c.lhs),
        "rhs": _number(c.rhs),
        "residual": _number(c.residual),
        "tolerance": _number(c.tolerance),
        "count": c.count,
        "pass": c.passed,
    }


def get_scenario(scenario_id: str) -> Scenario:
    try:
        return REGISTRY[scenario_id]
    except KeyError:
        raise ConfigError(f"unknown scenario {scenario_id!r}; try 'cmverify list'") from None


def _coerce(key: str, default, text: str):
    try:
        if isinstance(default, bool):
            low = text.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        return text.strip()
    except ValueError:
        raise ConfigError(f"parameter {key!r}: cannot read {text!r} as {type(default).__name__}") from None


def load_config(path: str | None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    if path is None:
        return cp
    if not os.path.exists(path):
        raise ConfigError(f"config file {path!r} not found")
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path!r}: {exc}") from None
    for section in cp.sections():
        if section != "global" and section not in REGISTRY:
            raise ConfigError(f"config section [{section}] names no scenario")
    return cp


def resolve_parameters(sc: Scenario, cp: configparser.ConfigParser) -> dict:
    params = dict(sc.defaults)
    if cp.has_section(sc.id):
        for key, text in cp.items(sc.id):
            if key not in params:
                raise ConfigError(f"scenario {sc.id!r} has no parameter {key!r}")
            params[key] = _coerce(key, params[key], text)
    return params


def resolve_seed(cp: configparser.ConfigParser, seed: int | None) -> int:
    if seed is not None:
        return int(seed)
    if cp.has_option("global", "seed"):
        return int(_coerce("seed", 0, cp.get("global", "seed")))
    return DEFAULT_SEED


def run_scenario(scenario_id: str, params: dict | None = None, seed: int = DEFAULT_SEED) -> Report:
    sc = get_scenario(scenario_id)
    merged = dict(sc.defaults)
    if params:
        unknown = set(params) - set(merged)
        if unknown:
            raise ConfigError(f"scenario {scenario_id!r} has no parameter(s) {sorted(unknown)}")
        merged.update(params)
    # mix the id into the seed so scenarios draw independent streams
    rng = np.random.default_rng([seed, *scenario_id.encode()])
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    t0 = time.perf_counter()
    out = sc.run(merged, rng)
    elapsed = time.perf_counter() - t0
    return Report(scenario_id, seed, merged, out.checks, stamp, elapsed, out.series)


def _run_job(job):
    sid, params, seed = job
    return run_scenario(sid, params, seed)


def run_many(ids: list[str], cp: configparser.ConfigParser, seed: int, parallel: int = 1) -> list[Report]:
    jobs = [(sid, resolve_parameters(get_scenario(sid), cp), seed) for sid in ids]
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            return list(pool.map(_run_job, jobs))
    return [_run_job(j) for j in jobs]


def write_series(report: Report, path: str) -> int:
    """Write ``x,y,series`` rows; raises NoSeries before touching ``path``."""
    if not report.series:
        raise NoSeries(f"scenario {report.scenario!r} produces no data series")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "series"])
        for x, y, label in report.series:
            w.writerow([repr(float(x)), repr(float(y)), label])
    return len(report.series)
