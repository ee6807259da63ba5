"""Experiment configuration files.

Configs are TOML documents. Grammar (all keys except ``experiment`` are
optional unless the experiment needs them)::

    experiment = "a1-sweep"        # one of EXPERIMENTS
    seed = 42                      # 64-bit unsigned, required for randomized kinds
    schedule = [2, 4, 8]           # dimensions, nonempty and strictly ascending
    out = "results.csv"            # default output path

    [weight]                       # a radial profile, see profile_from_config
    kind = "piecewise_power"
    pieces = [{lo = 0, hi = "inf", coeff = 1.0, exponent = -0.5}]

    [params]                       # experiment specific numbers and lists
    alpha = [0.3, 0.6]

    [tolerances]                   # positive numbers
    rel = 1e-9

``inf`` may be written as the string ``"inf"`` or the TOML literal ``inf``;
numbers in scientific notation are accepted anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

from .errors import ConfigError, InvalidInput
from .profiles import RadialProfile, profile_from_config

EXPERIMENTS = (
    "a1-sweep",
    "growth",
    "dimlimit",
    "weaktype",
    "kakeya-verify",
    "sharpness",
    "thm42",
    "oracle-crosscheck",
)
RANDOMIZED = ("kakeya-verify", "oracle-crosscheck")
NEEDS_SCHEDULE = ("a1-sweep", "growth", "dimlimit", "weaktype", "thm42")
NEEDS_WEIGHT = ("a1-sweep", "dimlimit")

_TOP_KEYS = {"experiment", "seed", "schedule", "out", "weight", "params", "tolerances"}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int | None = None
    schedule: tuple = ()
    weight: dict | None = None
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    out: str | None = None

    def weight_profile(self) -> RadialProfile | None:
        if self.weight is None:
            return None
        try:
            return profile_from_config(self.weight)
        except (InvalidInput, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad weight description: {exc}") from None

    def param(self, key, default=None):
        return self.params.get(key, default)

    def tol(self, key, default):
        return self.tolerances.get(key, default)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return ExperimentConfig(self.experiment, seed, self.schedule, self.weight,
                                self.params, self.tolerances, self.out)


def _number(x, what):
    if isinstance(x, bool):
        raise ConfigError(f"{what}: expected a number, got a boolean")
    if isinstance(x, (int, float)):
        return x
    if isinstance(x, str):
        try:
            return float(x)
        except ValueError:
            pass
    raise ConfigError(f"{what}: expected a number, got {x!r}")


def config_from_dict(doc: dict) -> ExperimentConfig:
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    kind = doc.get("experiment")
    if kind not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {kind!r}")

    seed = doc.get("seed")
    if seed is not None:
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
            raise ConfigError("seed must be an integer in [0, 2^64)")
    elif kind in RANDOMIZED:
        raise ConfigError(f"experiment {kind!r} is randomized and needs a seed")

    raw = doc.get("schedule", [])
    if not isinstance(raw, list):
        raise ConfigError("schedule must be a list")
    sched = tuple(_number(x, "schedule") for x in raw)
    if kind in NEEDS_SCHEDULE and not sched:
        raise ConfigError("schedule must be nonempty")
    if any(b <= a for a, b in zip(sched, sched[1:])):
        raise ConfigError("schedule must be strictly ascending")
    if any(not math.isfinite(x) or x < 1 for x in sched):
        raise ConfigError("schedule entries must be finite dimensions >= 1")

    weight = doc.get("weight")
    if weight is not None and not isinstance(weight, dict):
        raise ConfigError("weight must be a table")
    if kind in NEEDS_WEIGHT and weight is None:
        raise ConfigError(f"experiment {kind!r} needs a [weight] table")

    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params must be a table")
    tols = doc.get("tolerances", {})
    if not isinstance(tols, dict):
        raise ConfigError("tolerances must be a table")
    tols = {k: _number(v, f"tolerance {k}") for k, v in tols.items()}
    for k, v in tols.items():
        if not v > 0:
            raise ConfigError(f"tolerance {k} must be positive, got {v}")

    out = doc.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("out must be a string path")
    cfg = ExperimentConfig(kind, seed, sched, weight, dict(params), tols, out)
    cfg.weight_profile()  # validate early
    return cfg


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {p}: {exc}") from None
    return config_from_dict(doc)
