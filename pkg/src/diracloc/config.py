"""Run configuration: flat ``key=value`` files merged with command-line flags."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

EXPERIMENTS = ("lyapunov-sweep", "critical-energies", "moments", "delocalization",
               "localization", "mass-gap", "nrl", "zitter", "eigenfunctions")

OUT_ENV = "DIRACLOC_OUT"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    experiment: str
    mass: float = 0.0
    c: float = 1.0
    v: float = 0.5
    p: float = 0.5
    n_sites: Optional[int] = None
    boundary: str = "open"
    t_min: Optional[float] = None
    t_max: Optional[float] = None
    n_times: Optional[int] = None
    t_spacing: str = "log"
    times: Optional[tuple] = None
    e_min: float = -3.0
    e_max: float = 3.0
    n_energies: int = 61
    n_steps: int = 100000
    seed: int = 0
    n_realizations: Optional[int] = None
    masses: Optional[tuple] = None
    c_list: Optional[tuple] = None
    initial: str = "delta+"
    out: Optional[str] = None
    threads: int = 1
    check: bool = False
    sources: dict = field(default_factory=dict, repr=False, compare=False)

    def time_grid(self, default_min: float, default_max: float, default_n: int) -> np.ndarray:
        if self.times is not None:
            return np.asarray(self.times, dtype=float)
        lo = default_min if self.t_min is None else self.t_min
        hi = default_max if self.t_max is None else self.t_max
        n = default_n if self.n_times is None else self.n_times
        if self.t_spacing == "log":
            return np.geomspace(lo, hi, n)
        return np.linspace(lo, hi, n)

    def energy_grid(self) -> np.ndarray:
        return np.linspace(self.e_min, self.e_max, self.n_energies)

    def output_dir(self) -> Path:
        if self.out:
            return Path(self.out)
        return Path(os.environ.get(OUT_ENV, "runs")) / self.experiment

    def canonical(self) -> list[str]:
        """Sorted ``key=value`` lines with every field resolved."""
        lines = []
        for f in fields(self):
            if f.name == "sources":
                continue
            value = getattr(self, f.name)
            if f.name == "out":
                value = str(self.output_dir())
            lines.append(f"{f.name}={_render(value)}")
        return sorted(lines)


def _render(value) -> str:
    if value is None:
        return "default"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(_render(x) for x in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _float(s):
    return float(s)


def _int(s):
    x = float(s)
    if x != int(x):
        raise ValueError(f"{s!r} is not an integer")
    return int(x)


def _bool(s):
    if isinstance(s, bool):
        return s
    low = str(s).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{s!r} is not a boolean")


def _float_list(s):
    if isinstance(s, (list, tuple)):
        return tuple(float(x) for x in s)
    items = [x for x in str(s).split(",") if x.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(float(x) for x in items)


_PARSERS = {
    "experiment": str, "mass": _float, "c": _float, "v": _float, "p": _float,
    "n_sites": _int, "boundary": str, "t_min": _float, "t_max": _float, "n_times": _int,
    "t_spacing": str, "times": _float_list, "e_min": _float, "e_max": _float,
    "n_energies": _int, "n_steps": _int, "seed": _int, "n_realizations": _int,
    "masses": _float_list, "c_list": _float_list, "initial": str, "out": str,
    "threads": _int, "check": _bool,
}

ALIASES = {"m": "mass", "sites": "n_sites", "realizations": "n_realizations", "light_speed": "c"}


def read_config_text(text: str, origin: str = "<config>") -> dict:
    """Parse ``key=value`` lines; '#' starts a comment.  Returns raw string values."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (x.strip() for x in line.split("=", 1))
        key = ALIASES.get(key.replace("-", "_"), key.replace("-", "_"))
        if key not in _PARSERS:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r}")
        values[key] = (value, f"{origin}:{lineno}")
    return values


def parse_config(text: Optional[str] = None, flags: Optional[dict] = None,
                 origin: str = "<config>") -> RunConfig:
    """Merge file text and flag values (flags win) into a validated RunConfig."""
    merged = {}
    sources = {}
    if text:
        for key, (value, where) in read_config_text(text, origin).items():
            merged[key] = (value, where)
            sources[key] = {"file": value}
    for key, value in (flags or {}).items():
        if value is None:
            continue
        key = ALIASES.get(key, key)
        if key not in _PARSERS:
            raise ConfigError(f"--{key.replace('_', '-')}: unknown option")
        merged[key] = (value, f"--{key.replace('_', '-')}")
        sources.setdefault(key, {})["flag"] = value

    if "experiment" not in merged:
        raise ConfigError("no experiment given")
    kwargs = {}
    for key, (value, where) in merged.items():
        try:
            kwargs[key] = _PARSERS[key](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: bad value for {key}: {exc}") from None
    cfg = RunConfig(**kwargs)
    cfg.sources = sources
    validate(cfg, {k: w for k, (_, w) in merged.items()})
    return cfg


def validate(cfg: RunConfig, where: Optional[dict] = None) -> None:
    where = where or {}

    def fail(key, msg):
        raise ConfigError(f"{where.get(key, key)}: {msg}")

    if cfg.experiment not in EXPERIMENTS:
        fail("experiment", f"unknown experiment {cfg.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    if not 0 < cfg.p < 1:
        fail("p", f"p must lie in (0, 1), got {cfg.p}")
    if not cfg.c > 0:
        fail("c", f"c must be > 0, got {cfg.c}")
    if not cfg.mass >= 0:
        fail("mass", f"mass must be >= 0, got {cfg.mass}")
    if not cfg.v >= 0:
        fail("v", f"v must be >= 0, got {cfg.v}")
    if cfg.n_sites is not None and cfg.n_sites < 4:
        fail("n_sites", f"n_sites must be >= 4, got {cfg.n_sites}")
    if cfg.boundary not in ("open", "periodic"):
        fail("boundary", f"boundary must be open or periodic, got {cfg.boundary!r}")
    if cfg.t_spacing not in ("log", "linear"):
        fail("t_spacing", "t_spacing must be log or linear")
    if cfg.t_min is not None and not cfg.t_min > 0:
        fail("t_min", "t_min must be > 0")
    if cfg.t_min is not None and cfg.t_max is not None and not cfg.t_max > cfg.t_min:
        fail("t_max", "t_max must exceed t_min")
    if cfg.n_times is not None and cfg.n_times < 1:
        fail("n_times", "n_times must be >= 1")
    if cfg.times is not None:
        t = np.asarray(cfg.times)
        if np.any(t < 0) or np.any(np.diff(t) <= 0):
            fail("times", "times must be non-negative and strictly increasing")
    if not cfg.e_max > cfg.e_min or cfg.n_energies < 1:
        fail("n_energies", "malformed energy grid")
    if cfg.n_steps < 10 ** 4:
        fail("n_steps", "n_steps must be >= 10000")
    if not 0 <= cfg.seed < 2 ** 64:
        fail("seed", "seed must be an unsigned 64-bit integer")
    if cfg.n_realizations is not None and cfg.n_realizations < 1:
        fail("n_realizations", "n_realizations must be >= 1")
    if cfg.threads < 0:
        fail("threads", "threads must be >= 0")
    if cfg.initial not in ("delta+", "delta-", "delta+-"):
        fail("initial", f"unknown initial state {cfg.initial!r}")
    for key in ("masses", "c_list"):
        vals = getattr(cfg, key)
        if vals is not None and any(not math.isfinite(x) or x < 0 for x in vals):
            fail(key, f"{key} entries must be finite and non-negative")
