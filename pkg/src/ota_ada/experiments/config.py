"""Flat ``key = value`` experiment configuration."""
from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from ..bounds import AccuracySpec, SystemConfig
from ..special_functions import DomainError

SEED_ENV = "OTA_ADA_SEED"
SWEEP_AXES = ("sigma_over_At", "n", "L")
POLICIES = ("random_nonadaptive", "overfit_attack")

# informational keys written into CSV headers; accepted and ignored on load
ECHO_ONLY = ("artifact", "command", "resolved_A_t", "resolved_k")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line, self.key = line, key


def _count(text: str) -> int:
    try:
        return int(str(text).strip())
    except ValueError:
        pass
    # float() accepts forms like 1e6; exact only up to 2**53
    x = float(text)
    if not math.isfinite(x) or x != int(x):
        raise ValueError(f"{text!r} is not an integer")
    return int(x)


def _float(text: str) -> float:
    x = float(text)
    if math.isnan(x):
        raise ValueError("nan is not allowed")
    return x


def _amplitude(text: str) -> float | str:
    return "opt" if str(text).strip().lower() == "opt" else _float(text)


def _seed(text: str) -> int:
    s = _count(text)
    if not 0 <= s < 2 ** 64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return s


def _counts(text: str) -> tuple[int, ...]:
    return tuple(_count(t) for t in str(text).split(",") if t.strip())


def _choice(options):
    def parse(text: str) -> str:
        text = str(text).strip()
        if text not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return text
    return parse


PARSERS = {
    "alpha": _float,
    "beta": _float,
    "n0": _count,
    "L": _count,
    "sigma_ch": _float,
    "A_t": _amplitude,
    "trials": _count,
    "seed": _seed,
    "output_path": str,
    "policy": _choice(POLICIES),
    "k": _count,
    "domain_size": _count,
    "n_values": _counts,
    "n0_values": _counts,
    "sweep_axis": _choice(SWEEP_AXES),
    "sweep_lo": _float,
    "sweep_hi": _float,
    "sweep_points": _count,
    "sweep_spacing": _choice(("linear", "log")),
}

DEFAULTS = {
    "alpha": 0.1,
    "beta": 0.05,
    "L": 1,
    "sigma_ch": 1.0,
    "A_t": 1.0,
    "trials": 200,
    "policy": "random_nonadaptive",
    "domain_size": 10_000,
}


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    lo: float
    hi: float
    points: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"sweep axis must be one of {SWEEP_AXES}")
        if not self.points >= 2:
            raise ValueError("sweep needs at least 2 points")
        if not self.lo < self.hi:
            raise ValueError("sweep needs lo < hi")
        if self.spacing == "log" and self.lo <= 0:
            raise ValueError("log sweep needs lo > 0")

    def values(self):
        import numpy as np

        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.points)
        return np.linspace(self.lo, self.hi, self.points)


@dataclass(frozen=True)
class ExperimentConfig:
    accuracy: AccuracySpec
    system: SystemConfig | None
    sweep: SweepSpec | None
    trials: int
    master_seed: int
    output_path: str | None
    policy: str = "random_nonadaptive"
    k: int | None = None
    domain_size: int = 10_000
    optimize_amplitude: bool = False
    n_values: tuple[int, ...] | None = None
    n0_values: tuple[int, ...] | None = None
    raw: Mapping[str, Any] = field(default_factory=dict, compare=False)
    given: frozenset = frozenset()

    def echo(self) -> list[str]:
        """``key = value`` lines that reproduce this configuration.

        Only explicitly set keys (plus alpha and beta) are echoed, so a re-run
        sees the same set of given keys.
        """
        shown = self.given | {"alpha", "beta"}
        lines = [f"{key} = {_fmt(self.raw[key])}" for key in PARSERS
                 if key in shown and key not in ("output_path", "seed")]
        return lines + [f"seed = {self.master_seed}"]


def _fmt(value: Any) -> str:
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_lines(text: str, lenient: bool = False) -> dict[str, tuple[str, int]]:
    """Split config text into ``{key: (raw value, line number)}``."""
    entries: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {line.strip()!r}", lineno)
        key, value = (part.strip() for part in body.split("=", 1))
        if key in ECHO_ONLY:
            continue
        if key not in PARSERS:
            if lenient:
                warnings.warn(f"line {lineno}: ignoring unknown key {key!r}", stacklevel=2)
                continue
            raise ConfigError(f"unknown key {key!r}", lineno, key)
        entries[key] = (value, lineno)
    return entries


def load_config(
    path: str | os.PathLike | None = None,
    overrides: Mapping[str, Any] | None = None,
    lenient: bool = False,
    require: tuple[str, ...] = ("n0",),
    environ: Mapping[str, str] | None = None,
    defaults: Mapping[str, Any] | None = None,
) -> ExperimentConfig:
    """Build a validated :class:`ExperimentConfig`.

    Precedence: ``overrides`` (command-line flags) over file values over the
    ``OTA_ADA_SEED`` environment variable (seed only) over ``defaults`` over
    the built-in defaults. Keys in
    ``require`` must come from the file or the overrides.

    Raises:
        ConfigError: parse or validation failure; carries the line number
            when the offending value came from the file.
    """
    environ = os.environ if environ is None else environ
    entries: dict[str, tuple[Any, int | None]] = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {str(path)!r}: {exc.strerror}") from exc
        entries.update(parse_lines(text, lenient))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in PARSERS:
            raise ConfigError(f"unknown key {key!r}", key=key)
        entries[key] = (value, None)
    seed_from_env = "seed" not in entries and bool(environ.get(SEED_ENV))
    if seed_from_env:
        entries["seed"] = (environ[SEED_ENV], None)

    for key, value in (defaults or {}).items():
        entries.setdefault(key, (value, None))

    for key in require:
        if key not in entries:
            raise ConfigError(f"missing required key {key!r}", key=key)

    values: dict[str, Any] = {}
    for key, (raw, line) in entries.items():
        try:
            values[key] = raw if not isinstance(raw, str) else PARSERS[key](raw)
            if key in ("n0", "L", "trials", "domain_size", "sweep_points", "k") and values[key] < 1:
                raise ValueError("must be >= 1")
        except (ValueError, TypeError) as exc:
            src = f" (from {SEED_ENV})" if key == "seed" and seed_from_env else ""
            raise ConfigError(f"{key}{src}: {exc}", line, key) from exc

    def line_of(key):
        return entries.get(key, (None, None))[1]

    merged = {**DEFAULTS, **values}
    try:
        accuracy = AccuracySpec(merged["alpha"], merged["beta"])
    except DomainError as exc:
        key = "alpha" if "alpha" in str(exc) else "beta"
        raise ConfigError(str(exc), line_of(key), key) from exc

    optimize = merged["A_t"] == "opt"
    system = None
    if "n0" in merged:
        try:
            system = SystemConfig(
                n0=merged["n0"], L=merged["L"], sigma_ch=merged["sigma_ch"],
                A_t=1.0 if optimize else merged["A_t"],
            )
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    sweep = None
    sweep_keys = ("sweep_axis", "sweep_lo", "sweep_hi", "sweep_points")
    if any(k in merged for k in sweep_keys):
        missing = [k for k in sweep_keys if k not in merged]
        if missing:
            raise ConfigError(f"incomplete sweep, missing {', '.join(missing)}", key=missing[0])
        try:
            sweep = SweepSpec(merged["sweep_axis"], merged["sweep_lo"], merged["sweep_hi"],
                              merged["sweep_points"], merged.get("sweep_spacing", "linear"))
        except ValueError as exc:
            raise ConfigError(str(exc), line_of("sweep_axis"), "sweep_axis") from exc

    return ExperimentConfig(
        accuracy=accuracy,
        system=system,
        sweep=sweep,
        trials=merged["trials"],
        master_seed=merged.get("seed", 0),
        output_path=merged.get("output_path"),
        policy=merged["policy"],
        k=merged.get("k"),
        domain_size=merged["domain_size"],
        optimize_amplitude=optimize,
        n_values=merged.get("n_values"),
        n0_values=merged.get("n0_values"),
        raw=merged,
        given=frozenset(values),
    )
