"""Run configuration file: `key = value` lines, # comments, fixed key set.

Every key has a default; unknown keys are rejected so typos fail loudly
instead of silently running a default.

    prns               comma-separated PRN list          1,2,...,12
    doppler_min_hz     search grid lower edge            -5000
    doppler_max_hz     search grid upper edge            5000
    doppler_step_hz    grid step, 0 = 2/(3 T_coh)        0
    coherent_ms        coherent integration per round    1
    noncoherent_rounds magnitude accumulation rounds     10
    threshold          detection threshold (>1)          2.5
    workers            engine worker count               1
    schedule           static | dynamic                  dynamic
    priority           normal | high                     normal
    precision          single | double                   single
    seed               synthesis / noise seed            0
    duration_s         synthesis duration                0.01
    sample_rate_hz     sample rate                       8184000
    min_iterations     scalar-loop threshold             64
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from gnssperf.errors import FormatError


@dataclass
class RunConfig:
    prns: list = field(default_factory=lambda: list(range(1, 13)))
    doppler_min_hz: float = -5000.0
    doppler_max_hz: float = 5000.0
    doppler_step_hz: float = 0.0
    coherent_ms: int = 1
    noncoherent_rounds: int = 10
    threshold: float = 2.5
    workers: int = 1
    schedule: str = "dynamic"
    priority: str = "normal"
    precision: str = "single"
    seed: int = 0
    duration_s: float = 0.01
    sample_rate_hz: float = 8184000.0
    min_iterations: int = 64


_INT_KEYS = {"coherent_ms", "noncoherent_rounds", "workers", "seed", "min_iterations"}
_FLOAT_KEYS = {
    "doppler_min_hz", "doppler_max_hz", "doppler_step_hz",
    "threshold", "duration_s", "sample_rate_hz",
}
_CHOICE_KEYS = {
    "schedule": ("static", "dynamic"),
    "priority": ("normal", "high"),
    "precision": ("single", "double"),
}
_KNOWN_KEYS = {f.name for f in fields(RunConfig)}


def parse_run_config(text: str) -> RunConfig:
    cfg = RunConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key not in _KNOWN_KEYS:
            raise FormatError(f"line {lineno}: unknown key {key!r}")
        try:
            if key == "prns":
                cfg.prns = [int(tok) for tok in value.split(",") if tok.strip()]
            elif key in _INT_KEYS:
                setattr(cfg, key, int(value))
            elif key in _FLOAT_KEYS:
                setattr(cfg, key, float(value))
            elif key in _CHOICE_KEYS:
                low = value.lower()
                if low not in _CHOICE_KEYS[key]:
                    raise FormatError(
                        f"line {lineno}: {key} must be one of {_CHOICE_KEYS[key]}"
                    )
                setattr(cfg, key, low)
        except ValueError as exc:
            raise FormatError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return cfg


def load_run_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_run_config(fh.read())
