"""Flat ``key = value`` experiment configs with dotted keys.

Example::

    experiment.name = scaling
    experiment.trials = 50
    experiment.sizes = 100, 200, 400x900
    law.alpha = 1.0
    scheme.delta = 2

A bare size ``n`` means N = ceil(delta * n); ``nxN`` fixes both. Unknown
keys are rejected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, Tuple

from ..tail_sampler import TailLaw, TruncationScheme


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "scaling"
    law: TailLaw = field(default_factory=TailLaw)
    scheme: TruncationScheme = field(default_factory=TruncationScheme)
    sizes: Tuple[Tuple[int, int], ...] = ((100, 200),)
    trials: int = 1
    root_seed: int = 0
    tolerance: float = 1e-10
    output: str = ""
    workers: int = 1
    # experiment-specific knobs
    weight_low: float = 0.5
    weight_high: float = 2.0
    shift_scale: float = 0.0
    c_factor: float = 64.0

    def __post_init__(self):
        from .experiments import EXPERIMENTS
        if self.experiment not in EXPERIMENTS:
            raise ConfigError("experiment.name",
                              f"unknown experiment {self.experiment!r}; known: {sorted(EXPERIMENTS)}")
        if self.trials < 1:
            raise ConfigError("experiment.trials", "must be >= 1")
        if not self.sizes:
            raise ConfigError("experiment.sizes", "no sizes given")
        for n, N in self.sizes:
            if n < 1 or N < math.ceil(self.scheme.delta * n):
                raise ConfigError("experiment.sizes",
                                  f"size {n}x{N} violates N >= ceil(delta * n) with delta={self.scheme.delta}")
        if not 0 <= self.root_seed < 2 ** 64:
            raise ConfigError("experiment.root_seed", "must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ConfigError("experiment.workers", "must be >= 1")
        if not self.tolerance > 0:
            raise ConfigError("experiment.tolerance", "must be positive")
        if not 0 < self.weight_low <= self.weight_high:
            raise ConfigError("weights.low", "need 0 < weights.low <= weights.high")


def _parse_sizes(text: str, delta: float):
    out = []
    for item in text.split(","):
        item = item.strip().lower()
        if not item:
            continue
        if "x" in item:
            n, N = item.split("x")
            out.append((int(n), int(N)))
        else:
            n = int(item)
            out.append((n, int(math.ceil(delta * n))))
    return tuple(out)


_LAW = {"law.kind": ("kind", str), "law.alpha": ("alpha", float),
        "law.sigma": ("sigma", float), "law.beta": ("beta", float)}
_SCHEME = {"scheme.regime": ("regime", str), "scheme.base": ("base", str),
           "scheme.b": ("b", float), "scheme.c": ("c", float),
           "scheme.delta": ("delta", float), "scheme.C_u": ("C_u", float)}
_TOP = {"experiment.name": ("experiment", str), "experiment.trials": ("trials", int),
        "experiment.root_seed": ("root_seed", int), "experiment.tolerance": ("tolerance", float),
        "experiment.output": ("output", str), "experiment.workers": ("workers", int),
        "weights.low": ("weight_low", float), "weights.high": ("weight_high", float),
        "shift.scale": ("shift_scale", float), "coupling.c_factor": ("c_factor", float)}
KNOWN_KEYS = sorted([*_LAW, *_SCHEME, *_TOP, "experiment.sizes"])


def parse_pairs(text: str) -> Dict[str, str]:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(key, "unknown key")
        if key in pairs:
            raise ConfigError(key, "given twice")
        pairs[key] = value
    return pairs


def _convert(key, value, typ):
    try:
        return typ(value)
    except ValueError:
        raise ConfigError(key, f"cannot read {value!r} as {typ.__name__}") from None


def build_config(pairs: Dict[str, str]) -> ExperimentConfig:
    for key in pairs:
        if key not in KNOWN_KEYS:
            raise ConfigError(key, "unknown key")
    law_kw = {f: _convert(k, pairs[k], t) for k, (f, t) in _LAW.items() if k in pairs}
    scheme_kw = {f: _convert(k, pairs[k], t) for k, (f, t) in _SCHEME.items() if k in pairs}
    top = {f: _convert(k, pairs[k], t) for k, (f, t) in _TOP.items() if k in pairs}
    try:
        law = TailLaw(**law_kw)
    except ValueError as exc:
        raise ConfigError("law", str(exc)) from None
    try:
        scheme = TruncationScheme(**scheme_kw)
    except ValueError as exc:
        raise ConfigError("scheme", str(exc)) from None
    if "experiment.sizes" in pairs:
        try:
            top["sizes"] = _parse_sizes(pairs["experiment.sizes"], scheme.delta)
        except ValueError:
            raise ConfigError("experiment.sizes", f"cannot parse {pairs['experiment.sizes']!r}") from None
    return ExperimentConfig(law=law, scheme=scheme, **top)


def parse_config(text: str) -> ExperimentConfig:
    return build_config(parse_pairs(text))


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    """Replace fields, skipping None values (CLI flags left unset)."""
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
