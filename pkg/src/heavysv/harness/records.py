"""One JSON object per line, fixed field order."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, List

FIELDS = ("experiment", "n", "N", "alpha", "regime", "seed", "sigma_min", "sigma_max",
          "extras", "wall_time_ms")


@dataclass(frozen=True)
class TrialRecord:
    experiment: str
    n: int
    N: int
    alpha: float
    regime: str
    seed: int
    sigma_min: float
    sigma_max: float
    extras: Dict[str, object] = field(default_factory=dict)
    wall_time_ms: float = 0.0

    def __post_init__(self):
        if not self.sigma_min <= self.sigma_max * (1 + 1e-12):
            raise ValueError(f"sigma_min {self.sigma_min} exceeds sigma_max {self.sigma_max}")

    def as_dict(self, timing: bool = True) -> dict:
        d = {k: getattr(self, k) for k in FIELDS}
        if not timing:
            del d["wall_time_ms"]
        return d


def dumps(rec: TrialRecord) -> str:
    # floats go through repr, so parsing gives back the same doubles
    return json.dumps(rec.as_dict(), separators=(", ", ": "))


def payload(rec: TrialRecord) -> str:
    """Serialization without the wall-clock field, used for determinism checks."""
    return json.dumps(rec.as_dict(timing=False), separators=(", ", ": "))


def loads(line: str) -> TrialRecord:
    d = json.loads(line)
    missing = [k for k in FIELDS if k not in d]
    if missing:
        raise ValueError(f"record missing fields {missing}")
    extra = [k for k in d if k not in FIELDS]
    if extra:
        raise ValueError(f"record has unknown fields {extra}")
    return TrialRecord(**d)


def write_records(path: str, records: Iterable[TrialRecord], append: bool = False):
    with open(path, "a" if append else "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(dumps(r) + "\n")


def read_records(path: str) -> List[TrialRecord]:
    with open(path, encoding="utf-8") as fh:
        return [loads(line) for line in fh if line.strip()]
