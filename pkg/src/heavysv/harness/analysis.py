"""Exponent fits, two-sided coverage and summary tables."""
from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .records import TrialRecord


def record_value(rec: TrialRecord, key: str) -> float:
    if key in ("sigma_min", "sigma_max"):
        return float(getattr(rec, key))
    return float(rec.extras[key])


def group_by_size(records: Iterable[TrialRecord], value: str = "sigma_min") -> Dict[int, np.ndarray]:
    groups = defaultdict(list)
    for r in records:
        groups[r.n].append(record_value(r, value))
    return {n: np.asarray(v) for n, v in sorted(groups.items())}


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    stderr: float
    r_squared: float
    points: Tuple[Tuple[float, float], ...]  # (log n, log median)
    loglog_slope: float = float("nan")  # slope with an extra log log n regressor
    loglog_coef: float = float("nan")


def _ols(x: np.ndarray, y: np.ndarray):
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = len(x) - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    sxx = float(np.sum((x - x.mean()) ** 2))
    stderr = math.sqrt(s2 / sxx) if sxx > 0 else math.inf
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / sst if sst > 0 else 1.0
    return float(coef[1]), float(coef[0]), stderr, r2


def fit_exponent(records: Iterable[TrialRecord], group_key: Optional[str] = None,
                 value: str = "sigma_min", loglog: bool = False) -> ScalingFit:
    """OLS of log median(value) on log n; group_key filters records by experiment name."""
    recs = [r for r in records if group_key is None or r.experiment == group_key]
    groups = group_by_size(recs, value)
    if len(groups) < 3:
        raise ValueError(f"need at least 3 sizes, got {len(groups)}")
    x = np.log(np.array(list(groups), dtype=float))
    y = np.log(np.array([np.median(v) for v in groups.values()]))
    slope, icpt, se, r2 = _ols(x, y)
    ll_slope = ll_coef = float("nan")
    if loglog and len(groups) >= 4:
        A = np.column_stack([np.ones_like(x), x, np.log(x)])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        ll_slope, ll_coef = float(coef[1]), float(coef[2])
    return ScalingFit(slope, icpt, se, r2, tuple(zip(x.tolist(), y.tolist())), ll_slope, ll_coef)


# ---------------------------------------------------------------------------
# two-sided bound with log corrections

def lower_shape(n, alpha: float):
    """n^(1/alpha) (log n)^(2(alpha - 2)/alpha)."""
    return n ** (1.0 / alpha) * np.log(n) ** (2.0 * (alpha - 2.0) / alpha)


def upper_shape(n, alpha: float):
    """n^(1/alpha) (log n)^((alpha - 2)/(2 alpha))."""
    return n ** (1.0 / alpha) * np.log(n) ** ((alpha - 2.0) / (2.0 * alpha))


def calibrate_sandwich(records: Iterable[TrialRecord]) -> Tuple[float, float]:
    """c1 = min sigma_min / lower shape, c2 = max sigma_min / upper shape."""
    recs = list(records)
    if not recs:
        raise ValueError("no calibration records")
    lo = min(r.sigma_min / lower_shape(r.n, r.alpha) for r in recs)
    hi = max(r.sigma_min / upper_shape(r.n, r.alpha) for r in recs)
    return float(lo), float(hi)


def sandwich_check(records: Iterable[TrialRecord], c1: float, c2: float) -> float:
    """Fraction of records with c1 L(n) <= sigma_min <= c2 U(n); c2 may be inf."""
    recs = list(records)
    if not recs:
        raise ValueError("no records")
    inside = 0
    for r in recs:
        ok_lo = c1 <= 0 or r.sigma_min >= c1 * lower_shape(r.n, r.alpha)
        ok_hi = math.isinf(c2) or r.sigma_min <= c2 * upper_shape(r.n, r.alpha)
        inside += ok_lo and ok_hi
    return inside / len(recs)


# ---------------------------------------------------------------------------
# tables

def summary_rows(records: Iterable[TrialRecord], value: str = "sigma_min") -> List[dict]:
    recs = list(records)
    Ns = {r.n: r.N for r in recs}
    rows = []
    for n, v in group_by_size(recs, value).items():
        logs = np.log(v[v > 0]) if np.any(v > 0) else np.array([0.0])
        rows.append({
            "n": n, "N": Ns[n], "trials": len(v),
            "median": float(np.median(v)),
            "q10": float(np.quantile(v, 0.1)), "q90": float(np.quantile(v, 0.9)),
            # normal-theory standard error of a median, on the log scale
            "log_median_err": float(1.2533 * logs.std(ddof=1) / math.sqrt(len(logs)))
            if len(logs) > 1 else 0.0,
        })
    return rows


def summary_csv(records: Iterable[TrialRecord], value: str = "sigma_min") -> str:
    rows = summary_rows(records, value)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["n", "N", "trials", "median", "q10", "q90", "log_median_err"],
                       lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def plot_tsv(records: Iterable[TrialRecord], value: str = "sigma_min") -> str:
    """log n, log median, error -- tab separated."""
    lines = ["x\ty\terr"]
    for row in summary_rows(records, value):
        lines.append(f"{math.log(row['n'])!r}\t{math.log(row['median'])!r}\t{row['log_median_err']!r}")
    return "\n".join(lines) + "\n"
