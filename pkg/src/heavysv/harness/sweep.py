"""Seeded sweeps over sizes and trials, optionally across worker processes."""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Iterator, List, Optional

from .config import ExperimentConfig
from .experiments import EXPERIMENTS
from .records import TrialRecord, dumps


def tasks(cfg: ExperimentConfig):
    """(n, N, trial) in output order: sizes as listed, trials ascending."""
    return [(n, N, t) for n, N in cfg.sizes for t in range(cfg.trials)]


def run_trial(cfg: ExperimentConfig, n: int, N: int, trial: int) -> TrialRecord:
    start = time.perf_counter()
    rec = EXPERIMENTS[cfg.experiment](cfg, n, N, trial)
    return replace(rec, wall_time_ms=round(1e3 * (time.perf_counter() - start), 3))


def _run_task(args):
    return run_trial(*args)


def iter_sweep(cfg: ExperimentConfig, workers: Optional[int] = None) -> Iterator[TrialRecord]:
    workers = cfg.workers if workers is None else workers
    jobs = [(cfg, n, N, t) for n, N, t in tasks(cfg)]
    if workers <= 1:
        for job in jobs:
            yield run_trial(*job)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map yields in submission order whatever order the workers finish in
        yield from pool.map(_run_task, jobs, chunksize=1)


def run_sweep(cfg: ExperimentConfig, workers: Optional[int] = None,
              out: Optional[str] = None) -> List[TrialRecord]:
    """Run every trial, appending records to `out` in trial order as they arrive.

    If a trial or a write fails, the records already written stay on disk
    and the exception propagates.
    """
    out = cfg.output if out is None else out
    records = []
    fh = open(out, "w", encoding="utf-8") if out else None
    try:
        for rec in iter_sweep(cfg, workers):
            records.append(rec)
            if fh is not None:
                fh.write(dumps(rec) + "\n")
                fh.flush()
    finally:
        if fh is not None:
            fh.close()
    return records
