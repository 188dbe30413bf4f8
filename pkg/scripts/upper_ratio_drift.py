"""Track sigma_min over n^(1/alpha) (log n)^((alpha-2)/(2 alpha)) in the upper regime.

The 99th percentile of that ratio should stay roughly flat in n; the script
prints it per size with the relative drift against the smallest size.
"""
import argparse
import os
import time

import numpy as np

from heavysv.harness.config import load_config, with_overrides
from heavysv.harness.sweep import run_sweep

HERE = os.path.dirname(os.path.abspath(__file__))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", default=os.path.join(HERE, "..", "configs", "upper_drift.cfg"))
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    args = p.parse_args()
    cfg = with_overrides(load_config(args.config), trials=args.trials)
    t = time.time()
    recs = run_sweep(cfg, workers=args.workers, out=args.out)
    ref = None
    print("n\tN\tq99\tmedian\tdrift_vs_first\tall_ones\tminor_ok")
    for n, N in cfg.sizes:
        rs = [r for r in recs if r.n == n]
        v = np.array([r.extras["upper_ratio"] for r in rs])
        q99 = float(np.quantile(v, 0.99))
        ref = q99 if ref is None else ref
        with_col = [r for r in rs if r.extras["all_ones"]]
        ok = all(r.extras["sigma_below_minor"] for r in with_col)
        print(f"{n}\t{N}\t{q99:.5f}\t{np.median(v):.5f}\t{q99 / ref - 1:+.4f}\t"
              f"{len(with_col)}/{len(rs)}\t{ok}", flush=True)
    print(f"# {time.time() - t:.0f}s")


if __name__ == "__main__":
    main()
