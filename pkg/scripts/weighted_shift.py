"""sigma_min with bounded entrywise weights and a rank-one shift, against the raw matrix."""
import argparse
import os

import numpy as np

from heavysv.harness import analysis
from heavysv.harness.config import load_config, with_overrides
from heavysv.harness.sweep import run_sweep

HERE = os.path.dirname(os.path.abspath(__file__))


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--config", default=os.path.join(HERE, "..", "configs", "weighted.cfg"))
    p.add_argument("--shift", type=float)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()
    cfg = with_overrides(load_config(args.config), shift_scale=args.shift)
    recs = run_sweep(cfg, workers=args.workers)
    print("n\tmedian_weighted\tmedian_raw\tratio")
    for n, v in analysis.group_by_size(recs).items():
        raw = analysis.group_by_size(recs, "sigma_min_raw")[n]
        print(f"{n}\t{np.median(v):.5g}\t{np.median(raw):.5g}\t{np.median(v / raw):.4f}")
    for key in ("sigma_min", "sigma_min_raw"):
        fit = analysis.fit_exponent(recs, value=key)
        print(f"# {key} exponent {fit.slope:.4f} +- {fit.stderr:.4f}")


if __name__ == "__main__":
    main()
