"""Growth of the sigma_min / sqrt(N) inradius certificate with n (N = 2n)."""
import argparse

from heavysv.harness import analysis
from heavysv.harness.config import parse_config
from heavysv.harness.sweep import run_sweep


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--sizes", default="100, 200, 400, 800")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()
    cfg = parse_config(f"experiment.name = polytope\nexperiment.sizes = {args.sizes}\n"
                       f"experiment.trials = {args.trials}\nexperiment.root_seed = {args.seed}\n"
                       f"law.alpha = {args.alpha}\n")
    recs = run_sweep(cfg, workers=args.workers)
    print(analysis.summary_csv(recs, "radius"), end="")
    fit = analysis.fit_exponent(recs, value="radius")
    print(f"# radius exponent {fit.slope:.4f} +- {fit.stderr:.4f}; 1/alpha - 1/2 = "
          f"{1 / args.alpha - 0.5:.4f}")


if __name__ == "__main__":
    main()
