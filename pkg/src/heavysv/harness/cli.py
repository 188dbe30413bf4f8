"""Command line entry point.

Exit status: 0 success, 1 an experiment check failed, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import List, Optional

import numpy as np

from .. import rng as _rng
from ..anticoncentration import NetBudgetError, check_covering, random_sparse_probes, sparse_net
from ..polytope import BudgetError, certificate, exact_inradius_2d, grid_refine_search
from ..tail_sampler import TailLaw, sample_matrix
from ..universality import compare_dilations, coupling_experiment
from ..decomposition import decompose, gaussian_surrogate, normalize
from ..spectra import operator_norm
from . import analysis
from .config import ConfigError, ExperimentConfig, _parse_sizes, load_config, with_overrides
from .records import dumps, read_records
from .sweep import run_sweep

OK, FAILED, USAGE = 0, 1, 2


def _add_overrides(p):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--seed", type=int, help="root seed")
    p.add_argument("--trials", type=int)
    p.add_argument("--sizes", help="comma list of n or nxN")
    p.add_argument("--out", help="record output path (JSON lines)")
    p.add_argument("--workers", type=int)
    p.add_argument("--tolerance", type=float)


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    sizes = None
    if args.sizes:
        try:
            sizes = _parse_sizes(args.sizes, cfg.scheme.delta)
        except ValueError:
            raise ConfigError("--sizes", f"cannot parse {args.sizes!r}") from None
    return with_overrides(cfg, root_seed=args.seed, trials=args.trials, sizes=sizes,
                          output=args.out, workers=args.workers, tolerance=args.tolerance)


def _experiment_failures(records) -> List[str]:
    bad = []
    for r in records:
        if r.extras.get("sigma_below_minor") is False:
            bad.append(f"n={r.n} trial={r.extras['trial']}: sigma_min exceeds minor norm")
    return bad


def cmd_sample(args) -> int:
    law = TailLaw(args.kind, args.alpha, args.sigma, args.beta)
    x = sample_matrix(law, _rng.Streams(args.seed, 0, 0, 0), (1, args.count))[0]
    if args.out:
        np.savetxt(args.out, x, fmt="%r")
    else:
        for v in x[:args.show]:
            print(repr(float(v)))
    a = np.abs(x)
    print("t\tempirical_tail\tlaw_tail", file=sys.stderr)
    for t in (2.0, 4.0, 8.0, 16.0):
        print(f"{t:g}\t{np.mean(a >= t):.6f}\t{float(law.tail(t)):.6f}", file=sys.stderr)
    print(f"mean sign {np.mean(np.sign(x)):+.5f}", file=sys.stderr)
    return OK


def cmd_sweep(args) -> int:
    cfg = _config(args)
    out = cfg.output or None
    records = run_sweep(cfg, out=out)
    if out is None:
        for r in records:
            print(dumps(r))
    else:
        stem = out[:-6] if out.endswith(".jsonl") else out
        with open(stem + ".csv", "w", encoding="utf-8") as fh:
            fh.write(analysis.summary_csv(records))
        with open(stem + ".tsv", "w", encoding="utf-8") as fh:
            fh.write(analysis.plot_tsv(records))
    print(analysis.summary_csv(records), end="", file=sys.stderr if out is None else sys.stdout)
    bad = _experiment_failures(records)
    for line in bad:
        print("FAIL " + line, file=sys.stderr)
    return FAILED if bad else OK


def cmd_fit(args) -> int:
    records = read_records(args.input)
    fit = analysis.fit_exponent(records, args.experiment, args.value, loglog=args.loglog)
    print(f"slope {fit.slope!r}")
    print(f"intercept {fit.intercept!r}")
    print(f"stderr {fit.stderr!r}")
    print(f"r_squared {fit.r_squared!r}")
    if args.loglog:
        print(f"loglog_slope {fit.loglog_slope!r}")
        print(f"loglog_coef {fit.loglog_coef!r}")
    return OK


def cmd_report(args) -> int:
    records = read_records(args.input)
    print(analysis.summary_csv(records, args.value), end="")
    sizes = sorted({r.n for r in records})
    if len(sizes) >= 3:
        fit = analysis.fit_exponent(records, value=args.value)
        print(f"# slope {fit.slope:.4f} +- {fit.stderr:.4f}")
    if args.calibrate_n is not None:
        cal = [r for r in records if r.n == args.calibrate_n]
        held = [r for r in records if r.n != args.calibrate_n]
        if not cal or not held:
            print(f"no records to calibrate at n={args.calibrate_n} or none held out", file=sys.stderr)
            return USAGE
        c1, c2 = analysis.calibrate_sandwich(cal)
        cov = analysis.sandwich_check(held, c1, c2)
        print(f"# sandwich c1={c1:.6g} c2={c2:.6g} held-out coverage {cov:.4f}")
        if args.min_coverage is not None and cov < args.min_coverage:
            return FAILED
    return OK


def cmd_universality(args) -> int:
    cfg = _config(args)
    scheme = cfg.scheme
    if scheme.regime != "lower":
        raise ConfigError("scheme.regime", "universality needs the lower regime")
    failed = False
    for n, N in cfg.sizes:
        medians = []
        for c in (scheme.c, scheme.c * cfg.c_factor):
            sch = replace(scheme, c=c)
            rep = coupling_experiment(cfg.law, sch, n, N, cfg.trials, cfg.root_seed)
            medians.append(rep.median_delta)
            print(f"n={n} N={N} c={c:.6g} median_delta={rep.median_delta:.6g} "
                  f"q={rep.q:.4g} M={rep.M:.4g} c_hat={rep.c_hat:.4g} median_pass={rep.median_pass}")
        print(f"n={n} N={N} decay_direction={'ok' if medians[1] < medians[0] else 'reversed'}")
        # dilation chain on a few pairs with eps = ||T - G||
        for k in range(args.dilation_trials):
            streams = _rng.Streams(cfg.root_seed, n, N, k)
            pair = normalize(decompose(cfg.law, scheme, n, N, streams))
            t_mat = pair.matrix
            g_mat = gaussian_surrogate(pair, streams)
            eps = operator_norm(t_mat - g_mat) * (1.0 + 1e-9)
            comp = compare_dilations(t_mat, g_mat, eps)
            print(f"  dilation trial {k}: d_H={comp.d_h:.6g} eps={eps:.6g} "
                  f"premise={comp.premise} conclusions={comp.conclusions}")
            if comp.premise and not comp.conclusions:
                failed = True
    return FAILED if failed else OK


def cmd_polytope(args) -> int:
    law = TailLaw("pareto", args.alpha)
    bad = 0
    for k in range(args.instances):
        x = sample_matrix(law, _rng.Streams(args.seed, args.n, args.N, k), (args.N, args.n))
        cert = certificate(x).radius
        if args.n == 2:
            ref = exact_inradius_2d(x)
            ok = cert <= ref * (1 + 1e-10)
        else:
            ref, _, mesh = grid_refine_search(x)
            ok = cert <= ref + mesh + 1e-10 * ref
        bad += not ok
        if args.verbose:
            print(f"{k}\t{cert!r}\t{ref!r}\t{ok}")
    print(f"instances {args.instances} violations {bad}")
    return FAILED if bad else OK


def cmd_nets(args) -> int:
    net = sparse_net(args.n, args.m, args.epsilon, args.budget)
    probes = random_sparse_probes(_rng.make_generator(args.seed, args.n, args.m), args.n, args.m,
                                  args.probes)
    rep = check_covering(net, probes, args.m, args.epsilon)
    print(f"net size {len(net)} probes {rep.probes} max distance {rep.max_distance:.6g} "
          f"uncovered {rep.uncovered}")
    return FAILED if rep.uncovered else OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="heavysv", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="draw entries from a tail law")
    s.add_argument("--kind", default="pareto", choices=["pareto", "stable", "slowvarying"])
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--count", type=int, default=100_000)
    s.add_argument("--show", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("sweep", help="run a configured experiment")
    _add_overrides(s)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("fit", help="fit the sigma_min exponent from records")
    s.add_argument("--input", required=True)
    s.add_argument("--value", default="sigma_min")
    s.add_argument("--experiment")
    s.add_argument("--loglog", action="store_true")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("universality", help="Gaussian coupling and dilation checks")
    _add_overrides(s)
    s.add_argument("--dilation-trials", type=int, default=2)
    s.set_defaults(func=cmd_universality)

    s = sub.add_parser("polytope", help="inradius certificate against exact/grid values")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--N", type=int, default=20)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--instances", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--verbose", action="store_true")
    s.set_defaults(func=cmd_polytope)

    s = sub.add_parser("nets", help="build a sparse net and probe its covering")
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--epsilon", type=float, default=0.5)
    s.add_argument("--probes", type=int, default=100_000)
    s.add_argument("--budget", type=float, default=5e6)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_nets)

    s = sub.add_parser("report", help="summary table, fit and coverage from records")
    s.add_argument("--input", required=True)
    s.add_argument("--value", default="sigma_min")
    s.add_argument("--calibrate-n", type=int)
    s.add_argument("--min-coverage", type=float)
    s.set_defaults(func=cmd_report)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE
    except (OSError, ValueError, NetBudgetError, BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
