"""Registered experiments. Each maps (config, n, N, trial) to one TrialRecord.

A trial reads all its randomness from Streams(root_seed, n, N, trial), so
its record depends on nothing else.
"""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .. import rng as _rng
from ..decomposition import (WeightProfile, apply_weights_and_shift, assemble, decompose,
                             gaussian_surrogate, normalize)
from ..polytope import exact_inradius_2d
from ..spectra import singular_extremes
from ..tail_sampler import LOWER, UPPER, sample_matrix
from ..upper_bound import find_all_ones_columns, minor_upper_bound
from .records import TrialRecord


def _record(cfg, n, N, trial, regime, summary, **extras):
    return TrialRecord(
        experiment=cfg.experiment, n=int(n), N=int(N), alpha=float(cfg.law.alpha),
        regime=regime, seed=_rng.derive_seed(cfg.root_seed, n, N, trial),
        sigma_min=float(summary.sigma_min), sigma_max=float(summary.sigma_max),
        extras={"trial": int(trial), **extras},
    )


def _streams(cfg, n, N, trial):
    return _rng.Streams(cfg.root_seed, n, N, trial)


def scaling(cfg, n, N, trial):
    x = sample_matrix(cfg.law, _streams(cfg, n, N, trial), (N, n))
    s = singular_extremes(x, cfg.tolerance)
    return _record(cfg, n, N, trial, "direct", s, radius=s.sigma_min / math.sqrt(N))


def bai_yin(cfg, n, N, trial):
    x = _streams(cfg, n, N, trial).normals(_rng.GAUSS, (N, n))
    s = singular_extremes(x, cfg.tolerance)
    return _record(cfg, n, N, trial, "gaussian", s, ratio=s.sigma_min / math.sqrt(n))


def upper_bound(cfg, n, N, trial):
    scheme = cfg.scheme if cfg.scheme.regime == UPPER else replace(cfg.scheme, regime=UPPER)
    dec = decompose(cfg.law, scheme, n, N, _streams(cfg, n, N, trial))
    x = assemble(dec)
    s = singular_extremes(x, cfg.tolerance)
    a = cfg.law.alpha
    shape = n ** (1.0 / a) * math.log(n) ** ((a - 2.0) / (2.0 * a))
    extras = {"all_ones": len(find_all_ones_columns(dec.psi)), "upper_ratio": s.sigma_min / shape,
              "tau": dec.tau}
    if extras["all_ones"]:
        rep = minor_upper_bound(x, dec.psi, dec.small, alpha=a,
                                eps_tilde=dec.thresh.epsilon_tilde, base=dec.thresh.base,
                                tol=1e-8, delta=scheme.delta, C_u=scheme.C_u)
        extras.update(minor_norm=rep.minor_norm, bound_value=rep.bound_value,
                      predicate_holds=rep.predicate_holds,
                      sigma_below_minor=rep.sigma_min_below_minor)
    return _record(cfg, n, N, trial, UPPER, s, **extras)


def _coupling_once(cfg, scheme, n, N, streams):
    pair = normalize(decompose(cfg.law, scheme, n, N, streams))
    st = singular_extremes(pair.matrix, cfg.tolerance)
    sg = singular_extremes(gaussian_surrogate(pair, streams), cfg.tolerance)
    return pair, st, sg


def coupling(cfg, n, N, trial):
    scheme = cfg.scheme if cfg.scheme.regime == LOWER else replace(cfg.scheme, regime=LOWER)
    streams = _streams(cfg, n, N, trial)
    pair, st, sg = _coupling_once(cfg, scheme, n, N, streams)
    # the same uniforms under c' = c_factor * c, for paired comparisons
    scheme2 = replace(scheme, c=scheme.c * cfg.c_factor)
    pair2, st2, sg2 = _coupling_once(cfg, scheme2, n, N, streams)
    return _record(cfg, n, N, trial, LOWER, st,
                   sigma_min_g=sg.sigma_min, delta=abs(st.sigma_min - sg.sigma_min),
                   q=pair.q, q_theory=pair.q_theory, M=pair.M, c=scheme.c,
                   delta_c2=abs(st2.sigma_min - sg2.sigma_min), c2=scheme2.c,
                   q_c2=pair2.q)


def polytope(cfg, n, N, trial):
    x = sample_matrix(cfg.law, _streams(cfg, n, N, trial), (N, n))
    s = singular_extremes(x, cfg.tolerance)
    extras = {"radius": s.sigma_min / math.sqrt(N)}
    if n == 2:
        extras["exact_radius"] = exact_inradius_2d(x)
    return _record(cfg, n, N, trial, "direct", s, **extras)


def weighted(cfg, n, N, trial):
    streams = _streams(cfg, n, N, trial)
    x = sample_matrix(cfg.law, streams, (N, n))
    u = streams.uniforms(_rng.AUX, (N, n))
    lo, hi = cfg.weight_low, cfg.weight_high
    w = WeightProfile(lo + (hi - lo) * (1.0 - u), (lo, hi))
    b = np.full((N, n), cfg.shift_scale)  # rank one
    y = apply_weights_and_shift(x, w, b)
    s = singular_extremes(y, cfg.tolerance)
    raw = singular_extremes(x, cfg.tolerance)
    return _record(cfg, n, N, trial, "direct", s, sigma_min_raw=raw.sigma_min,
                   shift=cfg.shift_scale)


EXPERIMENTS = {
    "scaling": scaling,
    "bai_yin": bai_yin,
    "upper_bound": upper_bound,
    "coupling": coupling,
    "polytope": polytope,
    "weighted": weighted,
}
