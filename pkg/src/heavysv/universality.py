"""Matrix parameters for Gaussian universality and the sigma_min coupling experiments."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from . import rng as _rng
from .decomposition import NormalizedPair, decompose, gaussian_surrogate, normalize
from .spectra import dilation_spectrum, hausdorff_distance, operator_norm, singular_extremes
from .tail_sampler import LOWER, TailLaw, TruncationScheme


@dataclass(frozen=True)
class MatrixParams:
    sigma_param: float
    sigma_star: float
    r_param: float
    t_grid: tuple = ()


def matrix_params(pair: NormalizedPair | np.ndarray, q: float | None = None,
                  t_grid: Sequence[float] = ()) -> MatrixParams:
    """sigma, sigma_* and R for a matrix with independent centred entries.

    sigma^2 is the norm of the block diagonal E[(X - EX)^2] of the self-adjoint
    dilation, i.e. the larger of the maximal row and column sums of the
    variance profile; sigma_*^2 is the largest single variance; R is the a.s.
    entry bound q.
    """
    if isinstance(pair, NormalizedPair):
        v = np.asarray(pair.profile, dtype=float)
        q = pair.q if q is None else q
    else:
        v = np.asarray(pair, dtype=float)
        if q is None:
            raise ValueError("q is required with a bare profile")
    if v.size == 0 or np.any(v < 0):
        raise ValueError("profile must be a nonempty nonnegative array")
    rows = v.sum(axis=1).max()
    cols = v.sum(axis=0).max()
    return MatrixParams(float(math.sqrt(max(rows, cols))), float(math.sqrt(v.max())),
                        float(q), tuple(float(t) for t in t_grid))


def epsilon_bound(params: MatrixParams | None, n: int, N: int, M: float, q: float,
                  t: float, C: float = 1.0) -> float:
    """C M n^(-1/2) t^(1/2) + C M^(2/3) q^(1/3) t^(2/3) (N/n)^(1/3) + C q t."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return C * (M * n ** -0.5 * t ** 0.5
                + M ** (2.0 / 3.0) * q ** (1.0 / 3.0) * t ** (2.0 / 3.0) * (N / n) ** (1.0 / 3.0)
                + q * t)


def _quantile(x: np.ndarray, level: float) -> float:
    if not 0.0 < level <= 1.0:
        return float("nan")
    return float(np.quantile(x, level))


@dataclass(frozen=True)
class CouplingReport:
    deltas: np.ndarray
    t_grid: tuple
    levels: tuple  # 1 - 8 N e^(-t)
    quantiles: tuple  # empirical delta quantile at each level (nan if level <= 0)
    epsilon_curve: tuple  # eps(t) with constant C
    violations: int
    C: float
    c_hat: float  # smallest constant with every quantile <= c_hat * eps_1(t)
    median_delta: float
    median_pass: bool  # median delta <= eps(log 16N)
    sigma_min_t: np.ndarray = field(repr=False, default=None)
    sigma_min_g: np.ndarray = field(repr=False, default=None)
    q: float = float("nan")
    M: float = float("nan")


def coupling_delta(pair: NormalizedPair, streams: _rng.Streams):
    """(sigma_min(T), sigma_min(G)) for one pair and a fresh matched surrogate."""
    t_mat = pair.matrix
    g_mat = gaussian_surrogate(pair, streams)
    return singular_extremes(t_mat).sigma_min, singular_extremes(g_mat).sigma_min


def coupling_experiment(law: TailLaw, scheme: TruncationScheme, n: int, N: int,
                        trials: int, root_seed: int = 0,
                        t_grid: Sequence[float] | None = None,
                        C: float = 1.0) -> CouplingReport:
    """Compare sigma_min(T) with sigma_min(G) over trials with matched variance profiles.

    Trial k uses the streams (root_seed, n, N, k), so two schemes run with the
    same seed see the same underlying uniforms.
    """
    if scheme.regime != LOWER:
        raise ValueError("coupling experiment needs the lower regime")
    if t_grid is None:
        t_grid = [math.log(16 * N), math.log(80 * N), math.log(800 * N)]
    st = np.empty(trials)
    sg = np.empty(trials)
    qs, Ms = [], []
    for k in range(trials):
        streams = _rng.Streams(root_seed, n, N, k)
        pair = normalize(decompose(law, scheme, n, N, streams))
        st[k], sg[k] = coupling_delta(pair, streams)
        qs.append(pair.q)
        Ms.append(pair.M)
    return _coupling_report(np.abs(st - sg), st, sg, n, N, max(qs), max(Ms), t_grid, C)


def _coupling_report(deltas, st, sg, n, N, q, M, t_grid, C):
    levels = tuple(1.0 - 8.0 * N * math.exp(-t) for t in t_grid)
    quants = tuple(_quantile(deltas, lv) for lv in levels)
    eps1 = [epsilon_bound(None, n, N, M, q, t, 1.0) for t in t_grid]
    curve = tuple(C * e for e in eps1)
    viol = sum(1 for qu, e in zip(quants, curve) if not math.isnan(qu) and qu > e)
    ratios = [qu / e for qu, e in zip(quants, eps1) if not math.isnan(qu) and e > 0]
    med = float(np.median(deltas))
    return CouplingReport(
        deltas=deltas, t_grid=tuple(t_grid), levels=levels, quantiles=quants,
        epsilon_curve=curve, violations=viol, C=C,
        c_hat=max(ratios) if ratios else float("nan"),
        median_delta=med,
        median_pass=bool(med <= epsilon_bound(None, n, N, M, q, math.log(16 * N), C)),
        sigma_min_t=st, sigma_min_g=sg, q=q, M=M,
    )


# ---------------------------------------------------------------------------
# Hausdorff distance of dilation spectra

@dataclass(frozen=True)
class DilationComparison:
    d_h: float
    epsilon: float
    lambda_plus: tuple  # (T, G)
    lambda_minus: tuple
    sigma_min: tuple
    premise: bool  # d_H <= epsilon
    conclusions: bool  # both lambda inequalities and the 3 epsilon bound


def compare_dilations(t_mat, g_mat, epsilon: float, tol: float = 1e-9) -> DilationComparison:
    """Check that d_H <= eps forces the lambda_+/- inequalities and sigma_min(T) >= sigma_min(G) - 3 eps.

    tol is a relative slack for rounding in the eigensolver.
    """
    dt = dilation_spectrum(t_mat, epsilon)
    dg = dilation_spectrum(g_mat, epsilon)
    d_h = hausdorff_distance(dt.eigenvalues, dg.eigenvalues)
    st = singular_extremes(np.asarray(t_mat)).sigma_min
    sg = singular_extremes(np.asarray(g_mat)).sigma_min
    slack = tol * max(dt.lambda_plus, dg.lambda_plus, 1.0)
    ok = (dt.lambda_plus <= dg.lambda_plus + epsilon + slack
          and dt.lambda_minus >= dg.lambda_minus - epsilon - slack
          and st >= sg - 3.0 * epsilon - slack)
    return DilationComparison(d_h, epsilon, (dt.lambda_plus, dg.lambda_plus),
                              (dt.lambda_minus, dg.lambda_minus), (st, sg),
                              bool(d_h <= epsilon), bool(ok))


@dataclass(frozen=True)
class HausdorffReport:
    distances: np.ndarray
    epsilon: float
    premise_count: int
    implication_failures: int
    t_grid: tuple
    levels: tuple  # 1 - d e^(-t), d = 2(N + n)
    quantiles: tuple
    epsilon_curve: tuple
    comparisons: List[DilationComparison] = field(repr=False, default_factory=list)


def hausdorff_universality(pair: NormalizedPair, epsilon: float | None, trials: int,
                           streams: _rng.Streams, t_grid: Sequence[float] = (),
                           C: float = 1.0) -> HausdorffReport:
    """d_H between dilation spectra of T and independent matched surrogates G.

    With epsilon=None each trial uses epsilon = ||T - G||, which by Weyl's
    inequality makes the premise d_H <= epsilon hold, so the implication is
    exercised on every pair.
    """
    N, n = pair.shape
    t_mat = pair.matrix
    comps = []
    for k in range(trials):
        g_mat = gaussian_surrogate(pair, streams.child(k))
        eps = epsilon
        if eps is None:
            eps = max(operator_norm(t_mat - g_mat) * (1.0 + 1e-9), 1e-12)
        comps.append(compare_dilations(t_mat, g_mat, eps))
    dist = np.array([c.d_h for c in comps])
    d = 2 * (N + n)
    levels = tuple(1.0 - d * math.exp(-t) for t in t_grid)
    quants = tuple(_quantile(dist, lv) for lv in levels)
    curve = tuple(epsilon_bound(None, n, N, pair.M, pair.q, t, C) for t in t_grid)
    return HausdorffReport(
        distances=dist,
        epsilon=float("nan") if epsilon is None else float(epsilon),
        premise_count=sum(c.premise for c in comps),
        implication_failures=sum(1 for c in comps if c.premise and not c.conclusions),
        t_grid=tuple(t_grid), levels=levels, quantiles=quants, epsilon_curve=curve,
        comparisons=comps,
    )
