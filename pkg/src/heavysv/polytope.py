"""Inradius of the symmetric polytope conv(+-rows of X): sigma_min certificate and small-n oracles.

The inradius equals min over unit z of max_j |<z, x_j>|, the smallest value
of the support function. Since ||Xz||_inf >= ||Xz||_2 / sqrt(N), the ball of
radius sigma_min(X) / sqrt(N) always fits inside.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .spectra import singular_extremes

SIGMA_MIN_CERTIFICATE = "sigma_min_certificate"
EXACT_SWEEP_2D = "exact_sweep_2d"
GRID_REFINE = "grid_refine"


@dataclass(frozen=True)
class InradiusCertificate:
    radius: float
    method: str
    sigma_min_used: float
    N: int
    n: int


def certificate(x) -> InradiusCertificate:
    x = np.asarray(x, dtype=float)
    N, n = x.shape
    if N < n:
        raise ValueError(f"need N >= n, got {N} x {n}")
    s = singular_extremes(x).sigma_min
    return InradiusCertificate(s / math.sqrt(N), SIGMA_MIN_CERTIFICATE, s, N, n)


def support_min_value(x, z) -> float:
    """max_j |<z, x_j>| for unit z."""
    return float(np.max(np.abs(np.asarray(x, dtype=float) @ z)))


def exact_inradius_2d(rows) -> float:
    """Exact min over unit z in the plane of max_j |<z, r_j>|.

    Each |<z(theta), r_j>| is concave between its zeros, so the minimum of the
    upper envelope sits at a zero of one piece or where two pieces cross,
    i.e. at z perpendicular to r_j, r_j - r_k or r_j + r_k.
    """
    r = np.asarray(rows, dtype=float).reshape(-1, 2)
    r = r[np.any(r != 0, axis=1)]
    if len(r) == 0:
        return 0.0
    cand = [r]
    if len(r) > 1:
        i, j = np.triu_indices(len(r), 1)
        cand += [r[i] - r[j], r[i] + r[j]]
    c = np.vstack(cand)
    c = c[np.any(c != 0, axis=1)]
    z = np.column_stack([-c[:, 1], c[:, 0]])
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return float(np.min(np.max(np.abs(z @ r.T), axis=1)))


class BudgetError(ValueError):
    pass


def _pattern_directions(n):
    eye = np.eye(n)
    dirs = [eye, -eye]
    for i, j in itertools.combinations(range(n), 2):
        for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            v = np.zeros(n)
            v[i], v[j] = si, sj
            dirs.append(v[None, :] / math.sqrt(2.0))
    return np.vstack(dirs)


def grid_refine_search(x, budget: int = 2_000_000, starts: int = 256,
                       polish: int = 8, min_step: float = 1e-10):
    """Upper bound on the inradius by multistart pattern search on the sphere.

    Returns (value, z, mesh) where mesh is the final step length. Every
    evaluated z is a feasible unit vector, so the value never drops below the
    true inradius.
    """
    x = np.asarray(x, dtype=float)
    N, n = x.shape
    if n > 6:
        raise BudgetError(f"grid refinement limited to n <= 6, got n={n}")
    dirs = _pattern_directions(n)
    sweeps = int(math.ceil(math.log2(1.0 / min_step))) + 1
    est = (2 * n + 2 ** (n - 1) + starts + polish * sweeps * 4 * len(dirs)) * N
    if est > budget * max(N, 1):
        raise BudgetError(f"estimated {est / N:.3g} evaluations exceed budget {budget}")
    pts = [np.eye(n)]
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=n - 1)))
    pts.append(np.column_stack([np.ones(len(signs)), signs]) / math.sqrt(n))
    gen = _rng.make_generator(0, n, _rng.AUX)
    g = gen.standard_normal((starts, n))
    pts.append(g / np.linalg.norm(g, axis=1, keepdims=True))
    pts = np.vstack(pts)
    vals = np.max(np.abs(pts @ x.T), axis=1)
    best_val, best_z, mesh = math.inf, None, 1.0
    for k in np.argsort(vals, kind="stable")[:polish]:
        z = pts[k].copy()
        f = vals[k]
        step = 0.25
        while step >= min_step:
            trial = z[None, :] + step * dirs
            trial /= np.linalg.norm(trial, axis=1, keepdims=True)
            tv = np.max(np.abs(trial @ x.T), axis=1)
            i = int(np.argmin(tv))
            if tv[i] < f:
                z, f = trial[i], float(tv[i])
            else:
                step *= 0.5
        if f < best_val:
            best_val, best_z, mesh = f, z, step * 2
    return float(best_val), best_z, mesh


def grid_refine_inradius(x, budget: int = 2_000_000) -> float:
    return grid_refine_search(x, budget)[0]
