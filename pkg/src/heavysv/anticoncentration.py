"""Levy concentration, Rogozin and projection checks, sphere classes and sparse nets."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from . import rng as _rng

Sampler = Callable[[np.random.Generator, int], np.ndarray]


@dataclass(frozen=True)
class ConcentrationEstimate:
    h: float
    q_hat: float
    sample_size: int
    std_error: float


def window_counts(s: np.ndarray, h: float) -> np.ndarray:
    """For sorted s, the number of points in [s_i, s_i + 2h] for each i."""
    right = np.searchsorted(s, s + 2.0 * h, side="right")
    return right - np.arange(len(s))


def levy_concentration(samples, h: float) -> ConcentrationEstimate:
    """Empirical sup over lambda of P(|xi - lambda| <= h).

    A closed window of length 2h holding the most points can always be slid
    right until its left end sits on a sample, so only windows starting at
    samples need checking.
    """
    s = np.sort(np.asarray(samples, dtype=float).ravel())
    k = len(s)
    if k == 0:
        raise ValueError("empty sample")
    if not h > 0:
        raise ValueError("h must be positive")
    q = float(window_counts(s, h).max()) / k
    return ConcentrationEstimate(h, q, k, math.sqrt(q * (1.0 - q) / k))


def uniform_sampler(lo: float = 0.0, hi: float = 1.0) -> Sampler:
    return lambda gen, size: gen.uniform(lo, hi, size)


# ---------------------------------------------------------------------------
# Rogozin-type inequality

@dataclass(frozen=True)
class RogozinReport:
    h: float
    lhs: float  # Q(sum xi_j, h)
    bracket: float  # h (sum (1 - Q(xi_j, h_j)) h_j^2)^(-1/2)
    c_hat: float  # lhs / bracket
    component_q: tuple
    trials: int


def rogozin_check(components: Sequence[Tuple[Sampler, float]], h: float, trials: int,
                  root_seed: int = 0) -> RogozinReport:
    """Monte Carlo estimates of both sides of the Rogozin bound and their ratio."""
    if not components:
        raise ValueError("need at least one component")
    if h < max(hj for _, hj in components):
        raise ValueError("h must be at least max h_j")
    total = np.zeros(trials)
    qs = []
    for j, (draw, hj) in enumerate(components):
        # separate streams for the sum and for each component's own Q estimate
        x = np.asarray(draw(_rng.make_generator(root_seed, j, 0), trials), dtype=float)
        total += x
        own = np.asarray(draw(_rng.make_generator(root_seed, j, 1), trials), dtype=float)
        qs.append(levy_concentration(own, hj).q_hat)
    lhs = levy_concentration(total, h).q_hat
    weight = sum((1.0 - qj) * hj * hj for qj, (_, hj) in zip(qs, components))
    bracket = h / math.sqrt(weight) if weight > 0 else math.inf
    return RogozinReport(h, lhs, bracket, lhs / bracket, tuple(qs), trials)


# ---------------------------------------------------------------------------
# projections of random vectors

@dataclass(frozen=True)
class ProjectionReport:
    m: int
    d: int
    ell: int
    radius: float  # h sqrt(d) / ell
    q_hat: float  # sample-centred ball concentration of Proj_E X
    bound: float  # (C / sqrt(ell tau))^(d / ell), C = 1
    coord_q: float  # empirical max_i Q(X_i, h)
    tau: float


def ball_concentration(points: np.ndarray, radius: float) -> float:
    """Largest fraction of points in a closed ball of given radius centred at one of them."""
    sq = np.einsum("ij,ij->i", points, points)
    best = 0
    for start in range(0, len(points), 512):
        blk = points[start:start + 512]
        d2 = sq[start:start + 512, None] + sq[None, :] - 2.0 * blk @ points.T
        best = max(best, int(np.max(np.sum(d2 <= radius * radius * (1 + 1e-12), axis=1))))
    return best / len(points)


def random_frame(gen: np.random.Generator, m: int, d: int) -> np.ndarray:
    """Orthonormal m x d frame from a Gaussian matrix."""
    q, r = np.linalg.qr(gen.standard_normal((m, d)))
    return q * np.sign(np.diag(r))


def projection_anticoncentration(coords: Sampler, h: float, tau: float, m: int, d: int,
                                 ell: int, trials: int, root_seed: int = 0,
                                 C: float = 1.0) -> ProjectionReport:
    """Concentration of the projection of X (i.i.d. coordinates) onto a random d-plane."""
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    if not 1 <= d <= m:
        raise ValueError("need 1 <= d <= m")
    gen = _rng.make_generator(root_seed, m, d, ell, _rng.AUX)
    x = np.asarray(coords(gen, (trials, m)), dtype=float).reshape(trials, m)
    coord_q = max(levy_concentration(x[:, i], h).q_hat for i in range(m))
    if coord_q > 1.0 - tau:
        raise ValueError(f"coordinates too concentrated: Q(X_i, h) = {coord_q:.4f} > 1 - tau")
    frame = np.eye(m)[:, :d] if d == m else random_frame(gen, m, d)
    radius = h * math.sqrt(d) / ell
    q = ball_concentration(x @ frame, radius)
    return ProjectionReport(m, d, ell, radius, q, (C / math.sqrt(ell * tau)) ** (d / ell),
                            coord_q, tau)


def discrete_concentration_bounds(values, probs, frame: np.ndarray, radius: float):
    """Exhaustive bounds on sup_y P(|Proj X - y| <= radius) for X with i.i.d. discrete coordinates.

    Every ball of the given radius that holds some atom lies inside the ball of
    twice the radius around that atom, so atom-centred balls of radius r and
    2r bracket the supremum.
    """
    values = np.asarray(values, dtype=float)
    probs = np.asarray(probs, dtype=float)
    m = frame.shape[0]
    atoms = np.array(list(itertools.product(values, repeat=m)))
    w = np.prod(np.array(list(itertools.product(probs, repeat=m))), axis=1)
    pts = atoms @ frame
    sq = np.einsum("ij,ij->i", pts, pts)
    d2 = sq[:, None] + sq[None, :] - 2.0 * pts @ pts.T
    lower = float(np.max((d2 <= radius ** 2 * (1 + 1e-12)) @ w))
    upper = float(np.max((d2 <= 4 * radius ** 2 * (1 + 1e-12)) @ w))
    return lower, upper


# ---------------------------------------------------------------------------
# sphere decomposition

PEAKY, ALMOST_SPARSE, GENERIC = "peaky", "almost_sparse", "generic"


@dataclass(frozen=True)
class SphereClass:
    kind: str
    witness: Tuple[int, ...]
    witness_norm: float  # ||y chi_J||
    witness_sup: float  # ||y chi_J||_inf
    ok: bool  # witness satisfies its class requirements


def classify_sphere_vector(y, theta: float, m: int, N: int) -> SphereClass:
    """Peaky, almost m-sparse, or generic with a greedy capped witness set."""
    y = np.asarray(y, dtype=float).ravel()
    n = len(y)
    if abs(np.linalg.norm(y) - 1.0) > 1e-10:
        raise ValueError("y must be a unit vector")
    a = np.abs(y)
    order = np.argsort(-a, kind="stable")
    if a[order[0]] >= theta:
        j = int(order[0])
        return SphereClass(PEAKY, (j,), float(a[j]), float(a[j]), True)
    top = order[:m]
    top_norm = float(np.linalg.norm(y[top]))
    if top_norm >= 0.5:
        return SphereClass(ALMOST_SPARSE, tuple(sorted(int(i) for i in top)), top_norm,
                           float(a[top].max()), True)
    cap = 1.0 / math.floor(N ** 0.25)
    allowed = [int(i) for i in order if a[i] <= cap][:m]
    sub = y[allowed] if allowed else np.zeros(0)
    norm = float(np.linalg.norm(sub))
    sup = float(np.max(np.abs(sub))) if allowed else 0.0
    ok = len(allowed) <= m and norm >= 0.5 * math.sqrt(m / n) and sup <= cap
    return SphereClass(GENERIC, tuple(sorted(allowed)), norm, sup, bool(ok))


# ---------------------------------------------------------------------------
# nets of sparse vectors

class NetBudgetError(ValueError):
    pass


def net_size_estimate(n: int, m: int, epsilon: float) -> float:
    return math.comb(n, m) * (2.0 * math.sqrt(m) / epsilon) ** m


def sparse_net(n: int, m: int, epsilon: float, budget: float = 5e6) -> np.ndarray:
    """m-sparse vectors of the unit ball on a grid of pitch epsilon / sqrt(m).

    For an m-sparse unit y, truncating each coordinate toward zero onto the
    grid gives a net point y' with |y_i - y'_i| < pitch on its support and
    y' inside the ball, so ||y chi_supp(y') - y'|| < epsilon.
    """
    if not (n >= m >= 1):
        raise ValueError("need n >= m >= 1")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    est = net_size_estimate(n, m, epsilon)
    if est > budget:
        raise NetBudgetError(f"net would have about {est:.3g} points, budget {budget:.3g}")
    pitch = epsilon / math.sqrt(m)
    kmax = int(math.floor(1.0 / pitch))
    levels = pitch * np.arange(-kmax, kmax + 1)
    cell = np.array(list(itertools.product(levels, repeat=m)))
    cell = cell[np.einsum("ij,ij->i", cell, cell) <= 1.0 + 1e-12]
    out = []
    for supp in itertools.combinations(range(n), m):
        blk = np.zeros((len(cell), n))
        blk[:, supp] = cell
        out.append(blk)
    net = np.unique(np.vstack(out), axis=0)
    return net


@dataclass(frozen=True)
class CoveringReport:
    probes: int
    max_distance: float  # upper bound on the covering distance over all probes
    uncovered: int
    epsilon: float


def random_sparse_probes(gen: np.random.Generator, n: int, m: int, count: int) -> np.ndarray:
    """Unit vectors with exactly m nonzero coordinates on uniformly random supports."""
    out = np.zeros((count, n))
    vals = gen.standard_normal((count, m))
    vals /= np.linalg.norm(vals, axis=1, keepdims=True)
    keys = gen.random((count, n))
    supp = np.argsort(keys, axis=1)[:, :m]
    np.put_along_axis(out, supp, vals, axis=1)
    return out


def check_covering(net: np.ndarray, probes: np.ndarray, m: int, epsilon: float) -> CoveringReport:
    """Search the net for each probe y and bound min ||y chi_supp(y') - y'||.

    Net points whose support sits inside an m-set S containing supp(y) are
    searched with a KD-tree over the S coordinates; the distance found there
    is never below the criterion distance, so a pass certifies coverage.
    """
    n = net.shape[1]
    probes = np.atleast_2d(probes)
    net_supp = net != 0
    dist = np.full(len(probes), np.inf)
    # assign every probe an m-set containing its support
    groups = {}
    for k, y in enumerate(probes):
        s = list(np.flatnonzero(y))
        if len(s) > m:
            raise ValueError("probe is not m-sparse")
        rest = [i for i in range(n) if i not in s]
        groups.setdefault(tuple(sorted(s + rest[:m - len(s)])), []).append(k)
    for S, idx in groups.items():
        inside = ~np.any(net_supp[:, [i for i in range(n) if i not in S]], axis=1)
        tree = cKDTree(net[inside][:, list(S)])
        dd, _ = tree.query(probes[idx][:, list(S)])
        dist[idx] = dd
    worst = float(dist.max())
    return CoveringReport(len(probes), worst, int(np.sum(dist > epsilon)), epsilon)
