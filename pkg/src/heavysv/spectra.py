"""Dense spectral kernel.

Singular values go through Householder reduction to upper bidiagonal form
followed by implicit-shift QR sweeps on the bidiagonal, both compiled with
numba. Nothing here forms X^T X for the smallest singular value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numba
import numpy as np

EPS = np.finfo(float).eps
TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class SpectralSummary:
    sigma_min: float
    sigma_max: float
    all_singular_values: Optional[np.ndarray]
    iterations: int
    residual: float


# ---------------------------------------------------------------------------
# Householder bidiagonalization

@numba.njit(cache=True)
def _reflector(x0, sig):
    """Householder reflector for (x0, x_1..) with sig = sum x_i^2, i >= 1.

    Returns (alpha, tau, scale): H x = alpha e_1, v = (1, x_i * scale).
    """
    if sig == 0.0:
        return x0, 0.0, 0.0
    alpha = math.sqrt(x0 * x0 + sig)
    if x0 > 0:
        alpha = -alpha
    return alpha, (alpha - x0) / alpha, 1.0 / (x0 - alpha)


@numba.njit(cache=True)
def _bidiagonalize(a):
    """Overwrite the m x n array a (m >= n) and return its bidiagonal (d, e).

    Each step applies the pending left reflector and the new right reflector
    in two fused passes over the trailing block, so the matrix is streamed
    twice per column rather than four times.
    """
    m, n = a.shape
    d = np.zeros(n)
    e = np.zeros(max(n - 1, 0))
    v = np.zeros(m)
    w = np.zeros(n)
    u = np.zeros(n)
    z = np.zeros(m)
    sig = 0.0
    for i in range(1, m):
        sig += a[i, 0] * a[i, 0]
    alpha, taul, sc = _reflector(a[0, 0], sig)
    d[0] = alpha
    v[0] = 1.0
    for i in range(1, m):
        v[i] = a[i, 0] * sc
    for i in range(m):
        vi = v[i]
        for j in range(1, n):
            w[j] += vi * a[i, j]
    for k in range(n - 1):
        # w = v^T A[k:, k+1:] for the pending left reflector (v, taul)
        for j in range(k + 1, n):
            a[k, j] -= taul * w[j]
        sig = 0.0
        for j in range(k + 2, n):
            sig += a[k, j] * a[k, j]
        alpha, taur, sc = _reflector(a[k, k + 1], sig)
        e[k] = alpha
        u[k + 1] = 1.0
        for j in range(k + 2, n):
            u[j] = a[k, j] * sc
        # pass 1: left update of the remaining rows, accumulating z = taur * A u
        for i in range(k + 1, m):
            t = taul * v[i]
            s = 0.0
            for j in range(k + 1, n):
                aij = a[i, j] - t * w[j]
                a[i, j] = aij
                s += aij * u[j]
            z[i] = taur * s
        k1 = k + 1
        for i in range(k1, m):
            a[i, k1] -= z[i] * u[k1]
        sig = 0.0
        for i in range(k1 + 1, m):
            sig += a[i, k1] * a[i, k1]
        alpha, taul, sc = _reflector(a[k1, k1], sig)
        d[k1] = alpha
        v[k1] = 1.0
        for i in range(k1 + 1, m):
            v[i] = a[i, k1] * sc
        for j in range(k1 + 1, n):
            w[j] = 0.0
        # pass 2: right update of the trailing block fused with the next v^T A
        for i in range(k1, m):
            zi = z[i]
            vi = v[i]
            for j in range(k1 + 1, n):
                aij = a[i, j] - zi * u[j]
                a[i, j] = aij
                w[j] += vi * aij
    return d, e


# ---------------------------------------------------------------------------
# implicit-shift QR on the bidiagonal

@numba.njit(cache=True)
def _rot(f, g):
    """Plane rotation (c, s, r) with [c s; -s c] [f; g] = [r; 0]."""
    if g == 0.0:
        return 1.0, 0.0, f
    if f == 0.0:
        return 0.0, 1.0, g
    r = math.hypot(f, g)
    return f / r, g / r, r


@numba.njit(cache=True)
def _sv2x2(f, g, h):
    """Singular values (small, large) of [[f, g], [0, h]] without overflow."""
    fa, ga, ha = abs(f), abs(g), abs(h)
    fhmn, fhmx = min(fa, ha), max(fa, ha)
    if fhmn == 0.0:
        if fhmx == 0.0:
            return 0.0, ga
        big, small = max(fhmx, ga), min(fhmx, ga)
        return 0.0, big * math.sqrt(1.0 + (small / big) ** 2)
    if ga < fhmx:
        as_ = 1.0 + fhmn / fhmx
        at = (fhmx - fhmn) / fhmx
        au = (ga / fhmx) ** 2
        c = 2.0 / (math.sqrt(as_ * as_ + au) + math.sqrt(at * at + au))
        return fhmn * c, fhmx / c
    au = fhmx / ga
    if au == 0.0:
        return (fhmn * fhmx) / ga, ga
    as_ = 1.0 + fhmn / fhmx
    at = (fhmx - fhmn) / fhmx
    c = 1.0 / (math.sqrt(1.0 + (as_ * au) ** 2) + math.sqrt(1.0 + (at * au) ** 2))
    return 2.0 * (fhmn * c) * au, ga / (c + c)


@numba.njit(cache=True)
def _reverse_block(d, e, ll, hi):
    # P B^T P of an upper bidiagonal block is upper bidiagonal with reversed entries
    i, j = ll, hi
    while i < j:
        d[i], d[j] = d[j], d[i]
        i += 1
        j -= 1
    i, j = ll, hi - 1
    while i < j:
        e[i], e[j] = e[j], e[i]
        i += 1
        j -= 1


@numba.njit(cache=True)
def _bidiagonal_svd(d, e, rel):
    """Singular values of the bidiagonal (d, e), in place; returns (iters, resid, ok).

    Off-diagonals are dropped under the relative test |e_j| <= rel * mu_j,
    with mu the running lower estimate of the block's smallest singular
    value, so small singular values keep relative accuracy. When the shift is
    negligible against the top of the block a zero-shift sweep is used.
    """
    n = d.shape[0]
    if n == 1:
        d[0] = abs(d[0])
        return 0, 0.0, True
    mu = abs(d[0])
    sminoa = mu
    for i in range(1, n):
        if mu == 0.0:
            break
        mu = abs(d[i]) * (mu / (mu + abs(e[i - 1])))
        sminoa = min(sminoa, mu)
    maxit = 6 * n * n
    thresh = max(rel * sminoa / math.sqrt(n), maxit * TINY)
    iters = 0
    resid = 0.0
    hi = n - 1
    oldll, oldhi = -1, -1
    while hi > 0:
        if iters > maxit:
            return iters, resid, False
        if abs(d[hi]) <= thresh:
            d[hi] = 0.0
        ll = hi
        while ll > 0:
            if abs(e[ll - 1]) <= thresh:
                e[ll - 1] = 0.0
                break
            if abs(d[ll - 1]) <= thresh:
                d[ll - 1] = 0.0
            ll -= 1
        if ll == hi:
            hi -= 1
            continue
        # an exactly zero diagonal splits the block after a rotation chase
        zk = -1
        for k in range(ll, hi + 1):
            if d[k] == 0.0:
                zk = k
                break
        if zk >= 0:
            if zk < hi:
                x = e[zk]
                e[zk] = 0.0
                for j in range(zk + 1, hi + 1):
                    c, s, r = _rot(d[j], x)
                    d[j] = r
                    if j < hi:
                        x = -s * e[j]
                        e[j] = c * e[j]
            else:
                x = e[hi - 1]
                e[hi - 1] = 0.0
                for j in range(hi - 1, ll - 1, -1):
                    c, s, r = _rot(d[j], x)
                    d[j] = r
                    if j > ll:
                        x = -s * e[j - 1]
                        e[j - 1] = c * e[j - 1]
            iters += 1
            continue
        if ll != oldll or hi != oldhi:
            # chase toward the smaller end, where convergence happens
            if abs(d[ll]) < abs(d[hi]):
                _reverse_block(d, e, ll, hi)
            oldll, oldhi = ll, hi
        deflated = False
        mu = abs(d[ll])
        for j in range(ll, hi):
            if abs(e[j]) <= rel * mu:
                resid = max(resid, abs(e[j]) / mu if mu > 0 else 0.0)
                e[j] = 0.0
                deflated = True
                break
            mu = abs(d[j + 1]) * (mu / (mu + abs(e[j])))
        if deflated:
            continue
        if hi == ll + 1:
            smin, smax = _sv2x2(d[ll], e[ll], d[hi])
            d[ll] = smax
            d[hi] = smin
            e[ll] = 0.0
            hi -= 2
            continue
        sll = abs(d[ll])
        shift, _ = _sv2x2(d[hi - 1], e[hi - 1], d[hi])
        if sll > 0.0 and (shift / sll) ** 2 < EPS:
            shift = 0.0
        if shift == 0.0:
            cs = 1.0
            oldcs = 1.0
            oldsn = 0.0
            for i in range(ll, hi):
                cs, sn, r = _rot(d[i] * cs, e[i])
                if i > ll:
                    e[i - 1] = oldsn * r
                oldcs, oldsn, d[i] = _rot(oldcs * r, d[i + 1] * sn)
            h = d[hi] * cs
            d[hi] = h * oldcs
            e[hi - 1] = h * oldsn
        else:
            sign = 1.0 if d[ll] >= 0 else -1.0
            f = (sll - shift) * (sign + shift / d[ll])
            g = e[ll]
            for i in range(ll, hi):
                cr, sr, r = _rot(f, g)
                if i > ll:
                    e[i - 1] = r
                f = cr * d[i] + sr * e[i]
                e[i] = cr * e[i] - sr * d[i]
                g = sr * d[i + 1]
                d[i + 1] = cr * d[i + 1]
                cl, sl, r = _rot(f, g)
                d[i] = r
                f = cl * e[i] + sl * d[i + 1]
                d[i + 1] = cl * d[i + 1] - sl * e[i]
                if i < hi - 1:
                    g = sl * e[i + 1]
                    e[i + 1] = cl * e[i + 1]
            e[hi - 1] = f
        iters += hi - ll
    for i in range(n):
        d[i] = abs(d[i])
    return iters, resid, True


def _check_matrix(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {x.shape}")
    if x.shape[1] == 0 or x.shape[0] == 0:
        raise ValueError("matrix has an empty dimension")
    if not np.all(np.isfinite(x)):
        raise ValueError("matrix has non-finite entries")
    return x


def singular_values(x) -> np.ndarray:
    """All min(N, n) singular values, descending."""
    return singular_extremes(x, full=True).all_singular_values


def singular_extremes(x, tol: float = 1e-10, full: bool = False) -> SpectralSummary:
    """Extreme singular values of a tall N x n matrix (N >= n >= 1)."""
    x = _check_matrix(x)
    N, n = x.shape
    if N < n:
        raise ValueError(f"need N >= n, got {N} x {n}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    # power-of-two scaling to max |x| in [1/2, 1): exact, and keeps the
    # squared sums in the reflectors clear of underflow and overflow
    amax = float(np.abs(x).max())
    k = math.frexp(amax)[1] if amax > 0 else 0
    d, e = _bidiagonalize(np.ldexp(x, -k, order="C"))
    rel = max(8.0 * EPS, min(1e-3 * tol, 1e-8))
    iters, resid, ok = _bidiagonal_svd(d, e, rel)
    if not ok:
        raise RuntimeError("bidiagonal QR did not converge")
    s = np.ldexp(np.sort(d)[::-1], k)
    return SpectralSummary(
        sigma_min=float(s[-1]),
        sigma_max=float(s[0]),
        all_singular_values=s if full else None,
        iterations=int(iters),
        residual=float(resid),
    )


def operator_norm(x, tol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Largest singular value by power iteration on x^T x.

    Starts from the normalized all-ones vector; if that lies in the kernel,
    from the coordinate of the heaviest column. Stops when two successive
    Rayleigh quotients agree to relative tol and the geometric extrapolation
    of the remaining steps is below tol as well.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return 0.0
    if not np.all(np.isfinite(x)):
        raise ValueError("matrix has non-finite entries")
    if x.ndim == 1:
        return float(np.linalg.norm(x))
    v = np.ones(x.shape[1]) / math.sqrt(x.shape[1])
    xv = x @ v
    if not np.any(xv):
        cols = np.einsum("ij,ij->j", x, x)
        if not np.any(cols):
            return 0.0
        v = np.zeros(x.shape[1])
        v[int(np.argmax(cols))] = 1.0
        xv = x @ v
    lam = float(xv @ xv)
    prev_step = math.inf
    for _ in range(max_iter):
        w = x.T @ xv
        nw = np.linalg.norm(w)
        if nw == 0.0:
            break
        v = w / nw
        xv = x @ v
        new = float(xv @ xv)
        step = abs(new - lam)
        lam = new
        if step <= tol * new:
            # steps shrink geometrically; stop once the remaining tail is below tol too
            ratio = step / prev_step if prev_step > 0 else 0.0
            if ratio < 1.0 and step * ratio / (1.0 - ratio) <= tol * new:
                break
        prev_step = step
    return math.sqrt(lam)


def distance_to_subspace(v, basis: Sequence) -> float:
    """Euclidean distance from v to span(basis), by twice-applied modified Gram-Schmidt."""
    v = np.asarray(v, dtype=float)
    q = []
    for b in basis:
        b = np.array(b, dtype=float)
        if not np.all(np.isfinite(b)):
            raise ValueError("basis vector has non-finite entries")
        nb = np.linalg.norm(b)
        if nb == 0.0:
            continue
        for _ in range(2):
            for qi in q:
                b -= (qi @ b) * qi
        nr = np.linalg.norm(b)
        if nr <= 1e-12 * nb:
            continue  # numerically dependent
        q.append(b / nr)
    r = v.copy()
    for _ in range(2):
        for qi in q:
            r -= (qi @ r) * qi
    return float(np.linalg.norm(r))


# ---------------------------------------------------------------------------
# dilation

@dataclass(frozen=True)
class DilationSpectrum:
    eigenvalues: np.ndarray
    lambda_plus: float
    lambda_minus: float
    epsilon: float


def dilation_matrix(h, epsilon: float) -> np.ndarray:
    """Four-block self-adjoint dilation of the N x n matrix h.

    Block sizes are (n, N, N, n). The first block row carries h^T and
    A^(1/2) = 2 * epsilon * I_n, so that h^T h + A is n x n and its square
    root has eigenvalues sqrt(s_i^2 + 4 epsilon^2).
    """
    h = np.asarray(h, dtype=float)
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    N, n = h.shape
    dim = 2 * (N + n)
    m = np.zeros((dim, dim))
    r2 = n + N  # start of third block
    r3 = n + 2 * N  # start of fourth block
    m[:n, r2:r3] = h.T
    m[r2:r3, :n] = h
    root = 2.0 * epsilon * np.eye(n)
    m[:n, r3:] = root
    m[r3:, :n] = root
    return m


def dilation_spectrum(h, epsilon: float) -> DilationSpectrum:
    """Eigenvalues of the dilation plus the extreme eigenvalues of (h^T h + A)^(1/2).

    The nonzero eigenvalues are all at least 2 * epsilon in modulus, so
    lambda_minus is read off as the smallest eigenvalue above epsilon.
    """
    m = dilation_matrix(h, epsilon)
    ev = np.linalg.eigvalsh(m)
    pos = ev[ev > epsilon]
    return DilationSpectrum(
        eigenvalues=ev,
        lambda_plus=float(ev[-1]),
        lambda_minus=float(pos[0]) if pos.size else float("nan"),
        epsilon=float(epsilon),
    )


def hausdorff_distance(a, b) -> float:
    """Hausdorff distance between two finite sets of reals (two-pointer sweep)."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("both sets must be nonempty")
    return max(_directed(a, b), _directed(b, a))


def _directed(a, b) -> float:
    # sup over a of the distance to the nearest point of b; a and b sorted
    worst = 0.0
    j = 0
    nb = len(b)
    for x in a:
        while j + 1 < nb and b[j + 1] <= x:
            j += 1
        dist = abs(x - b[j])
        if j + 1 < nb:
            dist = min(dist, abs(b[j + 1] - x))
        worst = max(worst, dist)
    return float(worst)
