"""Batched multi-start local minimisation on the sphere of R^D.

The objectives used in this package are smooth, scale invariant ratios that
are only available as function values.  Every start is refined by a
quasi-Newton (BFGS) iteration whose gradients come from central differences,
with a backtracking line search evaluated as one batch.  All starts advance
together so a single objective call covers the difference stencil (or the
line search) of every active start.  Iterates are renormalised to the unit
sphere; infeasible points are reported by the objective as ``+inf``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

Objective = Callable[[np.ndarray], np.ndarray]

_FD_STEP = 1e-6
_MAX_STEP = 0.5
_ALPHAS = 2.0 ** -np.arange(0, 10)
_GRAD_TOL = 1e-11


@dataclass
class SearchResult:
    points: np.ndarray
    values: np.ndarray
    converged: np.ndarray
    iterations: int


def _fd_gradients(fun, Z, f):
    b, D = Z.shape
    E = np.eye(D) * _FD_STEP
    stencil = np.concatenate([Z[:, None, :] + E, Z[:, None, :] - E], axis=1)
    fs = np.asarray(fun(stencil.reshape(-1, D)), dtype=float).reshape(b, 2 * D)
    g = (fs[:, :D] - fs[:, D:]) / (2 * _FD_STEP)
    return np.where(np.isfinite(g), g, np.nan)


def quasi_newton_search(
    fun: Objective,
    starts: np.ndarray,
    *,
    max_iters: int = 500,
    step_tol: float = 1e-10,
    value_tol: float = 1e-8,
) -> SearchResult:
    """Minimise ``fun`` from every row of ``starts``.

    A start is converged when its accepted step is shorter than
    ``step_tol``, when it improves ``f`` by less than ``value_tol``, or when
    its difference gradient vanishes.  Starts whose stencil leaves the
    feasible set are stopped (not converged).
    """
    Z = np.array(starts, dtype=float)
    Z /= np.linalg.norm(Z, axis=1, keepdims=True)
    B, D = Z.shape
    f = np.asarray(fun(Z), dtype=float)
    H = np.broadcast_to(np.eye(D), (B, D, D)).copy()
    fresh = np.ones(B, dtype=bool)  # H is still the identity
    active = np.isfinite(f)
    converged = np.zeros(B, dtype=bool)
    g = np.zeros((B, D))
    if active.any():
        g[active] = _fd_gradients(fun, Z[active], f[active])

    it = 0
    for it in range(1, max_iters + 1):
        bad = active & np.any(np.isnan(g), axis=1)
        active &= ~bad
        flat = active & (np.linalg.norm(g, axis=1) < _GRAD_TOL)
        converged |= flat
        active &= ~flat
        idx = np.flatnonzero(active)
        if idx.size == 0:
            it -= 1
            break

        gi = g[idx]
        d = -np.einsum("bij,bj->bi", H[idx], gi)
        uphill = np.einsum("bi,bi->b", d, gi) >= 0
        if uphill.any():
            H[idx[uphill]] = np.eye(D)
            fresh[idx[uphill]] = True
            d[uphill] = -gi[uphill]
        dn = np.linalg.norm(d, axis=1, keepdims=True)
        d *= np.minimum(1.0, _MAX_STEP / dn)

        trial = Z[idx, None, :] + _ALPHAS[None, :, None] * d[:, None, :]
        ft = np.asarray(fun(trial.reshape(-1, D)), dtype=float).reshape(idx.size, -1)
        ft = np.where(np.isnan(ft), np.inf, ft)
        j = np.argmin(ft, axis=1)
        fbest = ft[np.arange(idx.size), j]
        ok = fbest < f[idx]

        # failed line search: retry from steepest descent once, else stop
        fail = idx[~ok]
        stop = fresh[fail]
        converged[fail[stop]] = True
        active[fail[stop]] = False
        H[fail[~stop]] = np.eye(D)
        fresh[fail[~stop]] = True

        win = idx[ok]
        if win.size == 0:
            continue
        znew = trial[ok, j[ok]]
        znew /= np.linalg.norm(znew, axis=1, keepdims=True)
        s = znew - Z[win]
        gain = f[win] - fbest[ok]
        Z[win] = znew
        f[win] = fbest[ok]
        gnew = _fd_gradients(fun, znew, f[win])
        y = gnew - g[win]
        g[win] = gnew
        fresh[_bfgs_update(H, win, s, y)] = False

        small = (np.linalg.norm(s, axis=1) < step_tol) | (gain < value_tol)
        converged[win[small]] = True
        active[win[small]] = False

    return SearchResult(Z, f, converged, it)


def _bfgs_update(H, idx, s, y):
    sy = np.einsum("bi,bi->b", s, y)
    good = np.isfinite(sy) & (sy > 1e-12 * np.linalg.norm(s, axis=1) * np.linalg.norm(y, axis=1))
    ii = idx[good]
    if ii.size == 0:
        return ii
    s, y, rho = s[good], y[good], 1.0 / sy[good]
    Hk = H[ii]
    Hy = np.einsum("bij,bj->bi", Hk, y)
    yHy = np.einsum("bi,bi->b", y, Hy)
    H[ii] = (
        Hk
        - rho[:, None, None] * (Hy[:, :, None] * s[:, None, :] + s[:, :, None] * Hy[:, None, :])
        + (rho**2 * yHy + rho)[:, None, None] * s[:, :, None] * s[:, None, :]
    )
    return ii


def random_sphere_points(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """Uniform points on the unit sphere of C^n, in real coordinates (re | im)."""
    z = rng.standard_normal((count, 2 * n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def to_complex(Z: np.ndarray, n: int) -> np.ndarray:
    return Z[..., :n] + 1j * Z[..., n:]


def to_real(x: np.ndarray) -> np.ndarray:
    return np.concatenate([x.real, x.imag], axis=-1)


def distinct_minima_gap(values: np.ndarray, resolution: float = 1e-7) -> float:
    """Gap between the best and the second-best distinct value (0 if only one)."""
    v = np.sort(values[np.isfinite(values)])
    if v.size == 0:
        return 0.0
    above = v[v > v[0] + resolution]
    return float(above[0] - v[0]) if above.size else 0.0
