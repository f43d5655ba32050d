"""Cosine and angle of an operator A with respect to another operator T.

    cos_T(A) = inf { Re[Ax, Tx] / (||Ax|| ||Tx||) : x not in N(A) u N(T) }

The infimum is approximated from above by multi-start quasi-Newton search
driven by finite-difference gradients.  Two searches are run:

* an interior search over the unit sphere of C^n, with points too close to
  N(A) or N(T) treated as infeasible;
* a boundary search for each nontrivial kernel.  Writing x = k + eta*d with
  k in N(A) and d orthogonal to it, the ratio tends to
  Re[Ad, Tk] / (||Ad|| ||Tk||) as eta -> 0+ (the semi-inner product is
  homogeneous in both slots), which is optimised directly; the witness is
  then the feasible point k + eta*d for the smallest usable eta.  The same
  is done with the roles swapped for N(T).

The boundary search matters: for nilpotent operators and oblique projections
the infimum is only approached as x tends to the kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import NearKernel
from .search import (
    quasi_newton_search,
    distinct_minima_gap,
    random_sphere_points,
    to_complex,
)
from .space import (
    OperatorOnSpace,
    Vector,
    _check_same_space,
    cosine_ratios,
    kernel_basis,
    lp_norms,
)

_BOUNDARY_ETAS = (1e-4, 1e-5, 1e-6, 1e-7)


@dataclass(frozen=True)
class OptimizerConfig:
    n_starts: int = 64
    max_iters: int = 500
    step_tol: float = 1e-10
    value_tol: float = 1e-8
    kernel_exclusion_radius: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        for name in ("step_tol", "value_tol", "kernel_exclusion_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True, eq=False)
class AngleReport:
    cosine: float
    angle: float
    witness: Vector | None
    n_starts: int
    n_converged: int
    spread: float
    degenerate: bool


def _ratios(AX, TX, X, p, radius):
    r, na, nt = cosine_ratios(AX, TX, p)
    nx = lp_norms(X, p)
    feasible = (na > radius * nx) & (nt > radius * nx)
    return np.where(feasible, np.clip(r, -1.0, 1.0), np.inf)


def cosine_ratio(
    A: OperatorOnSpace,
    T: OperatorOnSpace,
    x: Vector,
    kernel_exclusion_radius: float = 1e-8,
) -> float:
    """Re[Ax, Tx] / (||Ax|| ||Tx||); raises NearKernel off the feasible set."""
    _check_same_space(A.space, T.space)
    _check_same_space(A.space, x.space)
    X = x.coords
    X = X[None, :]
    r = _ratios(X @ A.entries.T, X @ T.entries.T, X, A.p, kernel_exclusion_radius)[0]
    if not np.isfinite(r):
        raise NearKernel("x is within the kernel exclusion radius of N(A) or N(T)")
    return float(r)


def _interior_objective(A, T, p, radius):
    n = A.shape[0]
    At, Tt = A.T, T.T

    def fun(Z):
        X = to_complex(Z, n)
        return _ratios(X @ At, X @ Tt, X, p, radius)

    return fun


def _boundary_objective(left, right, p, radius):
    """Limit ratio Re[left d, right c] / (||left d|| ||right c||).

    ``left`` maps the complement coordinates d and ``right`` the kernel
    coordinates c; the argument order of the semi-inner product is kept
    (first slot always comes from A).
    """
    k = right.shape[1]
    m = left.shape[1]
    Lt, Rt = left.T, right.T

    def fun(Z):
        c = Z[:, :k] + 1j * Z[:, k : 2 * k]
        d = Z[:, 2 * k : 2 * k + m] + 1j * Z[:, 2 * k + m :]
        u, w = d @ Lt, c @ Rt
        nc = np.linalg.norm(c, axis=1)
        nd = np.linalg.norm(d, axis=1)
        r, nu, nw = cosine_ratios(u, w, p)
        ok = (nu > radius * nd) & (nw > radius * nc) & (nc > 0) & (nd > 0)
        return np.where(ok, np.clip(r, -1.0, 1.0), np.inf)

    return fun


def _swap_boundary_objective(left, right, p, radius):
    # kernel of T: the first slot comes from A applied to the kernel part
    k = left.shape[1]
    m = right.shape[1]
    Lt, Rt = left.T, right.T

    def fun(Z):
        c = Z[:, :k] + 1j * Z[:, k : 2 * k]
        d = Z[:, 2 * k : 2 * k + m] + 1j * Z[:, 2 * k + m :]
        u, w = c @ Lt, d @ Rt
        nc = np.linalg.norm(c, axis=1)
        nd = np.linalg.norm(d, axis=1)
        r, nu, nw = cosine_ratios(u, w, p)
        ok = (nu > radius * nc) & (nw > radius * nd) & (nc > 0) & (nd > 0)
        return np.where(ok, np.clip(r, -1.0, 1.0), np.inf)

    return fun


def _complement(K: np.ndarray) -> np.ndarray:
    n, k = K.shape
    q, _ = np.linalg.qr(np.concatenate([K, np.eye(n, dtype=complex)], axis=1))
    return q[:, k:n]


def _boundary_witnesses(Z, K, Kc, k, fun_x):
    """Turn boundary coordinates into feasible points k + eta*d."""
    m = Kc.shape[1]
    c = Z[:, :k] + 1j * Z[:, k : 2 * k]
    d = Z[:, 2 * k : 2 * k + m] + 1j * Z[:, 2 * k + m :]
    xk = c @ K.T
    xd = d @ Kc.T
    xk /= np.linalg.norm(xk, axis=1, keepdims=True)
    xd /= np.linalg.norm(xd, axis=1, keepdims=True)
    best_x = xk.copy()
    best_v = np.full(len(Z), np.inf)
    for eta in _BOUNDARY_ETAS:
        x = xk + eta * xd
        v = fun_x(x)
        better = v < best_v
        best_v = np.where(better, v, best_v)
        best_x[better] = x[better]
    return best_x, best_v


def _search_all(A, T, cfg: OptimizerConfig):
    """Run every search phase; return (points, values, n_starts, n_converged)."""
    n, p = A.n, A.p
    a, t = A.entries, T.entries
    radius = cfg.kernel_exclusion_radius
    rng = np.random.default_rng(cfg.seed)
    opts = dict(max_iters=cfg.max_iters, step_tol=cfg.step_tol, value_tol=cfg.value_tol)

    def fun_x(X):
        return _ratios(X @ a.T, X @ t.T, X, p, radius)

    pts, vals = [], []
    n_starts = n_conv = 0

    res = quasi_newton_search(
        _interior_objective(a, t, p, radius), random_sphere_points(rng, cfg.n_starts, n), **opts
    )
    pts.append(to_complex(res.points, n))
    vals.append(res.values)
    n_starts += cfg.n_starts
    n_conv += int(res.converged.sum())

    for which, op in (("A", A), ("T", T)):
        K = kernel_basis(op).columns
        k = K.shape[1]
        if k == 0 or k == n:
            continue
        Kc = _complement(K)
        if which == "A":
            fun = _boundary_objective(a @ Kc, t @ K, p, radius)
        else:
            fun = _swap_boundary_objective(a @ K, t @ Kc, p, radius)
        res = quasi_newton_search(fun, random_sphere_points(rng, cfg.n_starts, n), **opts)
        x, v = _boundary_witnesses(res.points, K, Kc, k, fun_x)
        pts.append(x)
        vals.append(v)
        n_starts += cfg.n_starts
        n_conv += int(res.converged.sum())

    return np.concatenate(pts), np.concatenate(vals), n_starts, n_conv


def angle(A: OperatorOnSpace, T: OperatorOnSpace, cfg: OptimizerConfig | None = None) -> AngleReport:
    """Estimate cos_T(A) and the angle phi_T(A) = arccos(cos_T(A)).

    The reported cosine is the smallest ratio found at a feasible point and
    is therefore an upper bound on the true infimum; the angle is a lower
    bound on phi_T(A).  When A or T vanishes the feasible set is empty and
    the report is flagged ``degenerate`` with cosine 1 and angle 0.
    """
    _check_same_space(A.space, T.space)
    cfg = cfg or OptimizerConfig()
    if not np.any(A.entries) or not np.any(T.entries):
        return AngleReport(1.0, 0.0, None, 0, 0, 0.0, True)

    X, values, n_starts, n_conv = _search_all(A, T, cfg)
    i = int(np.argmin(values))
    if not np.isfinite(values[i]):
        return AngleReport(1.0, 0.0, None, n_starts, n_conv, 0.0, True)
    cos = float(values[i])
    return AngleReport(
        cosine=cos,
        angle=math.acos(cos),
        witness=Vector(A.space, X[i]),
        n_starts=n_starts,
        n_converged=n_conv,
        spread=distinct_minima_gap(values),
        degenerate=False,
    )


def ray_operator(A: OperatorOnSpace, theta: float) -> OperatorOnSpace:
    return A.like(np.exp(1j * theta) * np.eye(A.n))


def ray_angle(A: OperatorOnSpace, theta: float, cfg: OptimizerConfig | None = None) -> AngleReport:
    """Angle of A along the ray arg z = theta, i.e. with T = e^{i theta} I."""
    return angle(A, ray_operator(A, theta), cfg)
