"""Invertibility certificates by continuation along the pencil A + tT.

If the angle of A with respect to T has margin delta = 1 + cos_T(A) > 0,
then for every t >= 0

    ||Ax + tTx|| >= c ||Ax||,   c = delta / 2,

and with the injectivity modulus k_A (||Ax|| >= k_A ||x||) every A + tT is
bounded below by mu = c * k_A.  Knowing a solution of (A + t_cur T) x = y,
the neighbouring system at t_next is solved by the fixed point iteration

    h  <-  (A + t_cur T)^{-1} (y + (t_cur - t_next) T h),

a contraction with factor |t_cur - t_next| ||T|| / mu.  Stepping t from
a known invertible A + t0 T down to 0 in steps shorter than mu / ||T||
therefore reaches a solution of Ax = y.

In finite dimensions a trivial kernel already makes A invertible, so this
is a verification device: the certificate's solution is compared against a
direct solve, and a stalled contraction points at an over-optimistic
margin estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .angle import OptimizerConfig, angle
from .errors import NontrivialKernel, PreconditionFailure, StepStall
from .search import quasi_newton_search, random_sphere_points, to_complex
from .space import (
    OperatorOnSpace,
    Vector,
    _check_same_space,
    lp_norms,
    operator_norm_bound,
    rank_profile,
)

DEFAULT_T_GRID = (0.0,) + tuple(10.0**k for k in range(-6, 4))
LOWER_BOUND_SLACK = 1e-9
MAX_CONTRACTION_ITERS = 10_000
CONTRACTION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ContinuationCertificate:
    delta: float
    c: float
    k_A: float
    mu: float
    t_path: tuple[float, ...]
    contraction_factors: tuple[float, ...]
    final_residual: float
    t_norm: float = 1.0
    step: float = 0.0
    inner_iterations: tuple[int, ...] = field(default=())
    k_A_starts: int = 0
    k_A_converged: int = 0

    @property
    def n_steps(self) -> int:
        """Number of points on the t path (including t0 and 0)."""
        return len(self.t_path)


def pencil_lower_bound_check(
    A: OperatorOnSpace,
    T: OperatorOnSpace,
    delta: float,
    n_samples: int = 10_000,
    seed: int = 0,
    t_grid=DEFAULT_T_GRID,
) -> bool:
    """Sample ||Ax + tTx|| >= (delta/2) ||Ax|| over x and a grid of t >= 0.

    Half of the samples are uniform on the sphere; the other half are
    pushed towards N(A) (x = k + eta d with eta log-uniform), which is where
    the bound is tight for oblique projections and nilpotent parts.
    Returns False as soon as one pair violates the bound by more than 1e-9
    (relative to ||Ax||).
    """
    if not 0.0 < delta <= 2.0:
        raise ValueError("delta must lie in (0, 2]")
    _check_same_space(A.space, T.space)
    n, p = A.n, A.p
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n_samples, n)) + 1j * rng.standard_normal((n_samples, n))
    u, s, vh = np.linalg.svd(A.entries)
    r = rank_profile(A).rank
    if r < n:
        half = n_samples // 2
        K = vh[r:].conj().T
        ck = rng.standard_normal((half, n - r)) + 1j * rng.standard_normal((half, n - r))
        eta = 10.0 ** rng.uniform(-6, 0, half)
        x[:half] = ck @ K.T + eta[:, None] * x[:half]
    x /= lp_norms(x, p)[:, None]

    Ax = x @ A.entries.T
    Tx = x @ T.entries.T
    nax = lp_norms(Ax, p)
    feasible = nax > 1e-8
    Ax, Tx, nax = Ax[feasible], Tx[feasible], nax[feasible]
    c = delta / 2.0
    for t in t_grid:
        if t < 0:
            raise ValueError("t_grid must be nonnegative")
        lhs = lp_norms(Ax + t * Tx, p)
        if np.any(lhs < c * nax - LOWER_BOUND_SLACK * np.maximum(nax, 1.0)):
            return False
    return True


def _injectivity_search(A: OperatorOnSpace, cfg: OptimizerConfig):
    n, p = A.n, A.p
    a = A.entries

    def fun(Z):
        X = to_complex(Z, n)
        return lp_norms(X @ a.T, p) / lp_norms(X, p)

    rng = np.random.default_rng(cfg.seed)
    res = quasi_newton_search(
        fun,
        random_sphere_points(rng, cfg.n_starts, n),
        max_iters=cfg.max_iters,
        step_tol=cfg.step_tol,
        value_tol=min(cfg.value_tol, 1e-12),
    )
    return float(np.min(res.values)), cfg.n_starts, int(res.converged.sum())


def injectivity_modulus(A: OperatorOnSpace, cfg: OptimizerConfig | None = None) -> float:
    """min ||Ax|| over the unit l_p sphere, by multi-start minimisation.

    Raises NontrivialKernel when A is numerically rank deficient.  For p = 2
    the value agrees with the smallest singular value.
    """
    cfg = cfg or OptimizerConfig()
    prof = rank_profile(A)
    if prof.rank < A.n:
        raise NontrivialKernel(f"numerical rank {prof.rank} < {A.n}")
    return _injectivity_search(A, cfg)[0]


def certify_invertible_by_continuation(
    A: OperatorOnSpace,
    T: OperatorOnSpace,
    t0: float,
    y: Vector,
    safety: float = 0.9,
    cfg: OptimizerConfig | None = None,
    delta: float | None = None,
) -> tuple[Vector, ContinuationCertificate]:
    """Solve Ax = y by continuation from A + t0 T down to A.

    Parameters
    ----------
    A, T : OperatorOnSpace
        The operator to certify and the pencil direction.
    t0 : float
        Starting parameter; A + t0 T must be invertible.
    y : Vector
        Right-hand side.
    safety : float
        Steps are ``safety * mu / ||T||`` long (strictly inside the
        contraction radius).
    cfg : OptimizerConfig, optional
        Used for the angle estimate and for k_A.
    delta : float, optional
        Angle margin 1 + cos_T(A); estimated with ``angle`` when omitted.

    Returns
    -------
    x : Vector
        Solution of Ax = y obtained at the end of the path.
    certificate : ContinuationCertificate

    Raises
    ------
    PreconditionFailure
        A + t0 T is singular, t0 < 0, or the margin is not positive.
    NontrivialKernel
        A has a nontrivial kernel.
    StepStall
        A contraction iteration did not settle within 10^4 iterations.
    """
    _check_same_space(A.space, T.space)
    _check_same_space(A.space, y.space)
    if not 0.0 < safety < 1.0:
        raise ValueError("safety must lie in (0, 1)")
    if not (t0 >= 0 and math.isfinite(t0)):
        raise PreconditionFailure("t0 must be a finite nonnegative number")
    cfg = cfg or OptimizerConfig()
    p = A.p
    a, tm = A.entries, T.entries
    if rank_profile(A.like(a + t0 * tm)).rank < A.n:
        raise PreconditionFailure(f"A + t0 T is numerically singular at t0 = {t0!r}")
    if rank_profile(A).rank < A.n:
        raise NontrivialKernel("continuation needs N(A) = {0}")

    if delta is None:
        delta = 1.0 + angle(A, T, cfg).cosine
    if not delta > 0:
        raise PreconditionFailure(f"angle margin delta = {delta!r} is not positive")
    c = delta / 2.0
    k_A, k_starts, k_conv = _injectivity_search(A, cfg)
    mu = c * k_A
    t_norm = operator_norm_bound(tm, p)
    step = safety * mu / t_norm

    n_steps = math.ceil(t0 / step) if t0 > 0 else 0
    t_path = [max(t0 - k * step, 0.0) for k in range(n_steps + 1)]
    t_path[-1] = 0.0

    yv = y.coords
    ynorm = float(lp_norms(yv, p))
    tol = CONTRACTION_TOL * max(ynorm, np.finfo(float).tiny)

    x = lu_solve(lu_factor(a + t0 * tm), yv)
    factors, inner = [], []
    for t_cur, t_next in zip(t_path[:-1], t_path[1:]):
        L = abs(t_cur - t_next) * t_norm / mu
        lu = lu_factor(a + t_cur * tm)
        shift = t_cur - t_next
        for it in range(1, MAX_CONTRACTION_ITERS + 1):
            x_new = lu_solve(lu, yv + shift * (tm @ x))
            diff = float(lp_norms(x_new - x, p))
            x = x_new
            if diff < tol:
                break
            if not math.isfinite(diff):
                raise StepStall(f"contraction from t = {t_cur!r} to {t_next!r} diverged after {it} iterations")
        else:
            raise StepStall(
                f"contraction from t = {t_cur!r} to {t_next!r} did not settle in "
                f"{MAX_CONTRACTION_ITERS} iterations (last difference {diff:.3e})"
            )
        factors.append(L)
        inner.append(it)

    residual = float(lp_norms(a @ x - yv, p)) / ynorm if ynorm > 0 else float(lp_norms(a @ x, p))
    cert = ContinuationCertificate(
        delta=float(delta),
        c=c,
        k_A=k_A,
        mu=mu,
        t_path=tuple(float(t) for t in t_path),
        contraction_factors=tuple(factors),
        final_residual=residual,
        t_norm=t_norm,
        step=step,
        inner_iterations=tuple(inner),
        k_A_starts=k_starts,
        k_A_converged=k_conv,
    )
    return Vector(A.space, x), cert
