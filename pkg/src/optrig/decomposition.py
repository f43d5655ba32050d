"""Exact range-kernel complementarity oracle and the factorisation A = S P.

In finite dimensions every subspace is closed, so closedness of R(A),
R(A^2) and R(A) + N(A) is automatic and only enters through rank
tolerances.  Complementarity C^n = R(A) (+) N(A) is decided twice:

1. the sum/intersection test: R(A) and N(A) meet trivially (and their
   dimensions add up to n by rank-nullity);
2. the descent test: rank(A^2) == rank(A).

The two must agree; a disagreement is reported as InternalInconsistency
rather than being resolved silently.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import InternalInconsistency
from .space import (
    OperatorOnSpace,
    SubspaceBasis,
    _check_same_space,
    kernel_basis,
    lp_norms,
    rank_profile,
    range_basis,
)

# sine of the smallest principal angle below which R(A) and N(A) are taken to intersect
SUBSPACE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class DecompositionResult:
    complementary: bool
    range_basis: SubspaceBasis
    kernel_basis: SubspaceBasis
    projection_P: OperatorOnSpace | None
    factor_S: OperatorOnSpace | None
    sum_dimension: int
    intersection_dimension: int
    rank: int
    rank_of_square: int
    min_principal_sine: float


def principal_sines(U: np.ndarray, K: np.ndarray) -> np.ndarray:
    """Sines of the principal angles between span(K) and span(U).

    Both bases must be l_2-orthonormal.  Computed from (I - U U^H) K, which
    stays accurate for small angles, unlike the cosines of U^H K.
    """
    if K.shape[1] == 0:
        return np.zeros(0)
    resid = K - U @ (U.conj().T @ K) if U.shape[1] else K
    return np.sort(np.linalg.svd(resid, compute_uv=False))


def complementarity_oracle(
    A: OperatorOnSpace, tol_factor: float = 1.0, subspace_tol: float = SUBSPACE_TOL
) -> DecompositionResult:
    n = A.n
    R = range_basis(A, tol_factor)
    N = kernel_basis(A, tol_factor)
    r, k = R.dim, N.dim

    sines = principal_sines(R.columns, N.columns)
    intersection = int(np.count_nonzero(sines <= subspace_tol))
    sum_dim = r + k - intersection
    by_sum = intersection == 0 and sum_dim == n

    r2 = rank_profile(A.like(A.entries @ A.entries), tol_factor).rank
    by_descent = r2 == r
    if by_sum != by_descent:
        raise InternalInconsistency(
            f"sum/intersection test says {by_sum} (min sine {sines[:1]}), "
            f"descent test says {by_descent} (rank A = {r}, rank A^2 = {r2})"
        )

    P = S = None
    if by_sum:
        P, S = _factor(A, R.columns, N.columns)
    return DecompositionResult(
        complementary=by_sum,
        range_basis=R,
        kernel_basis=N,
        projection_P=P,
        factor_S=S,
        sum_dimension=sum_dim,
        intersection_dimension=intersection,
        rank=r,
        rank_of_square=r2,
        min_principal_sine=float(sines[0]) if sines.size else 1.0,
    )


def _factor(A: OperatorOnSpace, U: np.ndarray, K: np.ndarray):
    """P onto R(A) along N(A), and S = A|R(A) (+) I|N(A), in the frame [U | K]."""
    r = U.shape[1]
    frame = np.concatenate([U, K], axis=1)
    frame_inv = np.linalg.inv(frame)
    P = U @ frame_inv[:r]
    S = np.concatenate([A.entries @ U, K], axis=1) @ frame_inv
    return A.like(P), A.like(S)


def oblique_projection(range_cols: np.ndarray, kernel_cols: np.ndarray) -> np.ndarray:
    """Projection onto span(range_cols) parallel to span(kernel_cols)."""
    r = range_cols.shape[1]
    frame_inv = np.linalg.inv(np.concatenate([range_cols, kernel_cols], axis=1))
    return range_cols @ frame_inv[:r]


def sum_closedness_constant(
    A: OperatorOnSpace, T: OperatorOnSpace, n_samples: int = 10_000, seed: int = 0
) -> float:
    """Empirical lower estimate of c in ||Ax + Ty|| >= c ||Ax||, y in N(A).

    Samples random x (off the kernel) and random kernel vectors y whose
    scale relative to Ax is log-uniform over eight decades.  Returns
    ``math.inf`` when N(A) = {0}, where the constraint is vacuous.
    """
    _check_same_space(A.space, T.space)
    K = kernel_basis(A).columns
    if K.shape[1] == 0:
        return math.inf
    n, k, p = A.n, K.shape[1], A.p
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n_samples, n)) + 1j * rng.standard_normal((n_samples, n))
    c = rng.standard_normal((n_samples, k)) + 1j * rng.standard_normal((n_samples, k))
    Ax = x @ A.entries.T
    nax = lp_norms(Ax, p)
    y = c @ K.T
    y *= (nax * 10.0 ** rng.uniform(-4, 4, n_samples) / lp_norms(y, p))[:, None]
    ok = nax > 1e-12 * lp_norms(x, p)
    ratio = lp_norms(Ax + y @ T.entries.T, p)[ok] / nax[ok]
    return float(ratio.min())
