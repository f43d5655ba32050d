"""Powers of an operator: asymptotic regularity, limits and projection products.

For an asymptotically regular T ((T^n - T^{n+1}) x -> 0 for every x), the
powers T^n converge exactly when C^n = R(I - T) (+) N(I - T), and the limit
is the projection onto N(I - T) parallel to R(I - T).  The helpers here
compute the powers by plain repeated multiplication, so that the convergence
verdict does not depend on the eigenvalue or rank machinery it is later
compared with.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .decomposition import complementarity_oracle
from .errors import Inconclusive, NonHilbert
from .search import quasi_newton_search, random_sphere_points, to_complex
from .space import OperatorOnSpace, SubspaceBasis, lp_norms, spectrum

PROJECTION_TOL = 1e-6
REGULARITY_WINDOW = 10


@dataclass(frozen=True, eq=False)
class RegularityReport:
    """Outcome of ``check_asymptotic_regularity``.

    ``verdict`` is ``"regular"``, ``"not-regular"`` or ``"inconclusive"``;
    ``regular`` is True/False for the first two and None otherwise.
    ``residuals[n]`` is max_j ||T^n e_j - T^{n+1} e_j||.
    """

    verdict: str
    regular: bool | None
    residuals: np.ndarray
    n_iterations: int

    def __bool__(self) -> bool:
        return bool(self.regular)


@dataclass(frozen=True, eq=False)
class IterationReport:
    converged: bool
    n_iterations: int
    limit_matrix: OperatorOnSpace | None
    asymptotic_regularity_residuals: np.ndarray
    divergence_detected: bool
    limit_is_projection: bool
    limit_matches_decomposition: bool
    iterate_max_norms: np.ndarray | None = None

    def trace_rows(self):
        """(n, residual, iterate_max_norm) rows for CSV export."""
        norms = self.iterate_max_norms
        for n, r in enumerate(self.asymptotic_regularity_residuals):
            yield n, float(r), float(norms[n]) if norms is not None else float("nan")


def _window_nonincreasing(w: np.ndarray, slack: float) -> bool:
    return bool(np.all(np.diff(w) <= slack))


def check_asymptotic_regularity(
    T: OperatorOnSpace, n_max: int = 10_000, tol: float = 1e-10, blowup: float = 1e8
) -> RegularityReport:
    """Probe (T^n - T^{n+1}) e_j -> 0 on the coordinate vectors.

    Regular as soon as the largest residual drops below ``tol`` with the
    last ten residuals nonincreasing.  Not regular when the residuals never
    decay (the last one is at least the first, e.g. T = -I) or the powers
    exceed ``blowup``.  Anything else at ``n_max`` is inconclusive; this is
    reported in the verdict rather than raised.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    p = T.p
    t = T.entries
    power = np.eye(T.n, dtype=complex)
    res = []
    for n in range(n_max + 1):
        nxt = power @ t
        # columns of T^n - T^{n+1} are the probe residuals
        res.append(float(lp_norms((power - nxt).T, p).max()))
        if res[-1] < tol and _window_nonincreasing(np.asarray(res[-REGULARITY_WINDOW:]), 1e-3 * tol):
            return RegularityReport("regular", True, np.asarray(res), n)
        if not np.all(np.isfinite(nxt)) or np.abs(nxt).max() > blowup:
            return RegularityReport("not-regular", False, np.asarray(res), n)
        power = nxt
    r = np.asarray(res)
    if r[-1] >= r[0] * (1 - 1e-12):
        return RegularityReport("not-regular", False, r, n_max)
    return RegularityReport("inconclusive", None, r, n_max)


def limit_projection(T: OperatorOnSpace) -> np.ndarray | None:
    """Projection onto N(I - T) parallel to R(I - T), or None if they are not complementary."""
    dec = complementarity_oracle(T.like(np.eye(T.n) - T.entries))
    if not dec.complementary:
        return None
    return np.eye(T.n) - dec.projection_P.entries


def iterate_to_limit(
    T: OperatorOnSpace, n_max: int = 100_000, tol: float = 1e-10, blowup: float = 1e8
) -> IterationReport:
    """Compute T^n until successive powers agree, blow up, or n_max is hit.

    Parameters
    ----------
    T : OperatorOnSpace
    n_max : int
        Largest power computed.
    tol : float
        Convergence when max |T^n - T^{n+1}| < tol (entrywise).
    blowup : float
        Divergence when max |T^n| > blowup.

    Returns
    -------
    IterationReport
        On convergence the limit is compared with the projection onto
        N(I - T) parallel to R(I - T) built by the complementarity oracle.

    Raises
    ------
    Inconclusive
        Neither convergence nor blow-up within ``n_max`` powers; the partial
        report is attached.
    """
    if not blowup > 1:
        raise ValueError("blowup must exceed 1")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    p = T.p
    t = T.entries
    power = np.eye(T.n, dtype=complex)
    residuals = np.empty(n_max + 1)
    norms = np.empty(n_max + 1)
    converged = diverged = False
    n = 0
    for n in range(n_max + 1):
        nxt = power @ t
        diff = power - nxt
        residuals[n] = lp_norms(diff.T, p).max()
        norms[n] = np.abs(power).max()
        if not np.all(np.isfinite(nxt)) or norms[n] > blowup:
            diverged = True
            break
        if np.abs(diff).max() < tol:
            converged = True
            power = nxt
            break
        power = nxt
    residuals, norms = residuals[: n + 1].copy(), norms[: n + 1].copy()

    limit = None
    is_proj = matches = False
    if converged:
        limit = T.like(power)
        L = power
        is_proj = bool(np.abs(L @ L - L).max() <= PROJECTION_TOL)
        expected = limit_projection(T)
        matches = expected is not None and bool(np.abs(L - expected).max() <= PROJECTION_TOL)
    report = IterationReport(
        converged=converged,
        n_iterations=n,
        limit_matrix=limit,
        asymptotic_regularity_residuals=residuals,
        divergence_detected=diverged,
        limit_is_projection=is_proj,
        limit_matches_decomposition=matches,
        iterate_max_norms=norms,
    )
    if not (converged or diverged):
        raise Inconclusive(
            f"no convergence or blow-up after {n_max} powers (last difference {residuals[-1]:.3e})",
            report=report,
        )
    return report


def operator_norm_estimate(T: OperatorOnSpace, n_starts: int = 64, seed: int = 0) -> float:
    """l_p -> l_p operator norm; exact (largest singular value) for p = 2.

    Otherwise the maximum of ||Tx|| / ||x|| over multi-start local searches,
    which is a lower estimate of the true norm.
    """
    if T.p == 2.0:
        return float(np.linalg.norm(T.entries, 2))
    n, p, t = T.n, T.p, T.entries

    def fun(Z):
        X = to_complex(Z, n)
        return -lp_norms(X @ t.T, p) / lp_norms(X, p)

    rng = np.random.default_rng(seed)
    starts = random_sphere_points(rng, n_starts, n)
    # include the coordinate vectors, where l_p norms are often extremal
    starts = np.concatenate([starts, np.eye(2 * n)[:n]])
    res = quasi_newton_search(fun, starts, value_tol=1e-13)
    return float(-res.values.min())


def is_primitive_contraction(T: OperatorOnSpace, seed: int = 0) -> bool:
    """Contraction with spectrum inside {1} u {|z| < 1}."""
    if operator_norm_estimate(T, seed=seed) > 1 + 1e-9:
        return False
    lam = spectrum(T)
    ok = (np.abs(lam) < 1 - 1e-9) | (np.abs(lam - 1) < 1e-9)
    return bool(np.all(ok))


def _orthogonal_projector(b: SubspaceBasis) -> np.ndarray:
    if b.dim == 0:
        return np.zeros((b.space.dim, b.space.dim), dtype=complex)
    return b.projector()


def projection_product(
    subspaces: Sequence[SubspaceBasis],
    mode: str = "product",
    weights: Sequence[float] | None = None,
) -> OperatorOnSpace:
    """Product P_1 P_2 ... P_m, or convex combination sum w_i P_i, of orthogonal projections.

    Only defined on the Euclidean space (p = 2); raises NonHilbert otherwise.
    """
    if not subspaces:
        raise ValueError("need at least one subspace")
    space = subspaces[0].space
    for b in subspaces:
        if b.space != space:
            raise ValueError("subspaces live in different spaces")
    if space.p != 2.0:
        raise NonHilbert(f"orthogonal projections need p = 2, got p = {space.p}")
    projs = [_orthogonal_projector(b) for b in subspaces]
    if mode == "product":
        if weights is not None:
            raise ValueError("weights only apply to convex_combination")
        out = np.eye(space.dim, dtype=complex)
        for P in projs:
            out = out @ P
    elif mode == "convex_combination":
        w = np.full(len(projs), 1.0 / len(projs)) if weights is None else np.asarray(weights, float)
        if w.shape != (len(projs),) or np.any(w <= 0) or abs(w.sum() - 1) > 1e-12:
            raise ValueError("weights must be positive and sum to 1")
        out = sum(wi * P for wi, P in zip(w, projs))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return OperatorOnSpace(space, out)
