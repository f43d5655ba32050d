"""Pencil class membership, Krein amplitude and generalized-amplitude bounds.

The generalized amplitude is an infimum of phi_T(A) over every T in the
pencil class

    E_A = { T : T(N(A)) = N(A) and A + tT invertible for some t > 0 },

which cannot be searched exhaustively.  ``generalized_amplitude_upper``
evaluates a finite candidate set (admissible rays, the factor S of A = SP
when it exists, and random kernel-preserving perturbations) and classifies
the best angle found as below pi or at pi.  The verdict is meant to be
cross-checked against ``decomposition.complementarity_oracle``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import enum
import math

import numpy as np
from scipy.optimize import minimize_scalar

from .angle import AngleReport, OptimizerConfig, angle, ray_operator
from .decomposition import complementarity_oracle
from .space import (
    OperatorOnSpace,
    _check_same_space,
    kernel_basis,
    numerical_rank,
    rank_profile,
)

DEFAULT_T_GRID = tuple(10.0**k for k in range(-6, 4))
MARGIN_THRESHOLD = 0.05
KERNEL_INCLUSION_TOL = 1e-8


class Classification(str, enum.Enum):
    BELOW_PI = "BELOW_PI"
    AT_PI = "AT_PI"


@dataclass(frozen=True)
class PencilMembership:
    preserves_kernel: bool
    invertible_t: float | None

    @property
    def is_member(self) -> bool:
        return self.preserves_kernel and self.invertible_t is not None


@dataclass(frozen=True, eq=False)
class Candidate:
    label: str
    pencil: OperatorOnSpace
    report: AngleReport


@dataclass(frozen=True, eq=False)
class AmplitudeReport:
    krein_amplitude: float
    generalized_upper_bound: float
    best_pencil: OperatorOnSpace
    best_label: str
    best_cosine: float
    candidates_tried: int
    classification: Classification
    margin: float
    ray_trace: tuple[tuple[float, float, float], ...] = ()
    candidates: tuple[Candidate, ...] = field(default=(), repr=False)


def pencil_membership(
    A: OperatorOnSpace,
    T: OperatorOnSpace,
    t_grid=DEFAULT_T_GRID,
    tol_factor: float = 1.0,
) -> PencilMembership:
    """Test T(N(A)) = N(A) and find the first t in ``t_grid`` with A + tT invertible."""
    _check_same_space(A.space, T.space)
    K = kernel_basis(A, tol_factor).columns
    if K.shape[1] == 0:
        preserves = True
    else:
        TK = T.entries @ K
        leak = TK - K @ (K.conj().T @ TK)
        scale = max(1.0, float(np.linalg.norm(T.entries, 2)))
        inside = np.linalg.norm(leak, 2) <= KERNEL_INCLUSION_TOL * scale
        preserves = bool(inside and numerical_rank(TK, tol_factor) == K.shape[1])
    t_ok = None
    for t in t_grid:
        if t <= 0:
            raise ValueError("t_grid must contain positive values")
        if rank_profile(A.like(A.entries + t * T.entries), tol_factor).rank == A.n:
            t_ok = float(t)
            break
    return PencilMembership(preserves, t_ok)


def _ray_scan(A: OperatorOnSpace, n_theta: int, cfg: OptimizerConfig, max_refine: int = 1):
    """Ray angles on a uniform theta grid plus bounded 1-D refinement.

    Grid points that are discrete local minima (and not part of a flat
    stretch) are refined by a bounded scalar search over the neighbouring
    grid cells; at most ``max_refine`` of them, best first.  Returns a list
    of (theta, AngleReport) in evaluation order.
    """
    thetas = 2 * np.pi * np.arange(n_theta) / n_theta
    trace = [(float(th), angle(A, ray_operator(A, th), cfg)) for th in thetas]
    vals = np.array([r.angle for _, r in trace])
    prev, nxt = np.roll(vals, 1), np.roll(vals, -1)
    is_min = (vals <= prev) & (vals <= nxt) & ((vals < prev - 1e-6) | (vals < nxt - 1e-6))
    order = [i for i in np.argsort(vals, kind="stable") if is_min[i]][:max_refine]
    width = 2 * np.pi / n_theta
    for i in order:
        seen = {}

        def phi(th):
            rep = angle(A, ray_operator(A, th), cfg)
            seen[th] = rep
            return rep.angle

        minimize_scalar(
            phi,
            bounds=(thetas[i] - width, thetas[i] + width),
            method="bounded",
            options={"xatol": 1e-3, "maxiter": 12},
        )
        trace.extend((float(th % (2 * np.pi)), rep) for th, rep in seen.items())
    return trace


def krein_amplitude(A: OperatorOnSpace, n_theta: int = 12, cfg: OptimizerConfig | None = None) -> float:
    """Smallest ray angle min_theta phi_theta(A); 0 for A = 0."""
    cfg = cfg or OptimizerConfig()
    if not np.any(A.entries):
        return 0.0
    return min(rep.angle for _, rep in _ray_scan(A, n_theta, cfg))


def random_kernel_preserving(K: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Random matrix of unit spectral norm mapping span(K) into itself.

    Block upper triangular in the orthonormal frame [K | K^perp].
    """
    n, k = K.shape
    Q, _ = np.linalg.qr(np.concatenate([K, np.eye(n, dtype=complex)], axis=1))
    Q = np.concatenate([K, Q[:, k:n]], axis=1)
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    M[k:, :k] = 0.0
    M /= np.linalg.norm(M, 2)
    return Q @ M @ Q.conj().T


def generalized_amplitude_upper(
    A: OperatorOnSpace,
    cfg: OptimizerConfig | None = None,
    *,
    n_theta: int = 12,
    n_random: int = 32,
    perturbation: float = 0.25,
    margin_threshold: float = MARGIN_THRESHOLD,
    t_grid=DEFAULT_T_GRID,
) -> AmplitudeReport:
    """Upper bound on Am(A) over a finite candidate subset of E_A.

    Candidates, in order: every ray e^{i theta} I of the Krein scan that is
    a pencil member; the factor S = A|R(A) (+) I|N(A) when A is
    complementary; ``n_random`` perturbations S0 (I + eps K) with K mapping
    N(A) into itself, where S0 is S when it exists and I otherwise.
    """
    cfg = cfg or OptimizerConfig()
    ident = A.like(np.eye(A.n))
    if not np.any(A.entries):
        # X = {0} (+) X: complementary, and the degenerate angle convention gives 0
        return AmplitudeReport(0.0, 0.0, ident, "degenerate", 1.0, 0, Classification.BELOW_PI, math.pi)

    candidates: list[Candidate] = []
    rays = _ray_scan(A, n_theta, cfg)
    krein = min(rep.angle for _, rep in rays)
    for th, rep in rays:
        T = ray_operator(A, th)
        if pencil_membership(A, T, t_grid).is_member:
            candidates.append(Candidate(f"ray theta={th!r}", T, rep))

    oracle = complementarity_oracle(A)
    S0 = ident
    if oracle.complementary:
        S0 = oracle.factor_S
        candidates.append(Candidate("factor S", S0, angle(A, S0, cfg)))

    K = oracle.kernel_basis.columns
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x5EED]))
    for j in range(n_random):
        for _ in range(16):
            T = A.like(S0.entries @ (np.eye(A.n) + perturbation * random_kernel_preserving(K, rng)))
            if pencil_membership(A, T, t_grid).is_member:
                break
        else:
            continue
        sub = replace(cfg, seed=(cfg.seed + j + 1) % 2**64)
        candidates.append(Candidate(f"random #{j}", T, angle(A, T, sub)))

    best = min(candidates, key=lambda c: c.report.angle)
    bound = best.report.angle
    margin = math.pi - bound
    cls = Classification.BELOW_PI if margin >= margin_threshold else Classification.AT_PI
    trace = tuple(sorted((th, rep.angle, rep.cosine) for th, rep in rays))
    return AmplitudeReport(
        krein_amplitude=krein,
        generalized_upper_bound=bound,
        best_pencil=best.pencil,
        best_label=best.label,
        best_cosine=best.report.cosine,
        candidates_tried=len(candidates),
        classification=cls,
        margin=margin,
        ray_trace=trace,
        candidates=tuple(candidates),
    )
