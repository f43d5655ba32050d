"""Dense complex linear algebra on finite-dimensional l_p spaces.

Everything here is a thin, validated layer over numpy: norms, the Giles
semi-inner product, SVD based rank/kernel/range computations, spectra and
direct solves.  All values are immutable once constructed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularOperator

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SpaceSpec:
    """C^dim equipped with the l_p norm, 1 < p < inf."""

    dim: int
    p: float = 2.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        p = float(self.p)
        if not (1.0 < p < np.inf):
            raise ValueError(f"p must lie in the open interval (1, inf), got {self.p!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", p)


def _frozen_complex(a, shape=None) -> np.ndarray:
    arr = np.array(a, dtype=complex, copy=True)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("entries must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Vector:
    space: SpaceSpec
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "coords", _frozen_complex(self.coords, (self.space.dim,))
        )

    @classmethod
    def from_array(cls, coords, p: float = 2.0) -> "Vector":
        coords = np.asarray(coords)
        return cls(SpaceSpec(coords.shape[0], p), coords)


@dataclass(frozen=True, eq=False)
class OperatorOnSpace:
    """A square complex matrix acting on ``space``."""

    space: SpaceSpec
    entries: np.ndarray

    def __post_init__(self):
        n = self.space.dim
        object.__setattr__(self, "entries", _frozen_complex(self.entries, (n, n)))

    @classmethod
    def from_array(cls, entries, p: float = 2.0) -> "OperatorOnSpace":
        entries = np.atleast_2d(np.asarray(entries))
        return cls(SpaceSpec(entries.shape[0], p), entries)

    @classmethod
    def identity(cls, space: SpaceSpec) -> "OperatorOnSpace":
        return cls(space, np.eye(space.dim))

    @property
    def n(self) -> int:
        return self.space.dim

    @property
    def p(self) -> float:
        return self.space.p

    def like(self, entries) -> "OperatorOnSpace":
        """New operator on the same space."""
        return OperatorOnSpace(self.space, entries)

    def apply(self, x: Vector) -> Vector:
        _check_same_space(self.space, x.space)
        return Vector(self.space, self.entries @ x.coords)


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """A basis stored column-wise in ``columns`` (shape ``(dim, k)``)."""

    space: SpaceSpec
    columns: np.ndarray
    orthonormal: bool = False

    def __post_init__(self):
        cols = np.array(self.columns, dtype=complex).reshape(self.space.dim, -1)
        cols.setflags(write=False)
        object.__setattr__(self, "columns", cols)

    @property
    def dim(self) -> int:
        return self.columns.shape[1]

    @property
    def vectors(self) -> list[Vector]:
        return [Vector(self.space, c) for c in self.columns.T]

    def projector(self) -> np.ndarray:
        """l_2-orthogonal projector onto the span (requires orthonormal columns)."""
        q = self.columns if self.orthonormal else np.linalg.qr(self.columns)[0]
        return q @ q.conj().T


@dataclass(frozen=True, eq=False)
class RankProfile:
    singular_values: np.ndarray
    rank: int
    tolerance_used: float


def _check_same_space(a: SpaceSpec, b: SpaceSpec):
    if a != b:
        raise ValueError(f"space mismatch: {a} vs {b}")


# --------------------------------------------------------------------------
# Vectorised kernels.  These work on the trailing axis so that the optimisers
# can evaluate many points per call.


def lp_norms(x: np.ndarray, p: float) -> np.ndarray:
    """l_p norm along the last axis."""
    ax = np.abs(x)
    if p == 2.0:
        return np.sqrt(np.einsum("...i,...i->...", ax, ax))
    with np.errstate(over="ignore", under="ignore"):
        out = np.sum(ax**p, axis=-1) ** (1.0 / p)
    redo = ~np.isfinite(out) | ((out == 0) & np.any(ax > 0, axis=-1))
    if np.any(redo):
        # rescale rows whose p-th powers overflowed or underflowed
        m = ax.max(axis=-1, keepdims=True)
        safe = np.where(m > 0, m, 1.0)
        scaled = m[..., 0] * ((ax / safe) ** p).sum(axis=-1) ** (1.0 / p)
        out = np.where(redo, scaled, out)
    return out


def sip_dual(y: np.ndarray, p: float) -> np.ndarray:
    """Coefficients w with [x, y] = sum_j x_j w_j  (Giles normalisation)."""
    if p == 2.0:
        return np.conj(y)
    ay = np.abs(y)
    ny = lp_norms(y, p)[..., None]
    nz = ay > 0
    # ||y||^(2-p) |y_j|^(p-2) written scale-free
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(nz, ay / np.where(ny > 0, ny, 1.0), 1.0) ** (p - 2.0)
    return np.where(nz, np.conj(y) * rel, 0.0)


def cosine_ratios(U: np.ndarray, W: np.ndarray, p: float):
    """Re[u, w] / (||u|| ||w||) row-wise, with the two norms.

    Fused version of ``sips`` for the optimisers; rows where either norm
    vanishes give nan in the ratio.
    """
    ur, ui, wr, wi = U.real, U.imag, W.real, W.imag
    if p == 2.0:
        num = np.einsum("ij,ij->i", ur, wr) + np.einsum("ij,ij->i", ui, wi)
        nu = np.sqrt(np.einsum("ij,ij->i", ur, ur) + np.einsum("ij,ij->i", ui, ui))
        nw = np.sqrt(np.einsum("ij,ij->i", wr, wr) + np.einsum("ij,ij->i", wi, wi))
        with np.errstate(divide="ignore", invalid="ignore"):
            return num / (nu * nw), nu, nw
    aw = np.sqrt(wr * wr + wi * wi)
    nu = lp_norms(U, p)
    nw = lp_norms(W, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = aw / nw[:, None]
        wgt = np.where(aw > 0, np.where(aw > 0, rel, 1.0) ** (p - 2.0), 0.0)
        num = np.einsum("ij,ij->i", (ur * wr + ui * wi), wgt)
        return num / (nu * nw), nu, nw


def sips(x: np.ndarray, y: np.ndarray, p: float) -> np.ndarray:
    """Semi-inner products [x, y] along the last axis."""
    return np.sum(x * sip_dual(y, p), axis=-1)


# --------------------------------------------------------------------------
# Typed API


def lp_norm(x: Vector) -> float:
    return float(lp_norms(x.coords, x.space.p))


def sip(x: Vector, y: Vector) -> complex:
    """Giles semi-inner product [x, y] of the l_p space.

    ``[x, y] = ||y||^(2-p) * sum_j x_j |y_j|^(p-2) conj(y_j)``, with zero
    coordinates of ``y`` contributing nothing and ``[x, 0] = 0``.  Linear
    in ``x``, ``[x, x] = ||x||^2`` and ``|[x, y]| <= ||x|| ||y||``.
    """
    _check_same_space(x.space, y.space)
    return complex(sips(x.coords, y.coords, x.space.p))


def rank_profile(A: OperatorOnSpace, tol_factor: float = 1.0) -> RankProfile:
    if tol_factor <= 0:
        raise ValueError("tol_factor must be positive")
    s = np.linalg.svd(A.entries, compute_uv=False)
    return _profile_from_singular_values(s, A.n, tol_factor)


def _profile_from_singular_values(s, n, tol_factor) -> RankProfile:
    s = np.asarray(s, dtype=float)
    smax = s[0] if s.size else 0.0
    tol = tol_factor * smax * n * EPS
    s = s.copy()
    s.setflags(write=False)
    return RankProfile(s, int(np.count_nonzero(s > tol)), float(tol))


def numerical_rank(M: np.ndarray, tol_factor: float = 1.0) -> int:
    """Rank of an arbitrary (possibly rectangular) matrix, same tolerance rule."""
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return _profile_from_singular_values(s, max(M.shape), tol_factor).rank


def _svd_split(A: OperatorOnSpace, tol_factor: float):
    u, s, vh = np.linalg.svd(A.entries)
    r = _profile_from_singular_values(s, A.n, tol_factor).rank
    return u, vh, r


def kernel_basis(A: OperatorOnSpace, tol_factor: float = 1.0) -> SubspaceBasis:
    _, vh, r = _svd_split(A, tol_factor)
    return SubspaceBasis(A.space, vh[r:].conj().T, orthonormal=True)


def range_basis(A: OperatorOnSpace, tol_factor: float = 1.0) -> SubspaceBasis:
    u, _, r = _svd_split(A, tol_factor)
    return SubspaceBasis(A.space, u[:, :r], orthonormal=True)


def spectrum(A: OperatorOnSpace) -> np.ndarray:
    return np.linalg.eigvals(A.entries)


def solve(A: OperatorOnSpace, y: Vector, tol_factor: float = 1.0) -> Vector:
    _check_same_space(A.space, y.space)
    prof = rank_profile(A, tol_factor)
    if prof.rank < A.n:
        raise SingularOperator(f"numerical rank {prof.rank} < {A.n}")
    return Vector(A.space, np.linalg.solve(A.entries, y.coords))


def operator_norm_bound(T: np.ndarray, p: float) -> float:
    """Upper bound on the l_p -> l_p operator norm.

    Exact for p = 2 (largest singular value); Riesz-Thorin interpolation
    between the 1- and inf-norms otherwise.
    """
    if p == 2.0:
        return float(np.linalg.norm(T, 2))
    n1 = np.abs(T).sum(axis=0).max()
    ninf = np.abs(T).sum(axis=1).max()
    return float(n1 ** (1.0 / p) * ninf ** (1.0 - 1.0 / p))
