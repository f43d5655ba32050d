"""Fixture suites with complementarity known by construction.

Every fixture records whether C^n = R(A) (+) N(A) holds for structural
reasons (a Jordan block at 0 of size >= 2 breaks it, an "invertible (+) 0"
shape guarantees it), so the oracle itself is checked against ground truth
and not only against the amplitude classifier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .space import OperatorOnSpace


@dataclass(frozen=True, eq=False)
class Fixture:
    name: str
    operator: OperatorOnSpace
    complementary: bool
    kind: str


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def jordan_block(n: int, eig: complex = 0.0) -> np.ndarray:
    return eig * np.eye(n) + np.eye(n, k=1)


def cyclic_shift(n: int) -> np.ndarray:
    """e_j -> e_{j+1 mod n}."""
    return np.roll(np.eye(n), 1, axis=0)


def direct_sum(*blocks) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    i = 0
    for b in blocks:
        m = b.shape[0]
        out[i : i + m, i : i + m] = b
        i += m
    return out


def oblique_projection_2x2(gamma: float) -> np.ndarray:
    return np.array([[1.0, gamma], [0.0, 0.0]])


def _invertible(rng, n, shift=1.5):
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)
    return g + shift * haar_unitary(rng, n)


def _sp_product(rng, n, r):
    """S P with S invertible commuting with P, P an oblique projection of rank r.

    Built as W (M (+) 0) W^{-1}; W mildly conditioned so that the exact
    rank structure survives rounding.
    """
    W = haar_unitary(rng, n) @ np.diag(rng.uniform(0.6, 1.6, n)) @ haar_unitary(rng, n)
    blk = direct_sum(_invertible(rng, r), np.zeros((n - r, n - r)))
    return W @ blk @ np.linalg.inv(W)


def _with_nilpotent(rng, n, jsize):
    """Q (M (+) J) Q^H with J a nilpotent Jordan block of size jsize >= 2."""
    r = n - jsize
    blocks = [jordan_block(jsize) * rng.uniform(0.5, 2.0)]
    if r:
        blocks.insert(0, _invertible(rng, r))
    Q = haar_unitary(rng, n)
    return Q @ direct_sum(*blocks) @ Q.conj().T


def _low_rank(rng, n, r):
    s = np.r_[rng.uniform(0.3, 2.0, r), np.zeros(n - r)]
    return haar_unitary(rng, n) @ np.diag(s) @ haar_unitary(rng, n)


def curated_suite() -> list[Fixture]:
    rng = np.random.default_rng(20240601)
    fx: list[Fixture] = []

    def add(name, a, comp, kind, p=2.0):
        fx.append(Fixture(name, OperatorOnSpace.from_array(a, p), comp, kind))

    for n in (1, 2, 3, 4):
        add(f"identity-{n}", np.eye(n), True, "identity")
    add("zero-2", np.zeros((2, 2)), True, "zero")
    for diag in ((1, 0), (1, 1, 0), (1, 0, 0), (0, 1, 0, 1)):
        add("diagproj-" + "".join(map(str, diag)), np.diag(diag).astype(float), True, "diagonal-projection")
    add("diag-2,-1,0", np.diag([2.0, -1.0, 0.0]), True, "diagonal")
    for gamma in (0.5, 1.0, 4.0):
        add(f"oblique-{gamma}", oblique_projection_2x2(gamma), True, "oblique-projection")
        a = np.zeros((3, 3))
        a[0, 0] = a[1, 1] = 1.0
        a[0, 2] = a[1, 2] = gamma
        add(f"oblique3-{gamma}", a, True, "oblique-projection")
    add("oblique-1.0-p3", oblique_projection_2x2(1.0), True, "oblique-projection", p=3.0)
    for n in (2, 3, 4):
        add(f"jordan0-{n}", jordan_block(n), False, "nilpotent")
        Q = haar_unitary(rng, n)
        add(f"jordan0-{n}-rot", Q @ jordan_block(n) @ Q.conj().T, False, "nilpotent")
    add("jordan0-3-p3", jordan_block(3), False, "nilpotent", p=3.0)
    add("jordan0-2(+)jordan0-2", direct_sum(jordan_block(2), jordan_block(2)), False, "nilpotent")
    for n in (2, 3, 4, 5):
        add(f"invertible-{n}", _invertible(rng, n), True, "invertible")
    add("invertible-3-p3", _invertible(rng, 3), True, "invertible", p=3.0)
    add("jordan1-3", jordan_block(3, 1.0), True, "invertible")
    for n, r in ((2, 1), (3, 1), (3, 2), (4, 2), (4, 3), (5, 3)):
        add(f"sp-{n}-{r}", _sp_product(rng, n, r), True, "sp-product")
    add("sp-4-2-p3", _sp_product(rng, 4, 2), True, "sp-product", p=3.0)
    for n, j in ((3, 2), (4, 2), (4, 3), (5, 2)):
        add(f"inv(+)jordan-{n}-{j}", _with_nilpotent(rng, n, j), False, "nilpotent-part")
    add("jordan(+)zero", direct_sum(jordan_block(2), np.zeros((1, 1))), False, "nilpotent-part")
    for m in (2, 3, 4):
        add(f"shift{m}(+)0", direct_sum(cyclic_shift(m), np.zeros((1, 1))), True, "cyclic-shift")
    add("shift4(+)0-p3", direct_sum(cyclic_shift(4), np.zeros((1, 1))), True, "cyclic-shift", p=3.0)
    add("shift4", cyclic_shift(4), True, "cyclic-shift")
    return fx


RANDOM_KINDS = ("invertible", "low-rank", "sp-product", "nilpotent-part", "nilpotent")


def random_fixture(rng: np.random.Generator, index: int) -> Fixture:
    n = int(rng.integers(2, 7))
    p = float(rng.choice([2.0, 3.0]))
    kind = RANDOM_KINDS[int(rng.integers(len(RANDOM_KINDS)))]
    if kind == "invertible":
        a, comp = _invertible(rng, n), True
    elif kind == "low-rank":
        a, comp = _low_rank(rng, n, int(rng.integers(1, n))), True
    elif kind == "sp-product":
        a, comp = _sp_product(rng, n, int(rng.integers(1, n))), True
    elif kind == "nilpotent-part":
        a, comp = _with_nilpotent(rng, n, int(rng.integers(2, n + 1))), False
    else:
        Q = haar_unitary(rng, n)
        a, comp = Q @ jordan_block(n) @ Q.conj().T, False
    return Fixture(f"random-{index:03d}-{kind}-n{n}-p{p:g}", OperatorOnSpace.from_array(a, p), comp, kind)


def random_suite(count: int = 500, seed: int = 7) -> list[Fixture]:
    rng = np.random.default_rng(seed)
    return [random_fixture(rng, i) for i in range(count)]


# --------------------------------------------------------------------------
# Power-convergence fixtures: T^n converges  <=>  C^n = R(I-T) (+) N(I-T)


@dataclass(frozen=True, eq=False)
class PowerFixture:
    """An operator T whose powers converge (or blow up) by construction.

    ``blowup`` is the divergence threshold to use with ``iterate_to_limit``:
    powers of I - Q with Q^2 = 0 grow only linearly and need a lower one.
    """

    name: str
    operator: OperatorOnSpace
    converges: bool
    kind: str
    blowup: float = 1e8


def _orth_projector(cols: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(cols)
    return q @ q.conj().T


def _random_cols(rng, n, k):
    return rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))


def power_suite() -> list[PowerFixture]:
    rng = np.random.default_rng(20240602)
    fx: list[PowerFixture] = []

    def add(name, t, conv, kind, p=2.0, blowup=1e8):
        fx.append(PowerFixture(name, OperatorOnSpace.from_array(t, p), conv, kind, blowup))

    # products and averages of orthogonal projections
    P1 = _orth_projector(np.array([[1.0], [0.0]]))
    P2 = _orth_projector(np.array([[1.0], [1.0]]))
    add("lines-45deg-product", P1 @ P2, True, "projection-product")
    add("lines-45deg-average", (P1 + P2) / 2, True, "projection-average")
    common = _random_cols(rng, 3, 1)
    Pa = _orth_projector(np.c_[common, _random_cols(rng, 3, 1)])
    Pb = _orth_projector(np.c_[common, _random_cols(rng, 3, 1)])
    add("planes-C3-product", Pa @ Pb, True, "projection-product")
    add("planes-C3-average", 0.3 * Pa + 0.7 * Pb, True, "projection-average")
    # shared plane span{e1, e2}, kept exact so that N(I - T) has no rounding noise
    common = np.diag(np.r_[1.0, 1.0, 0.0, 0.0])
    extra = (np.array([0, 0, 1.0, 0]), np.array([0, 0, 1.0, 1.0]), np.array([0, 0, 1.0, -2.0]))
    Ps = [common + np.outer(v, v) / (v @ v) for v in extra]
    add("three-C4-product", Ps[0] @ Ps[1] @ Ps[2], True, "projection-product")
    add("three-C4-average", sum(Ps) / 3, True, "projection-average")
    Pl = [_orth_projector(_random_cols(rng, 3, 1)) for _ in range(2)]
    add("generic-lines-C3-product", Pl[0] @ Pl[1], True, "projection-product")
    sub = _random_cols(rng, 4, 1)
    add("nested-C4-product", _orth_projector(sub) @ _orth_projector(np.c_[sub, _random_cols(rng, 4, 1)]),
        True, "projection-product")
    add("same-plane-product", Pa @ Pa, True, "projection-product")

    # primitive contractions
    add("diag-1-0.5", np.diag([1.0, 0.5]), True, "primitive-contraction")
    add("diag-1-0.5-p3", np.diag([1.0, 0.5]), True, "primitive-contraction", p=3.0)
    U = haar_unitary(rng, 4)
    add("normal-C4", U @ np.diag([1.0, 1.0, 0.3, -0.5j]) @ U.conj().T, True, "primitive-contraction")
    U = haar_unitary(rng, 5)
    lam = np.r_[1.0, rng.uniform(0, 0.95, 4) * np.exp(2j * np.pi * rng.uniform(size=4))]
    add("normal-C5", U @ np.diag(lam) @ U.conj().T, True, "primitive-contraction")
    U = haar_unitary(rng, 4)
    V = U @ np.diag(np.r_[1.0, np.exp(2j * np.pi * rng.uniform(size=3))]) @ U.conj().T
    add("unitary-average", (np.eye(4) + V) / 2, True, "primitive-contraction")
    add("half-jordan(+)1", direct_sum(0.5 * jordan_block(3), np.eye(1)), True, "primitive-contraction")

    # asymptotically regular, convergent, not contractions
    add("oblique-projection", oblique_projection_2x2(1.0), True, "idempotent")
    add("oblique-projection-p3", oblique_projection_2x2(1.0), True, "idempotent", p=3.0)
    add("nilpotent-3", jordan_block(3), True, "nilpotent")
    add("damped-unitary", 0.9 * haar_unitary(rng, 3), True, "power-bounded")

    # I - nilpotent and relatives: R(I-T) and N(I-T) intersect, powers grow
    add("I-jordan3", np.eye(3) - jordan_block(3), False, "identity-minus-nilpotent")
    Q = haar_unitary(rng, 4)
    add("I-jordan4-rot", np.eye(4) - Q @ jordan_block(4) @ Q.conj().T, False, "identity-minus-nilpotent")
    add("I-jordan3-p3", np.eye(3) - jordan_block(3), False, "identity-minus-nilpotent", p=3.0)
    add("I+jordan3", np.eye(3) + jordan_block(3), False, "identity-plus-nilpotent")
    add("I-jordan2", np.eye(2) - jordan_block(2), False, "identity-minus-nilpotent", blowup=1e4)
    add("I-(jordan2(+)jordan2)", np.eye(4) - direct_sum(jordan_block(2), jordan_block(2)), False,
        "identity-minus-nilpotent", blowup=1e4)
    add("contraction(+)I-jordan3", direct_sum(np.diag([0.5, -0.2]), np.eye(3) - jordan_block(3)), False,
        "identity-minus-nilpotent")
    return fx
