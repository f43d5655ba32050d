"""Acceptance criteria, one test per criterion (7 is split into a, b, c).

Each test records a PASS/FAIL line in ``conftest.ACCEPTANCE``; the lines are
printed in the terminal summary.  Criteria 1, 2, 5, 7c and 9 share the
amplitude reports of the curated and random suites, computed once per
session.
"""

import math
import time

import numpy as np
import pytest

from optrig import cli
from optrig.amplitude import Classification, generalized_amplitude_upper, krein_amplitude, pencil_membership
from optrig.angle import angle
from optrig.continuation import certify_invertible_by_continuation, pencil_lower_bound_check
from optrig.decomposition import complementarity_oracle
from optrig.iteration import check_asymptotic_regularity, iterate_to_limit
from optrig.space import OperatorOnSpace, Vector
from optrig.suites import curated_suite, cyclic_shift, direct_sum, power_suite, random_fixture, random_suite

import conftest

M = OperatorOnSpace.from_array
SHIFT = direct_sum(cyclic_shift(4), np.zeros((1, 1)))


def record(key, passed, detail):
    conftest.ACCEPTANCE[key] = (bool(passed), detail)
    print(f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}")


def _classify(fixtures):
    rows = []
    start = time.perf_counter()
    for fx in fixtures:
        dec = complementarity_oracle(fx.operator)
        rep = generalized_amplitude_upper(fx.operator)
        rows.append((fx, dec, rep))
    return rows, time.perf_counter() - start


@pytest.fixture(scope="session")
def curated():
    return _classify(curated_suite())


@pytest.fixture(scope="session")
def randoms():
    return _classify(random_suite(500, seed=7))


def _agrees(dec, rep):
    return (rep.classification is Classification.BELOW_PI) == dec.complementary


# ---------------------------------------------------------------- 1, 2


def test_criterion_01_curated_equivalence(curated):
    rows, elapsed = curated
    bad = [fx.name for fx, dec, rep in rows if not _agrees(dec, rep)]
    truth = [fx.name for fx, dec, _ in rows if dec.complementary != fx.complementary]
    kinds = {fx.kind for fx, _, _ in rows}
    ok = len(rows) >= 40 and not bad and not truth and elapsed <= 120.0
    record("1", ok, f"{len(rows) - len(bad)}/{len(rows)} agree, {len(kinds)} kinds, {elapsed:.1f} s"
           + (f", disagree: {bad}" if bad else "") + (f", oracle vs construction: {truth}" if truth else ""))
    assert len(rows) >= 40
    assert not bad and not truth
    assert elapsed <= 120.0


def test_criterion_02_random_equivalence(randoms):
    rows, elapsed = randoms
    n = len(rows)
    bad = [(fx.name, rep.best_cosine) for fx, dec, rep in rows if not _agrees(dec, rep)]
    for name, cos in bad:
        print(f"  disagreement {name}: best cosine {cos:.6f}")
    unexplained = [(name, cos) for name, cos in bad if cos > -0.95]
    rate = 1 - len(bad) / n
    ok = n == 500 and rate >= 0.98 and not unexplained
    record("2", ok, f"agreement {n - len(bad)}/{n} = {rate:.1%}, disagreements {bad}, {elapsed:.0f} s")
    assert n == 500
    assert rate >= 0.98
    assert not unexplained


# ---------------------------------------------------------------- 3


def test_criterion_03_closed_forms():
    I = M(np.eye(2))
    cases = [
        ("diag(1,0)", [[1.0, 0.0], [0.0, 0.0]], 0.0),
        ("nilpotent", [[0.0, 1.0], [0.0, 0.0]], -1.0),
        ("oblique", [[1.0, 1.0], [0.0, 0.0]], -math.sqrt(2) / 2),
    ]
    errs = {name: abs(angle(M(a), I).cosine - want) for name, a, want in cases}
    ok = max(errs.values()) <= 1e-4
    record("3", ok, ", ".join(f"{k} err {v:.1e}" for k, v in errs.items()))
    assert ok


# ---------------------------------------------------------------- 4


def _random_complementary_p2(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    i = 0
    while len(out) < count:
        fx = random_fixture(rng, i)
        i += 1
        if fx.complementary and fx.operator.n <= 5:
            out.append(M(fx.operator.entries, 2.0))
    return out


def test_criterion_04_angle_identity():
    gaps = []
    for A in _random_complementary_p2(50, seed=4):
        dec = complementarity_oracle(A)
        lhs = angle(A, dec.factor_S).angle
        rhs = angle(dec.projection_P, A.like(np.eye(A.n))).angle
        gaps.append(abs(lhs - rhs))
    worst = max(gaps)
    record("4", len(gaps) == 50 and worst <= 1e-3, f"50 fixtures, max |angle(A,S) - angle(P,I)| = {worst:.2e}")
    assert worst <= 1e-3


# ---------------------------------------------------------------- 5


def test_criterion_05_lower_bound_sampling(curated, randoms):
    checked = 0
    failures = []
    for rows in (curated[0], randoms[0]):
        for fx, _, rep in rows:
            for cand in rep.candidates:
                delta = 1 + cand.report.cosine
                if not 0 < delta <= 2 or cand.report.degenerate:
                    continue
                checked += 1
                if not pencil_lower_bound_check(fx.operator, cand.pencil, min(delta, 2.0), 10_000):
                    failures.append((fx.name, cand.label, delta))
    ok = checked > 0 and not failures
    record("5", ok, f"{checked} (A, T, delta) triples checked, {len(failures)} violations"
           + (f": {failures[:5]}" if failures else ""))
    assert checked > 0
    assert not failures


# ---------------------------------------------------------------- 6


def test_criterion_06_continuation():
    rng = np.random.default_rng(6)
    worst_err, worst_L, step_mismatch = 0.0, 0.0, []
    for k in range(100):
        n = int(rng.integers(1, 9))
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        # numerical range in the open right half plane: A + tI is invertible for all t >= 0
        a = rng.uniform(1.05, 2.0) * np.linalg.norm(g, 2) * np.eye(n) + g
        A, I = M(a), M(np.eye(n))
        y = Vector.from_array(rng.standard_normal(n) + 1j * rng.standard_normal(n))
        t0 = float(rng.uniform(0.1, 5.0))
        x, cert = certify_invertible_by_continuation(A, I, t0, y)
        ref = np.linalg.solve(a, y.coords)
        worst_err = max(worst_err, np.linalg.norm(x.coords - ref) / np.linalg.norm(ref))
        worst_L = max(worst_L, max(cert.contraction_factors, default=0.0))
        if cert.n_steps != math.ceil(t0 / (0.9 * cert.mu)) + 1:
            step_mismatch.append(k)
    ok = worst_err <= 1e-8 and worst_L < 1 and not step_mismatch
    record("6", ok, f"100 instances, max rel err {worst_err:.1e}, max L {worst_L:.3f}, "
           f"step-count mismatches {step_mismatch}")
    assert worst_err <= 1e-8
    assert worst_L < 1
    assert not step_mismatch


# ---------------------------------------------------------------- 7


def test_criterion_07a_krein_of_shift():
    # This criterion asks for krein >= pi - 0.05.  The ray cosine of the 4x4 shift
    # plus a zero block is -max(|cos theta|, |sin theta|), whose largest value over
    # theta is -1/sqrt(2), so the Krein amplitude is 3 pi / 4 and the criterion
    # cannot hold.  It is kept as stated.
    k = krein_amplitude(M(SHIFT))
    ok = k >= math.pi - 0.05
    record("7a", ok, f"krein_amplitude(C4 (+) 0) = {k:.6f} (3 pi/4 = {3 * math.pi / 4:.6f}), "
           f"required >= {math.pi - 0.05:.6f}")
    assert ok


def test_criterion_07b_generalized_of_shift():
    rep = generalized_amplitude_upper(M(SHIFT))
    ok = rep.generalized_upper_bound <= math.pi / 2 + 0.05
    record("7b", ok, f"generalized_upper_bound(C4 (+) 0) = {rep.generalized_upper_bound:.6f} "
           f"via {rep.best_label}")
    assert ok


def test_criterion_07c_subset_monotonicity(curated, randoms):
    checked, bad = 0, []
    for rows in (curated[0], randoms[0]):
        for fx, _, rep in rows:
            if not any(c.label.startswith("ray") for c in rep.candidates):
                continue
            checked += 1
            if rep.generalized_upper_bound > rep.krein_amplitude + 1e-6:
                bad.append(fx.name)
    ok = checked > 0 and not bad
    record("7c", ok, f"{checked} matrices with a member ray, {len(bad)} violations {bad[:5]}")
    assert ok


# ---------------------------------------------------------------- 8


def test_criterion_08_power_suite():
    fixtures = power_suite()
    problems, regular = [], 0
    for fx in fixtures:
        T = fx.operator
        IT = T.like(np.eye(T.n) - T.entries)
        rep = iterate_to_limit(T, blowup=fx.blowup)
        below = generalized_amplitude_upper(IT).classification is Classification.BELOW_PI
        comp = complementarity_oracle(IT).complementary
        regular += bool(check_asymptotic_regularity(T, n_max=2000, blowup=fx.blowup))
        if not (rep.converged == below == comp == fx.converges):
            problems.append(f"{fx.name}: conv={rep.converged} below={below} comp={comp}")
        if rep.converged and not (rep.limit_is_projection and rep.limit_matches_decomposition):
            problems.append(f"{fx.name}: limit mismatch")
        if fx.kind == "identity-minus-nilpotent" and not rep.divergence_detected:
            problems.append(f"{fx.name}: no divergence detected")
    ok = len(fixtures) >= 20 and not problems
    record("8", ok, f"{len(fixtures)} fixtures ({regular} asymptotically regular), "
           f"{len(problems)} problems {problems[:5]}")
    assert len(fixtures) >= 20
    assert not problems


# ---------------------------------------------------------------- 9


def test_criterion_09_nilpotent_at_pi(curated, randoms):
    nil = [(fx, rep) for rows in (curated[0], randoms[0]) for fx, _, rep in rows if fx.kind == "nilpotent"]
    bad = [fx.name for fx, rep in nil
           if rep.classification is not Classification.AT_PI or rep.best_cosine > -0.999]
    worst = max(rep.best_cosine for _, rep in nil)
    ok = len(nil) > 0 and not bad
    record("9", ok, f"{len(nil)} nilpotent Jordan fixtures, worst best cosine {worst:.6f}, failures {bad}")
    assert ok


# ---------------------------------------------------------------- 10


def test_criterion_10_validate_suite_determinism(tmp_path):
    outs = []
    out = tmp_path / "report.json"
    for _ in range(2):
        code = cli.run(["--seed", "0", "--out", str(out), "validate-suite"])
        assert code == 0
        outs.append(out.read_bytes())
    same = outs[0] == outs[1]
    record("10", same, f"two validate-suite runs, {len(outs[0])} bytes each, identical={same}")
    assert same
