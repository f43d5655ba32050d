import math

import numpy as np
import pytest

from optrig.amplitude import Classification, generalized_amplitude_upper
from optrig.errors import Inconclusive, NonHilbert
from optrig.iteration import (
    check_asymptotic_regularity,
    is_primitive_contraction,
    iterate_to_limit,
    limit_projection,
    operator_norm_estimate,
    projection_product,
)
from optrig.space import OperatorOnSpace, SpaceSpec, SubspaceBasis
from optrig.suites import jordan_block, power_suite

from oracles import power_limit

M = OperatorOnSpace.from_array
E1 = SubspaceBasis(SpaceSpec(2), np.array([[1.0], [0.0]]))
DIAG = SubspaceBasis(SpaceSpec(2), np.array([[1.0], [1.0]]) / math.sqrt(2))
P1 = np.diag([1.0, 0.0])
P2 = np.full((2, 2), 0.5)


# ---------------------------------------------------------------- regularity


def test_regularity_examples():
    r = check_asymptotic_regularity(M(np.diag([1.0, 0.0])))
    assert r.verdict == "regular" and r and r.residuals[1] == 0
    r = check_asymptotic_regularity(M(jordan_block(2)))
    assert r.regular and np.all(r.residuals[2:] == 0)
    r = check_asymptotic_regularity(M(-np.eye(2)), n_max=50)
    assert r.verdict == "not-regular" and not r
    assert np.allclose(r.residuals, 2.0)


def test_regularity_blowup_and_inconclusive():
    r = check_asymptotic_regularity(M(2 * np.eye(2)))
    assert r.verdict == "not-regular"
    # slow geometric decay: residuals shrink but stay above tol within the budget
    r = check_asymptotic_regularity(M(np.diag([1.0, 0.999])), n_max=100)
    assert r.verdict == "inconclusive" and r.regular is None and not r
    with pytest.raises(ValueError):
        check_asymptotic_regularity(M(np.eye(2)), n_max=0)


def test_identity_minus_nilpotent_is_not_regular():
    # (I - Q)^n - (I - Q)^{n+1} = Q (I - Q)^n = Q for Q^2 = 0
    r = check_asymptotic_regularity(M(np.eye(2) - jordan_block(2)), n_max=200)
    assert r.verdict == "not-regular"
    assert np.allclose(r.residuals, 1.0)


# ---------------------------------------------------------------- powers


def test_diag_converges_to_kernel_projection():
    rep = iterate_to_limit(M(np.diag([1.0, 0.5])))
    assert rep.converged and not rep.divergence_detected
    assert np.allclose(rep.limit_matrix.entries, np.diag([1.0, 0.0]), atol=1e-9)
    assert rep.limit_is_projection and rep.limit_matches_decomposition


def test_identity_minus_nilpotent_blows_up_linearly():
    T = M(np.eye(2) - jordan_block(2))
    rep = iterate_to_limit(T, blowup=1e4)
    assert rep.divergence_detected and not rep.converged and rep.limit_matrix is None
    # ||(I - Q)^n||_max = n
    assert np.allclose(rep.iterate_max_norms[1:], np.arange(1, rep.n_iterations + 1))
    # linear growth never reaches the default threshold within 10^5 powers
    with pytest.raises(Inconclusive) as err:
        iterate_to_limit(T, n_max=1000)
    assert err.value.report is not None and not err.value.report.converged


def test_product_of_two_projections():
    T = projection_product([E1, DIAG])
    assert np.allclose(T.entries, [[0.5, 0.5], [0.0, 0.0]])
    rep = iterate_to_limit(T)
    assert rep.converged and rep.limit_matches_decomposition
    assert np.allclose(rep.limit_matrix.entries, 0, atol=1e-9)
    assert np.allclose(limit_projection(T), 0)


def test_limit_projection_direction():
    # T = diag(1, 0.5): N(I - T) = span{e1}, R(I - T) = span{e2}
    assert np.allclose(limit_projection(M(np.diag([1.0, 0.5]))), np.diag([1.0, 0.0]))
    assert limit_projection(M(np.eye(2) - jordan_block(2))) is None


def test_trace_rows():
    rep = iterate_to_limit(M(np.diag([1.0, 0.5])))
    rows = list(rep.trace_rows())
    assert len(rows) == rep.n_iterations + 1
    assert rows[0] == (0, pytest.approx(0.5), 1.0)


def test_iterate_validation():
    with pytest.raises(ValueError):
        iterate_to_limit(M(np.eye(2)), blowup=1.0)
    with pytest.raises(ValueError):
        iterate_to_limit(M(np.eye(2)), n_max=0)


@pytest.mark.parametrize("fx", [f for f in power_suite() if f.converges], ids=lambda f: f.name)
def test_limits_match_direct_powering(fx):
    rep = iterate_to_limit(fx.operator, blowup=fx.blowup)
    assert rep.converged
    assert rep.limit_is_projection and rep.limit_matches_decomposition
    ref = power_limit(fx.operator.entries)
    assert np.abs(rep.limit_matrix.entries - ref).max() <= 1e-6


# ---------------------------------------------------------------- primitive contractions


def test_primitive_examples():
    assert is_primitive_contraction(M(np.diag([1.0, 0.5])))
    assert not is_primitive_contraction(M(np.diag([1.0, -1.0])))
    assert not is_primitive_contraction(M(2 * np.eye(2)))
    assert is_primitive_contraction(M((P1 + P2) / 2))
    # an oblique projection has the right spectrum but norm sqrt(2)
    assert not is_primitive_contraction(M([[1.0, 1.0], [0.0, 0.0]]))


def test_average_of_projections_gives_below_pi():
    T = (P1 + P2) / 2
    rep = generalized_amplitude_upper(M(np.eye(2) - T))
    assert rep.classification is Classification.BELOW_PI


def test_nilpotent_regular_but_at_pi():
    Q = M(jordan_block(3))
    assert check_asymptotic_regularity(Q).regular
    assert generalized_amplitude_upper(Q).classification is Classification.AT_PI


def test_operator_norm_estimate():
    t = np.array([[1.0, 2.0], [0.0, 1.0]])
    assert operator_norm_estimate(M(t)) == pytest.approx(np.linalg.norm(t, 2))
    # diagonal operators have norm max |d_j| for every p
    assert operator_norm_estimate(M(np.diag([0.5, -2.0, 1.0]), 3.0)) == pytest.approx(2.0, rel=1e-8)
    rng = np.random.default_rng(1)
    X = rng.standard_normal((20_000, 2))
    sampled = np.max(np.sum(np.abs(X @ t.T) ** 3, 1) ** (1 / 3) / np.sum(np.abs(X) ** 3, 1) ** (1 / 3))
    assert operator_norm_estimate(M(t, 3.0)) >= sampled - 1e-9


@pytest.mark.parametrize("fx", [f for f in power_suite() if f.kind == "primitive-contraction"],
                         ids=lambda f: f.name)
def test_primitive_fixtures_converge(fx):
    assert is_primitive_contraction(fx.operator)
    assert iterate_to_limit(fx.operator).converged


# ---------------------------------------------------------------- projection products


def test_projection_product_examples():
    assert np.allclose(projection_product([E1]).entries, P1)
    assert np.allclose(projection_product([E1, E1]).entries, P1)
    avg = projection_product([E1, DIAG], mode="convex_combination")
    assert np.allclose(avg.entries, (P1 + P2) / 2)
    w = projection_product([E1, DIAG], mode="convex_combination", weights=[0.25, 0.75])
    assert np.allclose(w.entries, 0.25 * P1 + 0.75 * P2)
    empty = SubspaceBasis(SpaceSpec(2), np.zeros((2, 0)))
    assert np.allclose(projection_product([empty, E1]).entries, 0)


def test_projection_product_errors():
    with pytest.raises(NonHilbert):
        projection_product([SubspaceBasis(SpaceSpec(2, 3.0), np.array([[1.0], [0.0]]))])
    for kwargs in ({"mode": "convex_combination", "weights": [0.5, 0.6]},
                   {"mode": "convex_combination", "weights": [1.0, 0.0]},
                   {"mode": "product", "weights": [0.5, 0.5]},
                   {"mode": "sum"}):
        with pytest.raises(ValueError):
            projection_product([E1, DIAG], **kwargs)
    with pytest.raises(ValueError):
        projection_product([])
