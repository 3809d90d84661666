from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import dblquad

from kecover.singexp import (
    BudgetExceeded,
    Classification,
    MonomialSum,
    classify_at_threshold,
    exponent_to_criterion,
    exponent_to_criterion_via_criteria,
    ord_bound,
    reduced_integral,
    shell_integral,
    threshold,
)


@pytest.mark.parametrize("m, expected", [((1,), 1), ((2, 2), 1), ((2, 3, 6), 1), ((3, 4), Fraction(7, 12))])
def test_threshold(m, expected):
    assert threshold(m) == expected


def test_ord_bound():
    assert ord_bound(1) == 1
    assert ord_bound(5) == Fraction(1, 5)
    with pytest.raises(ValueError):
        ord_bound(0)


@pytest.mark.parametrize("m, beta, expected", [((1,), 3, True), ((2, 2), 1, False), ((1, 1, 1), Fraction(1, 2), True)])
def test_exponent_to_criterion(m, beta, expected):
    assert exponent_to_criterion(m, beta) is expected


@given(
    st.lists(st.integers(1, 6), min_size=1, max_size=4),
    st.fractions(min_value=Fraction(1, 20), max_value=10),
)
def test_exponent_criterion_agrees_with_criteria_module(m, beta):
    assert exponent_to_criterion(m, beta) == exponent_to_criterion_via_criteria(m, beta)


def test_monomial_validation():
    with pytest.raises(ValueError):
        MonomialSum(())
    with pytest.raises(ValueError):
        MonomialSum((0, 2))
    assert MonomialSum.parse("2,3").exponents == (2, 3)


def test_one_dimensional_shells_are_exact():
    # int_{2^-j-1}^{2^-j} s^{a - 2 lam} ds in closed form
    m, lam = 3, 0.2
    a = 2 / m - 1 - 2 * lam
    for j in range(6):
        lo, hi = 0.5 ** (j + 1), 0.5**j
        exact = (hi ** (a + 1) - lo ** (a + 1)) / (a + 1)
        assert shell_integral((m,), lam, j) == pytest.approx(exact, rel=1e-13)


def test_two_dimensional_shells_sum_to_product_integral():
    # lam = 0 factorizes: int s1^0 ds1 * int s2^(-1/3) ds2 = 1 * 3/2
    total = sum(shell_integral((2, 3), 0.0, j) for j in range(200))
    assert total == pytest.approx(1.5, rel=1e-10)


def test_first_shell_against_adaptive_quadrature():
    # m = (1, 1): integrand s1 s2 (s1 + s2)^(-2 lam) on [0,1]^2 minus [0,1/2]^2
    lam = 0.3
    f = lambda y, x: x * y * (x + y) ** (-2 * lam)  # noqa: E731
    full, _ = dblquad(f, 0, 1, 0, 1, epsabs=1e-13)
    inner, _ = dblquad(f, 0, 0.5, 0, 0.5, epsabs=1e-13)
    assert shell_integral((1, 1), lam, 0) == pytest.approx(full - inner, rel=1e-10)


@pytest.mark.parametrize(
    "m, lam, expected",
    [
        ((1,), 0.4, Classification.CONVERGENT),
        ((2, 2), 0.9, Classification.CONVERGENT),
        ((2, 2), 1.1, Classification.DIVERGENT),
        ((2,), 0.45, Classification.CONVERGENT),
        ((2,), 0.55, Classification.DIVERGENT),
    ],
)
def test_reduced_integral_examples(m, lam, expected):
    result = reduced_integral(m, lam)
    assert result.classification is expected
    assert len(result.estimates) == 12 and len(result.growth_ratios) == 11


def test_at_threshold_is_inconclusive():
    assert reduced_integral((2, 2), 1.0).classification is Classification.INCONCLUSIVE


@pytest.mark.parametrize("m, eps", [((1,), 0.1), ((2, 2), 0.1), ((3, 3, 3), 0.15)])
def test_classify_at_threshold(m, eps):
    out = classify_at_threshold(m, eps)
    assert out == {"below": Classification.CONVERGENT, "above": Classification.DIVERGENT}


def test_classify_epsilon_domain():
    with pytest.raises(ValueError):
        classify_at_threshold((1,), 0.3)


@pytest.mark.parametrize("m", range(1, 7))
@pytest.mark.parametrize("factor", [0.8, 1.2])
def test_one_dimensional_sweep_matches_exact_condition(m, factor):
    lam = factor / m
    expected = Classification.CONVERGENT if lam < 1 / m else Classification.DIVERGENT
    assert reduced_integral((m,), lam).classification is expected


def test_budget():
    with pytest.raises(BudgetExceeded):
        reduced_integral((1, 1, 1, 1, 1), 0.5)
    with pytest.raises(BudgetExceeded):
        reduced_integral((1,), 0.5, levels=13)
    with pytest.raises(ValueError):
        reduced_integral((1,), 0.5, levels=2)
    with pytest.raises(ValueError):
        reduced_integral((1,), 0.0)


@settings(max_examples=15, deadline=None)
@given(st.permutations([2, 3, 5]), st.floats(0.2, 1.5))
def test_permutation_invariance(perm, lam):
    a = np.array(reduced_integral((2, 3, 5), lam, levels=6).estimates)
    b = np.array(reduced_integral(tuple(perm), lam, levels=6).estimates)
    assert np.max(np.abs(a - b) / np.abs(a)) < 1e-10


@pytest.mark.parametrize("m", [(1,), (2,), (5,)])
def test_monotone_in_lambda_in_one_dimension(m):
    lams = np.linspace(0.05, 1.5, 15) / m[0]
    est = np.array([reduced_integral(m, lam, levels=6).estimates for lam in lams])
    assert np.all(np.diff(est, axis=0) >= 0)


@pytest.mark.parametrize("m", [(2, 2), (1, 1), (3, 3, 3), (2, 3, 5)])
def test_inner_shells_monotone_in_lambda(m):
    # s_1 + ... + s_k <= 1 on shells j >= log2(k), where the integrand grows with lambda
    first = int(np.ceil(np.log2(len(m))))
    lams = np.linspace(0.05, 1.5, 15)
    for j in range(first, first + 6):
        values = [shell_integral(m, lam, j) for lam in lams]
        assert np.all(np.diff(values) >= 0)


def test_outer_shell_can_decrease_with_lambda():
    # on shell 0 the sum exceeds 1 for k >= 2, so the total is not monotone in lambda
    m = (1, 1)
    assert shell_integral(m, 0.5, 0) < shell_integral(m, 0.1, 0)


def test_result_serialization():
    d = reduced_integral((2,), 0.3, levels=4).to_dict()
    assert d["classification"] == "Convergent"
    assert set(d) == {"lambda", "estimates", "classification", "growth_ratios"}
