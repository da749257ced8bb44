from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from coincidence.core import (
    Coupling,
    SignedMatrix,
    condition_h,
    independence_coupling,
    indeterminacy_coupling,
    index_of_coincidence,
    is_monotone,
    new_marginal,
    to_original_order,
    uniform_law,
)
from coincidence.errors import EmptyMarginal, MarginalMismatch, NonPositiveWeight, NotNormalized

from conftest import margins


def test_new_marginal_sorts_and_records_permutation():
    m = new_marginal([0.6, 0.4])
    np.testing.assert_array_equal(m.weights, [0.4, 0.6])
    np.testing.assert_array_equal(m.perm, [1, 0])
    np.testing.assert_array_equal(m.original(), [0.6, 0.4])


def test_new_marginal_ties_are_stable():
    m = new_marginal([0.5, 0.5])
    np.testing.assert_array_equal(m.perm, [0, 1])


@pytest.mark.parametrize(
    "raw, exc",
    [
        ([0.2, 0.0, 0.8], NonPositiveWeight),
        ([0.5, -0.1, 0.6], NonPositiveWeight),
        ([0.4, 0.7], NotNormalized),
        ([], EmptyMarginal),
    ],
)
def test_new_marginal_rejects(raw, exc):
    with pytest.raises(exc):
        new_marginal(raw)


def test_new_marginal_renormalizes_within_slack():
    m = new_marginal([0.3, 0.7 + 5e-10])
    assert abs(m.weights.sum() - 1) <= 1e-12


def test_exact_marginal_from_strings():
    m = new_marginal(["2/3", "1/3"], exact=True)
    assert m.exact
    assert list(m.weights) == [Fraction(1, 3), Fraction(2, 3)]


@pytest.mark.parametrize("n", [1, 2, 4])
def test_uniform_law(n):
    np.testing.assert_allclose(uniform_law(n).weights, np.full(n, 1 / n), rtol=0, atol=0)


def test_uniform_law_zero():
    with pytest.raises(EmptyMarginal):
        uniform_law(0)


def test_independence_examples():
    h = new_marginal([0.5, 0.5])
    np.testing.assert_allclose(independence_coupling(h, h).entries, 0.25)
    m = new_marginal([0.4, 0.6])
    np.testing.assert_allclose(independence_coupling(m, m).entries, [[0.16, 0.24], [0.24, 0.36]], atol=1e-15)
    point = new_marginal([1.0])
    np.testing.assert_allclose(independence_coupling(point, new_marginal([0.3, 0.7])).entries, [[0.3, 0.7]])


def test_indeterminacy_examples():
    m = new_marginal([0.4, 0.6])
    np.testing.assert_allclose(indeterminacy_coupling(m, m).entries, [[0.15, 0.25], [0.25, 0.35]], atol=1e-15)
    h = new_marginal([0.5, 0.5])
    np.testing.assert_allclose(indeterminacy_coupling(h, h).entries, 0.25, atol=1e-15)
    s = new_marginal([0.1, 0.9])
    np.testing.assert_allclose(indeterminacy_coupling(s, s).entries, [[-0.15, 0.25], [0.25, 0.65]], atol=1e-15)


def test_indeterminacy_exact_mode():
    s = new_marginal(["1/10", "9/10"], exact=True)
    e = indeterminacy_coupling(s, s).entries
    assert e[0, 0] == Fraction(-3, 20)
    assert e.sum() == 1


def test_index_of_coincidence_examples():
    assert index_of_coincidence(np.full((2, 2), 0.25)) == 0.25
    assert index_of_coincidence(np.array([[0, 0.1], [0.1, 0.8]])) == pytest.approx(0.66, abs=1e-15)
    assert index_of_coincidence(np.array([[1.0]])) == 1.0


def test_condition_h_examples():
    m = new_marginal([0.4, 0.6])
    s = new_marginal([0.1, 0.9])
    assert condition_h(m, m)
    assert not condition_h(s, s)
    for p, q in [(1, 1), (2, 5), (7, 3)]:
        assert condition_h(uniform_law(p), uniform_law(q))


def test_is_monotone_examples():
    assert not is_monotone(np.array([[0.3, 0.2], [0.2, 0.3]]))
    assert is_monotone(np.array([[0.1, 0.2, 0.2, 0.5]]))


def test_signed_matrix_checks_sums():
    with pytest.raises(MarginalMismatch):
        SignedMatrix(np.array([[0.5, 0.5]]), np.array([0.9]), np.array([0.5, 0.5]))


def test_coupling_rejects_negative_entries():
    s = new_marginal([0.1, 0.9])
    with pytest.raises(MarginalMismatch):
        Coupling.from_entries(indeterminacy_coupling(s, s).entries, s, s)


def test_original_order_roundtrip():
    mu = new_marginal([0.5, 0.2, 0.3])
    nu = new_marginal([0.7, 0.3])
    pi = independence_coupling(mu, nu)
    np.testing.assert_allclose(pi.in_original_order(), np.outer([0.5, 0.2, 0.3], [0.7, 0.3]), atol=1e-15)
    np.testing.assert_array_equal(to_original_order(pi.entries, mu, nu), pi.in_original_order())


@settings(max_examples=200, deadline=None)
@given(margins(), margins())
def test_independence_reproduces_margins(mu, nu):
    e = independence_coupling(mu, nu).entries
    np.testing.assert_allclose(e.sum(axis=1), mu.weights, atol=1e-12)
    np.testing.assert_allclose(e.sum(axis=0), nu.weights, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(margins(), margins())
def test_indeterminacy_satisfies_equalities_and_monotone(mu, nu):
    pp = indeterminacy_coupling(mu, nu)
    e = pp.entries
    np.testing.assert_allclose(e.sum(axis=1), mu.weights, atol=1e-12)
    np.testing.assert_allclose(e.sum(axis=0), nu.weights, atol=1e-12)
    assert abs(e.sum() - 1) <= 1e-12
    assert is_monotone(pp)
    assert condition_h(mu, nu) == (e.min() >= -1e-12)


@settings(max_examples=200, deadline=None)
@given(margins(), margins())
def test_ic_lower_bound(mu, nu):
    p, q = mu.size, nu.size
    assert index_of_coincidence(np.full((p, q), 1 / (p * q))) == pytest.approx(1 / (p * q), rel=1e-12)
    assert index_of_coincidence(independence_coupling(mu, nu)) >= 1 / (p * q) - 1e-15
