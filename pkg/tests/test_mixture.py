import numpy as np
import pytest

from coincidence.core import indeterminacy_coupling, new_marginal, uniform_law
from coincidence.errors import ConditionHViolated
from coincidence.measure import eligible_pair, random_recipe
from coincidence.mixture import decompose, draw, draw_many


def _tv(u, v, p, q, target):
    counts = np.bincount(u * q + v, minlength=p * q).reshape(p, q)
    return 0.5 * np.abs(counts / len(u) - target).sum()


def test_uniform_margins():
    u = uniform_law(2)
    d = decompose(u, u)
    assert (d.w1, d.w2, d.w3) == (0.0, 0.0, 1.0)
    assert d.comp1_row is None and d.comp2_col is None
    a, b, comp = draw_many(d, 10**6, np.random.default_rng(1))
    assert (comp == 3).all()
    counts = np.bincount(a * 2 + b, minlength=4)
    expected = len(a) / 4
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < 16.27  # 99.9% quantile, 3 degrees of freedom


def test_two_point_example():
    m = new_marginal([0.4, 0.6])
    d = decompose(m, m)
    assert d.weights == pytest.approx([0.2, 0.2, 0.6], abs=1e-15)
    np.testing.assert_allclose(d.comp1_row, [0, 1], atol=1e-15)
    np.testing.assert_allclose(d.matrix(), [[0.15, 0.25], [0.25, 0.35]], atol=1e-15)
    u, v, _ = draw_many(d, 10**6, np.random.default_rng(2))
    assert _tv(u, v, 2, 2, d.matrix()) <= 0.01


def test_tight_case():
    m = new_marginal([0.25, 0.75])
    d = decompose(m, m)
    assert d.w3 == 0.0
    assert d.w1 == pytest.approx(0.5) and d.w2 == pytest.approx(0.5)


def test_requires_condition_h():
    s = new_marginal([0.1, 0.9])
    with pytest.raises(ConditionHViolated):
        decompose(s, s)


def test_component_one_distribution():
    mu, nu = new_marginal([0.2, 0.3, 0.5]), new_marginal([0.3, 0.7])
    d = decompose(mu, nu)
    u, _, comp = draw_many(d, 10**6, np.random.default_rng(3), original=False)
    sel = u[comp == 1]
    freq = np.bincount(sel, minlength=3) / len(sel)
    assert 0.5 * np.abs(freq - d.comp1_row).sum() <= 0.01


def test_reconstruction_on_random_pairs():
    rng = np.random.default_rng(5)
    for _ in range(2000):
        p, q = (int(x) for x in rng.integers(1, 9, size=2))
        mu, nu = eligible_pair(random_recipe(p, q, rng), p, q)
        d = decompose(mu, nu)
        assert min(d.weights) >= 0 and d.weights.sum() == pytest.approx(1, abs=1e-12)
        assert d.w1 == pytest.approx(1 - p * mu.weights[0], abs=1e-12)
        assert d.w2 == pytest.approx(1 - q * nu.weights[0], abs=1e-12)
        np.testing.assert_allclose(d.matrix(), indeterminacy_coupling(mu, nu).entries, atol=1e-12)


def test_draws_use_original_order():
    mu, nu = new_marginal([0.6, 0.4]), new_marginal([0.7, 0.3])
    d = decompose(mu, nu)
    u, v, _ = draw_many(d, 10**6, np.random.default_rng(6))
    target = indeterminacy_coupling(mu, nu).in_original_order()
    assert _tv(u, v, 2, 2, target) <= 0.01


def test_single_draw_and_replay():
    d = decompose(new_marginal([0.3, 0.7]), new_marginal([0.45, 0.55]))
    a = [draw(d, np.random.default_rng(9)) for _ in range(3)]
    assert len(set(a)) == 1
    assert all(0 <= x < 2 for pair in a for x in pair)
    x = draw_many(d, 100, np.random.default_rng(9))
    y = draw_many(d, 100, np.random.default_rng(9))
    assert all((s == t).all() for s, t in zip(x, y))
