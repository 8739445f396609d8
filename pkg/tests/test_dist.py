from fractions import Fraction

import pytest

from threedot.dist import JointDist, equal, product, sigma_bound, tv_distance, within_sigma


def test_zero_mass_dropped_and_normalized():
    d = JointDist({("0",): Fraction(1), ("1",): Fraction(0)})
    assert len(d) == 1 and d.is_normalized() and d.exact


def test_mixed_arity_rejected():
    with pytest.raises(ValueError):
        JointDist({("0",): Fraction(1, 2), ("0", "1"): Fraction(1, 2)})


def test_marginal_regroup_prefix():
    d = JointDist({("01", "1"): Fraction(1, 2), ("11", "0"): Fraction(1, 2)})
    assert d.marginal(1).table == {("1",): Fraction(1, 2), ("0",): Fraction(1, 2)}
    assert d.flatten().table == {("011",): Fraction(1, 2), ("110",): Fraction(1, 2)}
    assert d.regroup([1, 2]).table == {("0", "11"): Fraction(1, 2), ("1", "10"): Fraction(1, 2)}
    assert d.prefix([1, 1]).table == {("0", "1"): Fraction(1, 2), ("1", "0"): Fraction(1, 2)}


def test_product_and_tv():
    a = JointDist({("0",): Fraction(1, 2), ("1",): Fraction(1, 2)})
    p = product([a, a])
    assert len(p) == 4 and p.is_normalized() and p.is_product()
    diag = JointDist({("0", "0"): Fraction(1, 2), ("1", "1"): Fraction(1, 2)})
    assert tv_distance(diag, p) == Fraction(1, 2)
    assert equal(p, p)
    assert tv_distance(diag, p) == tv_distance(p, diag)


def test_empirical_tables():
    d = JointDist.from_samples([("0",), ("1",), ("1",), ("1",)])
    assert d.n == 4 and not d.exact and d["1"] == 0.75
    ref = JointDist({("0",): Fraction(1, 4), ("1",): Fraction(3, 4)})
    assert within_sigma(d, ref)
    assert sigma_bound(0.5, 100) == pytest.approx(0.25)
