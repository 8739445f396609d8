import itertools
from fractions import Fraction

import pytest

from threedot import block, field, joinings, odometer
from threedot.dist import JointDist, product, tv_distance, within_sigma
from threedot.joinings import (
    BlockSource,
    FieldSource,
    IIDSource,
    Rot3Source,
    StationarySource,
    cylinder,
    cylinder_index,
    delta_at,
    delta_p,
    delta_pq,
    joining_distance,
    pairwise_tv_max,
    product_distance_profile,
    triple_tv,
    truncation_bound,
)

EVEN = {"000", "011", "101", "110"}


def parity_oracle():
    """Uniform law on even-parity triples and its distance to uniform on all 8."""
    law = JointDist({tuple(w): Fraction(1, 4) for w in EVEN})
    uniform = JointDist({tuple(w): Fraction(1, 8) for w in map("".join,
                         itertools.product("01", repeat=3))})
    return law, tv_distance(law, uniform)


def test_parity_oracle_value():
    _, tv = parity_oracle()
    # |1/4 - 1/8| on 4 cells and 1/8 on 4 cells, halved
    assert tv == Fraction(1, 2)


def test_delta_zero_is_diagonal():
    for src in (BlockSource(), IIDSource(), FieldSource()):
        p = (0, 0) if src.name == "field" else 0
        j = delta_p(src, p, 2)
        assert all(a == b for a, b in j.support)


def test_block_delta_p2_product():
    j = delta_p(BlockSource(), 2, 1)
    assert j.is_product()


def test_iid_delta_is_product():
    for p in range(2, 6):
        assert delta_p(IIDSource(), p, 2).is_product()
    assert not delta_p(IIDSource(), 1, 2).is_product()


@pytest.mark.parametrize("n", range(0, 7))
def test_block_triple_signature(n):
    j = delta_pq(BlockSource(), 3 ** n, 3 ** n, 1)
    law, tv = parity_oracle()
    assert j == law
    assert pairwise_tv_max(j) == 0
    assert triple_tv(j) == tv


@pytest.mark.parametrize("n", range(0, 5))
def test_field_triple_signature(n):
    s = 2 ** n
    law, tv = parity_oracle()
    j = delta_at(FieldSource(), [(0, 0), (0, s), (s, 0)], 1)
    assert j == law and pairwise_tv_max(j) == 0 and triple_tv(j) == tv
    assert delta_pq(FieldSource(), (0, s), (s, -s), 1) == j


def test_delta_pq_positions():
    assert delta_pq(BlockSource(), 4, 7, 2) == delta_at(BlockSource(), [0, 4, 11], 2)


def test_generic_triple_is_product():
    for p, q in [(10, 17), (28, 40), (100, 31)]:
        j = delta_pq(BlockSource(), p, q, 1)
        assert triple_tv(j) == 0 and pairwise_tv_max(j) == 0


def test_iid_all_zero():
    for p, q in [(2, 2), (3, 5)]:
        j = delta_pq(IIDSource(), p, q, 2)
        assert triple_tv(j) == 0 and pairwise_tv_max(j) == 0


def test_triple_diagonal():
    j = delta_pq(BlockSource(), 0, 0, 2)
    assert all(a == b == c for a, b, c in j.support)


def test_marginals_equal_window_laws():
    j = delta_pq(BlockSource(), 5, 4, 3)
    assert j.marginal(0).flatten() == block.window_distribution(0, 3)
    assert j.marginal(1).flatten() == block.window_distribution(5, 3)
    assert j.marginal(2).flatten() == block.window_distribution(9, 3)
    jf = delta_p(FieldSource(), (1, 2), 2)
    assert jf.marginal(1).flatten() == field.window_distribution(field.Window2D((1, 2), 2, 2))


def test_stationary_joining_marginals_within_sigma():
    src = StationarySource()
    n = 100_000
    j = delta_pq(src, 1, 2, 2, n=n, rng_seed=3)
    ref = odometer.exact_window_law(0, 2)
    for m in j.marginals():
        assert within_sigma(m, ref, n)


def test_stationary_exact_law_single_window():
    src = StationarySource()
    assert src.law([[0, 1, 2]]).flatten() == odometer.exact_window_law(0, 3)
    with pytest.raises(NotImplementedError):
        src.law([[0], [5]])


def test_rot3_law():
    j = delta_p(Rot3Source(), 1, 2)
    assert len(j) == 3
    assert j[("01", "12")] == Fraction(1, 3)


def test_cylinder_enumeration():
    words = [cylinder(n) for n in range(14)]
    assert words[:6] == ["0", "1", "00", "01", "10", "11"]
    assert words[6] == "000"
    assert all(cylinder_index(w) == n for n, w in enumerate(words))
    assert cylinder(3, "012") == "00"
    assert all(cylinder_index(cylinder(n, "012"), "012") == n for n in range(50))


def test_truncation_bound_value():
    # sum over (n, n') not both below depth of 2^-(n+n'), total mass 4
    for depth in (1, 3, 6):
        omitted = 4 - sum(Fraction(1, 2 ** (a + b)) for a in range(depth) for b in range(depth))
        assert truncation_bound(depth, 2) == pytest.approx(float(omitted))


def test_distance_zero_on_self_and_symmetric():
    a = delta_p(BlockSource(), 1, 4)
    b = product(a.marginals())
    assert joining_distance(a, a, 6).value == 0
    assert joining_distance(a, b, 6).value == joining_distance(b, a, 6).value


def test_distance_monotone_in_depth():
    a = delta_p(BlockSource(), 1, 4)
    b = product(a.marginals())
    vals = [joining_distance(a, b, d).value for d in range(1, 7)]
    assert vals == sorted(vals)
    bounds = [joining_distance(a, b, d).bound for d in range(1, 7)]
    assert bounds == sorted(bounds, reverse=True)


def test_distance_diagonal_vs_product_fair_bits():
    a = delta_p(IIDSource(), 0, 8)
    b = delta_p(IIDSource(), 8, 8)
    d = joining_distance(a, b, 8).value
    # cylinder pair ("1", "1") has index (1, 1): |1/2 - 1/4| * 2^-2
    assert d >= Fraction(1, 4) * Fraction(1, 4)
    assert d > 0


def test_distance_short_words_rejected():
    a = delta_p(IIDSource(), 0, 1)
    with pytest.raises(ValueError):
        joining_distance(a, a, 4)


def test_profile_block():
    rows = product_distance_profile(BlockSource(), 1, [(3 ** n, 3 ** n) for n in range(1, 7)])
    _, tv = parity_oracle()
    for r in rows:
        assert r.pairwise_tv_max == 0 and r.triple_tv == tv
        assert r.d_truncated > 0 and r.trunc_bound > 0


def test_profile_iid_zero():
    rows = product_distance_profile(IIDSource(), 1, [(3, 4), (5, 5)], depth=4)
    assert all(r.triple_tv == 0 and r.pairwise_tv_max == 0 and r.d_truncated == 0 for r in rows)


def test_make_source():
    assert isinstance(joinings.make_source("rot3"), Rot3Source)
    with pytest.raises(ValueError):
        joinings.make_source("nope")
