from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from threedot.dist import product
from threedot.gf2 import (
    AffineSystem,
    BitExpr,
    LengthBound,
    SeedId,
    SeedTag,
    are_independent,
    are_mutually_independent,
    bit_seed,
    dyadic_log2,
    joint_distribution,
    rank,
    seed_bit,
    system_probability,
    xor,
    xor_all,
)

from oracles import enumerate_law, system_fraction

s = [BitExpr.seed(SeedTag.X, i) for i in range(8)]
ONE = BitExpr.constant(1)


def test_xor_cancels():
    assert xor(s[0], s[0]).is_zero()


def test_xor_two_seeds():
    e = xor(s[0], s[1])
    assert set(e.support) == {SeedId(SeedTag.X, 0), SeedId(SeedTag.X, 1)}
    assert e.const == 0


def test_xor_constants_cancel():
    e = xor(s[0] ^ ONE, s[1] ^ ONE)
    assert e == xor(s[0], s[1])


def test_seed_encoding_roundtrip():
    for tag in SeedTag:
        for idx in (-5, -1, 0, 1, 7, 10 ** 6):
            sid = SeedId(tag, idx)
            assert bit_seed(seed_bit(sid)) == sid


def test_from_support_duplicates_cancel():
    a = SeedId(SeedTag.H, 3)
    assert BitExpr.from_support([a, a]).is_zero()


def test_system_probability_examples():
    assert system_probability([(s[0], 0)]) == Fraction(1, 2)
    assert system_probability([(s[0] ^ s[1], 0), (s[1] ^ s[2], 0)]) == Fraction(1, 4)
    assert system_probability([(s[0], 0), (s[0], 1)]) == 0
    assert system_probability(AffineSystem.of([])) == 1


def test_joint_distribution_examples():
    d = joint_distribution([s[0], s[1], s[0] ^ s[1]])
    assert d.table == {(w,): Fraction(1, 4) for w in ("000", "011", "101", "110")}
    assert joint_distribution([s[0]]).table == {("0",): Fraction(1, 2), ("1",): Fraction(1, 2)}
    assert joint_distribution([s[0], s[0]]).table == {("00",): Fraction(1, 2),
                                                      ("11",): Fraction(1, 2)}


def test_joint_distribution_constants():
    d = joint_distribution([ONE, s[0] ^ ONE])
    assert d.table == {("10",): Fraction(1, 2), ("11",): Fraction(1, 2)}


def test_length_bound():
    with pytest.raises(LengthBound):
        joint_distribution([s[0]] * 25)
    joint_distribution([s[0]] * 24)
    with pytest.raises(LengthBound):
        joint_distribution([s[0]] * 5, bound=4)


def test_independence_examples():
    assert are_independent([s[0]], [s[1]])
    assert are_independent([s[0]], [s[0] ^ s[1]])
    assert not are_independent([s[0], s[1]], [s[0] ^ s[1]])


def test_mutual_independence_of_parity_triple():
    g = [[s[0]], [s[1]], [s[0] ^ s[1]]]
    assert not are_mutually_independent(g)
    assert all(are_independent(a, b) for a, b in ((g[0], g[1]), (g[0], g[2]), (g[1], g[2])))


def test_dyadic_log2():
    assert dyadic_log2(Fraction(1, 16)) == -4
    assert dyadic_log2(Fraction(1)) == 0
    assert dyadic_log2(Fraction(1, 12)) is None
    assert dyadic_log2(Fraction(0)) is None


def test_xor_all():
    assert xor_all(s[:3]) == s[0] ^ s[1] ^ s[2]
    assert xor_all([]).is_zero()


# property tests against brute-force enumeration

exprs_st = st.builds(
    lambda m, c: BitExpr.from_support([SeedId(SeedTag.X, i) for i in range(10) if m >> i & 1], c),
    st.integers(0, (1 << 10) - 1), st.integers(0, 1))


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(exprs_st, st.integers(0, 1)), min_size=1, max_size=8))
def test_system_probability_matches_enumeration(rows):
    p = system_probability(rows)
    assert p == system_fraction(rows)
    assert p == 0 or dyadic_log2(p) is not None
    assert p == 0 or -dyadic_log2(p) <= len(rows)


@settings(max_examples=100, deadline=None)
@given(st.lists(exprs_st, min_size=1, max_size=7))
def test_joint_distribution_matches_enumeration(exprs):
    d = joint_distribution(exprs)
    assert d == enumerate_law(exprs)
    assert d.is_normalized()
    assert d.is_uniform()
    assert len(d) == 2 ** rank([BitExpr(e.mask) for e in exprs])


@settings(max_examples=100, deadline=None)
@given(st.lists(exprs_st, min_size=2, max_size=7), st.data())
def test_marginals_consistent(exprs, data):
    drop = data.draw(st.integers(0, len(exprs) - 1))
    d = joint_distribution(exprs, [1] * len(exprs))
    keep = [i for i in range(len(exprs)) if i != drop]
    assert d.marginal(keep).flatten() == joint_distribution([exprs[i] for i in keep])


@settings(max_examples=150, deadline=None)
@given(st.lists(exprs_st, min_size=1, max_size=4), st.lists(exprs_st, min_size=1, max_size=4))
def test_independence_rank_form_matches_definition(a, b):
    joint = joint_distribution(a + b, (len(a), len(b)))
    by_definition = joint == product([joint_distribution(a), joint_distribution(b)])
    assert are_independent(a, b) == by_definition
