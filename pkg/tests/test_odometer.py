import itertools
from fractions import Fraction

import numpy as np
import pytest

from threedot import block, odometer
from threedot.dist import JointDist, tv_distance, within_sigma
from threedot.kernels import SkeletonOverflow
from threedot.odometer import (
    BadAlignment,
    CarryOverflow,
    SkeletonState,
    StationarySampleSpec,
    position_of_origin,
    shift_skeleton,
)

from oracles import skeleton_mixture


def S(*d):
    return SkeletonState(tuple(d))


def test_skeleton_sample():
    assert odometer.skeleton_sample(0, 1).digits == ()
    a = odometer.skeleton_sample(12, 77)
    assert a == odometer.skeleton_sample(12, 77)
    assert a.K == 12 and set(a.digits) <= {0, 1, 2}
    with pytest.raises(ValueError):
        odometer.skeleton_sample(-1, 0)


def test_skeleton_digit_frequencies():
    n = 100_000
    d = odometer.skeleton_digits_batch(n, 3, 5)
    for k in range(3):
        f = np.mean(d[:, k] == 1)
        assert abs(f - 1 / 3) <= 5 * np.sqrt(2 / 9 / n)
    # the scalar sampler is the first row of the batch
    assert tuple(d[0]) == odometer.skeleton_sample(3, 5).digits


def test_bad_digits():
    with pytest.raises(ValueError):
        S(0, 3)


def test_shift_examples():
    assert shift_skeleton(S(1, 2, 0)) == S(2, 2, 0)
    assert shift_skeleton(S(2, 2, 0)) == S(0, 0, 1)
    with pytest.raises(CarryOverflow):
        shift_skeleton(S(2, 2, 2))


@pytest.mark.parametrize("digits", list(itertools.product(range(3), repeat=3))[:20])
def test_three_shifts_restore_digit0(digits):
    s = S(*digits, 0, 0)
    t = shift_skeleton(shift_skeleton(shift_skeleton(s)))
    assert t.digits[0] == s.digits[0]


def test_position_of_origin():
    assert position_of_origin(S(0, 0, 0)) == 0
    assert position_of_origin(S(1, 2, 0)) == 7
    s = S(1, 2, 0)
    assert position_of_origin(shift_skeleton(s)) == 8
    assert odometer.skeleton_of_offset(7, 3) == s


def test_odometer_enumerates_offsets():
    for K in range(1, 7):
        assert odometer.offsets_by_iteration(K) == list(range(3 ** K))


def test_s0_orbit_periodic():
    s = S(0, 0, 0, 0, 0)
    orbit = []
    for _ in range(3 ** 5 - 1):
        orbit.append(s.digits[0])
        s = shift_skeleton(s)
    assert orbit == [0, 1, 2] * (len(orbit) // 3) + [0, 1, 2][: len(orbit) % 3]


@pytest.mark.parametrize("K", range(1, 7))
def test_shift_pushforward_uniform(K):
    law = odometer.shift_pushforward(K)
    assert len(law) == 3 ** K
    assert set(law.values()) == {Fraction(1, 3 ** K)}


def test_shift_invariance_statistical():
    n = 50_000
    d = odometer.skeleton_digits_batch(n, 4, 8)
    shifted = np.array([shift_skeleton(S(*row, 0)).digits[:4] for row in d])
    for k in range(4):
        for v in range(3):
            a, b = np.mean(d[:, k] == v), np.mean(shifted[:, k] == v)
            assert abs(a - b) <= 5 * np.sqrt(2 * (2 / 9) / n)


def test_covers():
    s = S(1, 2, 0)
    assert s.covers(-7, 27) and not s.covers(-8, 2) and not s.covers(19, 2)


def test_conditioned_all_zero_matches_block():
    skel = S(0)
    w = odometer.sample_windows(0, 3, 50_000, 4, skel)
    assert not np.any(w.sum(axis=1) == 3)
    assert not np.any(w[:, 0] ^ w[:, 1] ^ w[:, 2])


def test_conditioned_offset_reads_block_window():
    skel = S(1, 2, 0)
    n = 100_000
    w = odometer.sample_windows(-1, 3, n, 6, skel)
    law = block.window_distribution(6, 3)
    emp = JointDist.from_samples(("".join(map(str, r)),) for r in w)
    assert within_sigma(emp, law)


def test_unconditioned_fair_marginal():
    n = 200_000
    w = odometer.sample_windows(0, 1, n, 11)
    assert abs(w.mean() - 0.5) <= 5 * np.sqrt(0.25 / n)


def test_sample_window_spec():
    spec = StationarySampleSpec(-2, 5, 13)
    assert odometer.sample_window(spec) == odometer.sample_window(spec)
    assert len(odometer.sample_window(spec)) == 5
    with pytest.raises(ValueError):
        StationarySampleSpec(0, 0, 1)


def test_skeleton_overflow():
    with pytest.raises(SkeletonOverflow):
        odometer.sample_windows(-(2 * 3 ** 39) - 1, 1, 10, 1)


@pytest.mark.parametrize("start,length", [(0, 1), (0, 3), (1, 3), (-2, 3), (5, 2), (0, 4)])
def test_exact_law_brackets_prefix_enumeration(start, length):
    law = odometer.exact_window_law(start, length)
    assert law.is_normalized()
    for K in (5, 6):
        part, miss = skeleton_mixture(start, length, K)
        for k in law.support | part.support:
            assert part[k] <= law[k] <= part[k] + miss


def test_exact_law_is_shift_invariant():
    for length in (1, 2, 3, 4):
        ref = odometer.exact_window_law(0, length)
        for start in (-4, -1, 1, 2, 9):
            assert odometer.exact_window_law(start, length) == ref


def test_exact_law_length3():
    law = odometer.exact_window_law(0, 3)
    assert law["111"] == Fraction(1, 12)
    assert law["000"] == Fraction(1, 6)
    assert not law.is_uniform()


def test_exact_law_matches_samples():
    n = 300_000
    law = odometer.exact_window_law(0, 4)
    w = odometer.sample_windows(0, 4, n, 21)
    emp = JointDist.from_samples(("".join(map(str, r)),) for r in w)
    assert within_sigma(emp, law)


def test_stationarity_length1():
    rep = odometer.stationarity_check(1, 100_000, 3)
    assert rep.passed
    for s in rep.starts:
        assert abs(rep.freqs[s]["1"] - 0.5) <= 5 * np.sqrt(0.25 / 100_000)


def test_stationarity_contrast():
    good = odometer.stationarity_check(3, 200_000, 1)
    bad = odometer.stationarity_check(3, 200_000, 1, source="block")
    assert good.passed and not bad.passed
    assert abs(bad.freqs[0]["111"] - 0.0) == 0
    assert bad.max_tv > 0.1


def test_stationarity_rejects_long_words():
    with pytest.raises(ValueError):
        odometer.stationarity_check(7, 10, 0)


def test_conditional_triple_all_zero():
    rep = odometer.conditional_triple_check(1, S(0, 0, 0), 10_000, 1)
    assert rep.parity_violations == 0 and rep.pairwise_ok and rep.passed
    assert rep.exact_pairwise and not rep.exact_mutual


def test_conditional_triple_offset_adjusted():
    skel = S(1, 0)
    base = odometer.aligned_base(skel, 0)
    assert base == -1
    rep = odometer.conditional_triple_check(0, skel, 10_000, 2, base)
    assert rep.passed and rep.exact_pairwise and not rep.exact_mutual


def test_conditional_triple_misaligned():
    with pytest.raises(BadAlignment):
        odometer.conditional_triple_check(0, S(1, 0), 1000, 0, base=0)
    with pytest.raises(BadAlignment):
        odometer.conditional_triple_check(1, S(0), 1000, 0)


def test_origin_depends_on_past():
    assert odometer.origin_depends_on_past(S(2, 0))
    assert odometer.origin_depends_on_past(S(0, 2))
    assert not odometer.origin_depends_on_past(S(0, 1))
    for digits in itertools.product(range(3), repeat=4):
        s = S(*digits)
        o = position_of_origin(s)
        e = block.coord_expr(o)
        if 2 in digits:
            assert all(sid.index < o for sid in e.support)
        else:
            assert [sid.index for sid in e.support] == [o]


def test_conditioned_exprs_cover():
    with pytest.raises(ValueError):
        odometer.conditioned_exprs(S(0), [0, 3])
    e = odometer.conditioned_exprs(S(1, 2, 0), [-7, 0, 19])
    assert e == block.BlockGrid().exprs([0, 7, 26])


def test_tv_of_exact_and_block_differ():
    stat = odometer.exact_window_law(1, 3)
    blk = block.window_distribution(1, 3)
    assert tv_distance(stat, blk) > 0
