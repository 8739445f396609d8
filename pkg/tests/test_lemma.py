import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from threedot import lemma
from threedot.joinings import BlockSource, FieldSource, IIDSource, Rot3Source, StationarySource
from oracles import skeleton_mixture
from threedot.lemma import (
    NonUniform,
    check_lemma_instance,
    classify_dichotomy,
    independent_triple,
    triple_from_function,
    word_census,
)


def test_xor_instance():
    v = check_lemma_instance(lemma.xor_triple())
    assert v.same_marginal and v.pairwise_independent and v.functional and v.uniform
    assert v.status == "uniform"


def test_mod3_instance():
    v = check_lemma_instance(lemma.mod3_triple())
    assert v.hypotheses_met and v.uniform


def test_independent_nonuniform_instance():
    v = check_lemma_instance(independent_triple([0.3, 0.7]))
    assert not v.functional and not v.uniform
    assert v.status == "hypotheses unmet" and v.consistent
    assert json.loads(v.to_json())["status"] == "hypotheses unmet"


def test_exact_independent_nonuniform():
    v = check_lemma_instance(independent_triple([Fraction(1, 3), Fraction(2, 3)]))
    assert v.same_marginal and v.pairwise_independent and not v.functional


def test_non_pairwise_instance():
    t = triple_from_function(lambda x, y: x, [Fraction(1, 2)] * 2)
    v = check_lemma_instance(t)
    assert not v.pairwise_independent and v.consistent


def test_alphabet_one_vacuous():
    rep = lemma.lemma_search(1)
    assert rep.counterexample is None
    t = triple_from_function(lambda x, y: 0, [Fraction(1)])
    assert check_lemma_instance(t).uniform


def test_search_alphabet_two():
    rep = lemma.lemma_search(2)
    assert rep.functions == 16
    assert rep.counterexample is None
    assert rep.grid_hits > 0


def test_search_rejects_large_alphabet():
    with pytest.raises(ValueError):
        lemma.lemma_search(5)


def test_latin_squares_count():
    assert len(lemma.latin_squares(2)) == 2
    assert len(lemma.latin_squares(3)) == 12


def test_latin_squares_meet_hypotheses_only_when_uniform():
    pts, lcm = lemma.rational_grid(3, 6)
    for f in lemma.latin_squares(3):
        for mu in pts:
            t = triple_from_function(lambda x, y: f[x * 3 + y], [Fraction(int(m), lcm) for m in mu])
            v = check_lemma_instance(t)
            if v.hypotheses_met:
                assert v.uniform
        full = triple_from_function(lambda x, y: f[x * 3 + y], [Fraction(1, 3)] * 3)
        assert check_lemma_instance(full).hypotheses_met


def test_rational_grid():
    pts, lcm = lemma.rational_grid(2, 4)
    assert lcm == 12
    assert all(sum(p) == lcm for p in pts)
    assert len(pts) == len({tuple(p) for p in pts})


def test_solver_finds_no_nonuniform_point():
    xor = (0, 1, 1, 0)
    assert lemma._exact_counterexample(xor, 2, (0, 1)) is None
    sol, null = lemma._solve_exact([[Fraction(1), Fraction(1)]], [Fraction(1)], 2)
    assert sol == [1, 0] and null == [[-1, 1]]
    assert lemma._solve_exact([[Fraction(1)], [Fraction(1)]], [Fraction(1), Fraction(2)], 1) is None


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=9, max_size=9),
       st.lists(st.integers(0, 6), min_size=3, max_size=3).filter(lambda w: sum(w) > 0))
def test_random_functional_triples_consistent(f, weights):
    mu = [Fraction(w, sum(weights)) for w in weights]
    t = triple_from_function(lambda x, y: f[x * 3 + y], mu)
    assert check_lemma_instance(t).consistent


@pytest.mark.parametrize("m", [1, 2])
def test_gf2_word_triples_consistent(m):
    verdicts = [check_lemma_instance(t) for t in lemma.gf2_word_triples(m)]
    assert len(verdicts) == (2 * 2 ** m) ** m
    assert all(v.consistent for v in verdicts)
    assert any(v.hypotheses_met for v in verdicts)


def test_block_census():
    c = word_census(BlockSource(), 3)
    assert c.p[1] == 2 and c.p[2] == 4 and c.p[3] == 4
    assert c.a[1] == 2 and c.a[2] == 1
    d = classify_dichotomy(c)
    assert d.verdict == "undecided" and not d.monotone


def test_field_census():
    c = word_census(FieldSource(), 6)
    assert all(c.p[m] == 2 ** m for m in range(1, 7))
    assert all(a == 2 for a in c.a.values())


def test_rot3_census():
    c = word_census(Rot3Source(), 8)
    assert all(p == 3 for p in c.p.values())
    d = classify_dichotomy(c)
    assert d.verdict == "periodic" and d.entropy_bits == 0 and d.m0 == 1


def test_iid_census():
    d = classify_dichotomy(word_census(IIDSource(), 8))
    assert d.verdict == "entropy>=log2" and d.entropy_bits == 1


def test_stationary_census_not_uniform():
    with pytest.raises(NonUniform):
        word_census(StationarySource(), 3)
    c = word_census(StationarySource(), 5, strict=False)
    assert not c.rows[2].uniform
    # word counts agree with the support of the skeleton-prefix mixture
    for m in range(1, 7):
        part, _ = skeleton_mixture(0, m, 6)
        assert len(c.laws[m]) == len(part)
    # without uniform extensions the ratio p_{m+1}/p_m need not be monotone
    assert c.a[4] < c.a[5]


def test_dichotomy_never_periodic_with_growth():
    for src in (IIDSource(), FieldSource()):
        d = classify_dichotomy(word_census(src, 5))
        assert d.verdict != "periodic"
        assert d.entropy_bits >= 1


def test_classify_undecided_profile():
    rows = [lemma.CensusRow(1, 2, Fraction(3, 2), True, 1.0),
            lemma.CensusRow(2, 3, Fraction(4, 3), True, 0.79)]
    d = classify_dichotomy(lemma.WordCensus(rows, {}))
    assert d.verdict == "undecided" and d.monotone
