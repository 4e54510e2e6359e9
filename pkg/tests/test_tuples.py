from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, nint

from d4lab.tuples import (
    NotATuple,
    Regularity,
    c_family,
    c_family_closed_form,
    classify_quadruple,
    d_minus,
    d_plus,
    family_predicates,
    make_pair,
    make_quadruple,
    make_triple,
    pair_descent_step,
    parse_tuple_literal,
    regular_triple_c,
    tuple_to_json,
    verify_tuple,
)

from conftest import d4_pairs


def squares_ok(elems):
    """Oracle: every pairwise product plus 4 is a square, checked by search."""
    for u, v in combinations(elems, 2):
        n = u * v + 4
        k = 0
        while k * k < n:
            k += 1
        if k * k != n:
            return False
    return True


def test_make_pair_examples():
    assert make_pair(1, 5).r == 3
    assert make_pair(4620, 31680).r == 12098
    assert make_pair(5, 1) == make_pair(1, 5)
    with pytest.raises(NotATuple):
        make_pair(1, 2)
    with pytest.raises(NotATuple):
        make_pair(3, 3)


def test_verify_tuple_examples():
    assert verify_tuple([1, 5, 12, 96])
    assert squares_ok([1, 5, 12, 96])
    assert not verify_tuple([1, 2, 3])
    assert not verify_tuple([1, 5, 12, 0])
    assert not verify_tuple([1, 5, 5])


def test_triple_and_quadruple_constructors():
    t = make_triple(12, 1, 5)
    assert t.elements() == (1, 5, 12)
    assert (t.r, t.s, t.t) == (3, 4, 8)
    with pytest.raises(NotATuple):
        make_triple(1, 5, 13)
    q = make_quadruple(96, 12, 5, 1)
    assert q.elements() == (1, 5, 12, 96)
    assert (q.x, q.y, q.z) == (10, 22, 34)
    with pytest.raises(NotATuple):
        make_quadruple(1, 5, 12, 95)


def test_regular_triple_c_examples():
    assert regular_triple_c(make_pair(1, 5)) == 12
    assert regular_triple_c(make_pair(1, 12)) == 21
    assert regular_triple_c(make_pair(4620, 31680)) == 60496
    assert verify_tuple([4620, 31680, 60496])


def test_d_plus_minus_examples():
    t = make_triple(1, 5, 12)
    assert d_plus(t) == 96
    assert d_minus(t) == 0
    t2 = make_triple(1, 12, 21)
    d = d_plus(t2)
    assert d > 21 and squares_ok([1, 12, 21, d])


def test_half_gap():
    t = make_triple(1, 5, 12)
    assert t.half_gap == (12 * 3 - 4 * 8) // 2 == 2


def test_c_family_examples():
    p = make_pair(1, 12)
    assert c_family(p, 0, 1) == 0
    assert c_family(p, 2, 1) == 320 == 16 * 21 - 16
    assert c_family(p, 2, -1) == 96 == 16 * 5 + 16
    assert c_family(p, 1, 1) == 21
    with pytest.raises(ValueError):
        c_family(p, -1, 1)
    with pytest.raises(ValueError):
        c_family(p, 1, 0)


def test_descent_examples():
    step = pair_descent_step(make_triple(1, 5, 12))
    assert step.s_prime == 2
    # t' = (rt - bs)/2 = (24 - 20)/2
    assert step.t_prime == 2
    assert step.c_prime == 0 and step.relation == "zero"
    step = pair_descent_step(make_triple(1, 12, 21))
    assert step.s_prime == 2 and step.c_prime == 0
    step = pair_descent_step(make_triple(1, 12, 320))
    assert step.c_prime == 21 and step.relation == "gt_b"


def test_classify_quadruple_examples():
    assert classify_quadruple(make_quadruple(1, 5, 12, 96)) is Regularity.REGULAR_PLUS
    with pytest.raises(NotATuple):
        make_quadruple(1, 5, 12, 0)


def test_classify_quadruple_minus():
    # off the regular value c_1^+, d_- is a genuine positive extension
    p = make_pair(1, 5)
    c = c_family(p, 2, 1)
    t = make_triple(1, 5, c)
    dp = d_plus(t)
    dm = d_minus(t)
    assert dm > 0
    q = make_quadruple(1, 5, c, dm)
    assert classify_quadruple(q) in (Regularity.REGULAR_MINUS, Regularity.REGULAR_PLUS)
    assert classify_quadruple(make_quadruple(1, 5, c, dp)) is Regularity.REGULAR_PLUS


def test_parse_tuple_literal():
    assert parse_tuple_literal(["1", " 5", "12"]) == [1, 5, 12]
    assert parse_tuple_literal([3, "-4"]) == [3, -4]
    for bad in (["twelve"], ["1.5"], [True]):
        with pytest.raises(ValueError):
            parse_tuple_literal(bad)
    big = 10**40 + 7
    assert tuple_to_json([big]) == [str(big)]


def test_family_predicates():
    p = make_pair(1, 12)
    preds = family_predicates(p, 21)
    assert preds["is_c1"] and not preds["c2plus_to_c4plus"]
    assert family_predicates(p, 96)["is_c2minus"]
    assert family_predicates(p, c_family(p, 3, 1))["c2plus_to_c4plus"]
    far = family_predicates(p, c_family(p, 6, -1))
    assert far["ge_c5minus"] and not far["ge_c4minus_a_ge_35"]


@settings(max_examples=60)
@given(d4_pairs(), st.integers(min_value=1, max_value=8), st.sampled_from([1, -1]))
def test_family_members_are_triples(pair, nu, tau):
    c = c_family(pair, nu, tau)
    if c > pair.b:
        assert verify_tuple([pair.a, pair.b, c])
    else:
        # only c_1^- can fall at or below b
        assert (nu, tau) == (1, -1)
        if c > 0 and c != pair.a:
            assert verify_tuple([pair.a, pair.b, c])


@settings(max_examples=40)
@given(d4_pairs(r_max=500), st.integers(min_value=0, max_value=12), st.sampled_from([1, -1]))
def test_family_closed_form(pair, nu, tau):
    with mp.workprec(512):
        val = c_family_closed_form(pair, nu, tau, mp)
        exact = c_family(pair, nu, tau)
        assert abs(val - exact) < 0.5
        assert int(nint(val)) == exact


@settings(max_examples=60)
@given(d4_pairs(), st.integers(min_value=2, max_value=7), st.sampled_from([1, -1]))
def test_descent_steps_down_the_family(pair, nu, tau):
    c = c_family(pair, nu, tau)
    step = pair_descent_step(make_triple(pair.a, pair.b, c))
    assert step.c_prime == c_family(pair, nu - 1, tau)


@settings(max_examples=60)
@given(d4_pairs(), st.integers(min_value=1, max_value=6), st.sampled_from([1, -1]))
def test_d_plus_extends(pair, nu, tau):
    c = c_family(pair, nu, tau)
    if c <= pair.b:
        return
    t = make_triple(pair.a, pair.b, c)
    dp = d_plus(t)
    assert dp > c
    assert verify_tuple([pair.a, pair.b, c, dp])
    dm = d_minus(t)
    if c == regular_triple_c(pair):
        assert dm == 0
    if dm:
        assert verify_tuple([pair.a, pair.b, c, dm])


def test_c_gap_on_brute_force_triples():
    # every triple from a direct search with c <= 3000 is regular or far from b
    for a in range(1, 60):
        for b in range(a + 1, 3000):
            if not verify_tuple([a, b]):
                continue
            r = make_pair(a, b).r
            for c in range(b + 1, 3001):
                if verify_tuple([a, b, c]):
                    assert c == a + b + 2 * r or c > max(a * b + a + b, 4 * b)
