import pytest
from hypothesis import given, settings, strategies as st

from lcmlab.bs import (BsMonoid, bs_caps, bs_class_of, bs_height, bs_normalize, bs_right_lcm,
                       bs_scale, reduce_exponents)
from lcmlab.core import ClassId, Disjoint, NoScale, UnknownWithBound, UsageError, compare_lcm_with_oracle, elements_up_to

PARAMS = [(3, 2), (1, 2), (4, 2), (1, -2), (-3, 2), (2, 3), (2, -3)]

word = st.lists(st.sampled_from(["a", "b"]), max_size=8).map("".join)


def test_normal_form_examples():
    M = BsMonoid(3, 2)
    assert M.format(M.normalize("b^5 a")) == "bs(3,2):1|6"
    assert M.normalize("b^5 a") == M.normalize("b a b^6")
    assert BsMonoid(1, -2).format(BsMonoid(1, -2).normalize("b^2 a")) == "bs(1,-2):0|-1"
    assert bs_normalize("", 3, 2) == M.identity


def test_height_scale_class():
    s = bs_normalize("abab", 3, 2)
    assert bs_height(s) == 2 and bs_scale(s) == 4
    assert bs_class_of(s) == ClassId(4, s.digits)


def test_caps_and_lcm():
    M = BsMonoid(1, 2)
    a, ba = M.normalize("a"), M.normalize("ba")
    assert not bs_caps(a, ba)
    assert bs_right_lcm(a, ba) == Disjoint()
    res = bs_right_lcm(a, M.normalize("b^2"))
    assert res.r == M.normalize("ab")


def test_left_divide_example():
    M = BsMonoid(3, 2)
    assert M.left_divide(M.normalize("b"), M.normalize("bab^3")) == M.normalize("ab^3")
    assert M.left_divide(M.normalize("a"), M.normalize("ba")) is None


def test_scan_mode_bound():
    M = BsMonoid(3, 2, scan_bound=0)
    with pytest.raises(UnknownWithBound) as exc:
        M.right_lcm(M.normalize("b"), M.normalize("a"))
    assert exc.value.bound == 0


def test_no_scale_when_d_is_unit():
    M = BsMonoid(2, 1)
    with pytest.raises(NoScale):
        M.scale(M.normalize("a"))
    with pytest.raises(UsageError):
        BsMonoid(0, 2)


def test_parse_round_trip():
    M = BsMonoid(1, -2)
    for s in elements_up_to(M, 4):
        assert M.parse(M.format(s)) == s


def test_reduce_exponents_negative():
    # b^{-2} a = a b^{-1} in BS(1, 2)
    assert reduce_exponents(1, 2, (-2,), 0) == ((0,), -1)


@pytest.mark.parametrize("c,d", PARAMS)
@settings(max_examples=60, deadline=None)
@given(w1=word, w2=word)
def test_concatenation_is_multiplication(c, d, w1, w2):
    M = BsMonoid(c, d)
    assert M.normalize(w1 + w2) == M.mul(M.normalize(w1), M.normalize(w2))


@pytest.mark.parametrize("c,d", PARAMS)
def test_defining_relation(c, d):
    M = BsMonoid(c, d)
    if c > 0 and d > 0:
        assert M.normalize("a" + "b" * c) == M.normalize("b" * d + "a")


@pytest.mark.parametrize("c,d", PARAMS)
@settings(max_examples=40, deadline=None)
@given(w1=word, w2=word)
def test_closed_form_lcm_matches_scan(c, d, w1, w2):
    fast, slow = BsMonoid(c, d), BsMonoid(c, d, scan_bound=400)
    s, t = fast.normalize(w1), fast.normalize(w2)
    assert fast.right_lcm(s, t) == slow.right_lcm(s, t)


@pytest.mark.parametrize("c,d", [(3, 2), (1, -2), (-3, 2)])
def test_lcm_oracle_small(c, d):
    M = BsMonoid(c, d)
    els = elements_up_to(M, 3)
    cache = {}
    for s in els:
        for t in els:
            rep = compare_lcm_with_oracle(M, s, t, 5, cache=cache)
            assert rep.ok, rep.failures


def test_classes_are_digit_strings():
    M = BsMonoid(3, 2)
    cls = M.classes_at_level(8)
    assert len(cls) == 8 and all(len(c.key) == 3 for c in cls)
    assert M.ancestor(ClassId(8, (1, 0, 1)), 2) == ClassId(2, (1,))
