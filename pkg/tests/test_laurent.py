import pytest
from hypothesis import given, strategies as st

from tlcells.laurent import (QC, ZERO, CoefficientOverflowError, LaurentPoly, V, VINV,
                             arith, bar, in_lattice, parse_poly)

polys = st.dictionaries(st.integers(-6, 6), st.integers(-50, 50), max_size=5).map(LaurentPoly)


def P(**kw):
    return LaurentPoly(kw)


def test_arith_examples():
    assert arith(QC, QC, "mul") == LaurentPoly({2: 1, 0: 2, -2: 1})
    p = LaurentPoly({3: 2, -1: -1})
    assert arith(p, ZERO, "add") == p
    assert arith(V - VINV, V + VINV, "mul") == LaurentPoly({2: 1, -2: -1})
    assert arith(p, p, "sub") == ZERO
    with pytest.raises(ValueError):
        arith(p, p, "div")


def test_zero_terms_are_dropped():
    p = LaurentPoly({1: 1, 2: 0}) + LaurentPoly({1: -1})
    assert p == ZERO and p.terms == {}
    assert LaurentPoly({0: 0}).terms == {}


def test_bar_examples():
    assert bar(LaurentPoly({2: 1, -1: 3})) == LaurentPoly({-2: 1, 1: 3})
    assert bar(LaurentPoly.const(5)) == LaurentPoly.const(5)


def test_in_lattice_examples():
    assert in_lattice(LaurentPoly({-1: 1, -3: 1}), 1)
    assert not in_lattice(LaurentPoly({0: 1, -2: 1}), 1)
    assert in_lattice(ZERO, 5)


def test_overflow_is_an_error():
    big = LaurentPoly.const(1 << 62)
    with pytest.raises(CoefficientOverflowError):
        big + big
    with pytest.raises(CoefficientOverflowError):
        big * LaurentPoly.const(4)
    # the negative end of the range is representable
    assert (-big) + (-big) == LaurentPoly.const(-(1 << 63))


@given(polys, polys, polys)
def test_ring_axioms(p, q, r):
    assert p + q == q + p
    assert p * q == q * p
    assert (p + q) + r == p + (q + r)
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r


@given(polys, polys)
def test_bar_is_an_involutive_ring_map(p, q):
    assert bar(bar(p)) == p
    assert bar(p * q) == bar(p) * bar(q)
    assert bar(p + q) == bar(p) + bar(q)


@given(polys, st.integers(0, 6))
def test_lattice_filtration(p, k):
    if in_lattice(p, k + 1):
        assert in_lattice(p, k)
    if in_lattice(p, 0) and not in_lattice(p, 1):
        assert p.coeff(0) != 0


@given(polys)
def test_text_round_trip(p):
    assert parse_poly(str(p)) == p


def test_text_form():
    assert str(ZERO) == "0"
    assert str(LaurentPoly({1: 1, -1: 1})) == "1:-1 1:1"
    assert QC.pretty() == "v + v^-1"
    for bad in ("", "1:1 1:-1", "0:3", "1:1 2:1", "x"):
        with pytest.raises(ValueError):
            parse_poly(bad)
