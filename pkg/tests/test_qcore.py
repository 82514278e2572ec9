import math

import pytest
from hypothesis import given, strategies as st

from podles.qcore import (
    HalfInt,
    check_pair,
    check_q,
    half_int,
    is_spin_label,
    parse_half,
    q_number,
    valid_pair,
)

qs = st.floats(min_value=0.05, max_value=0.95)


@pytest.mark.parametrize("n, q, expected", [(0, 0.3, 0.0), (1, 0.7, 1.0), (3, 0.5, 5.25), (2, 0.5, 2.5)])
def test_q_number_values(n, q, expected):
    assert q_number(n, q) == pytest.approx(expected, rel=1e-14, abs=1e-15)


def test_q_number_classical_limit():
    assert q_number(7, 1.0) == 7
    assert q_number(7, 0.999999) == pytest.approx(7, rel=1e-9)


@given(qs, st.integers(-50, 50))
def test_q_number_antisymmetric(q, n):
    assert q_number(-n, q) == pytest.approx(-q_number(n, q), rel=1e-14, abs=1e-300)


@given(qs, st.integers(1, 40))
def test_q_number_recursion(q, n):
    lhs = q_number(n + 1, q)
    rhs = (q + 1 / q) * q_number(n, q) - q_number(n - 1, q)
    assert lhs == pytest.approx(rhs, rel=1e-12)


@given(qs, st.integers(1, 60))
def test_q_number_positive(q, n):
    assert q_number(n, q) > 0


def test_half_int_basics():
    h = half_int(1)
    assert h.value == 0.5 and str(h) == "1/2"
    assert str(HalfInt(4)) == "2"
    assert HalfInt(3) + HalfInt(1) == HalfInt(4)
    assert -HalfInt(3) == HalfInt(-3)
    assert HalfInt(1) < HalfInt(3)


@pytest.mark.parametrize("text, twice", [("21/2", 21), ("10.5", 21), ("3", 6), ("-1/2", -1), (" 7/2 ", 7)])
def test_parse_half(text, twice):
    assert parse_half(text).twice == twice


@pytest.mark.parametrize("text", ["1/3", "0.25", "abc", "", "2/2x"])
def test_parse_half_rejects(text):
    with pytest.raises(ValueError):
        parse_half(text)


def test_pairs():
    assert not valid_pair(HalfInt(1), HalfInt(3))
    assert not valid_pair(HalfInt(3), HalfInt(0))
    assert valid_pair(HalfInt(3), HalfInt(-1))
    with pytest.raises(ValueError):
        check_pair(HalfInt(1), HalfInt(3))
    with pytest.raises(ValueError):
        check_pair(HalfInt(3), HalfInt(0))
    assert is_spin_label(HalfInt(3))
    assert not is_spin_label(HalfInt(0)) and not is_spin_label(HalfInt(-1))


@pytest.mark.parametrize("q", [0.0, -0.1, 1.5, math.nan])
def test_check_q_rejects(q):
    with pytest.raises(ValueError, match="0 < q < 1"):
        check_q(q)


def test_check_q_one():
    with pytest.raises(ValueError):
        check_q(1.0)
    assert check_q(1.0, allow_one=True) == 1.0
