"""Tests for the base-q digit calculus."""

from fractions import Fraction
from math import ceil

import pytest

from frobthresh.errors import InadmissibleExponentError, QAdicDomainError
from frobthresh.qadic import (
    admissible_form,
    approx,
    as_rational,
    digit,
    digit_expansion,
    digits_eventually_constant,
    format_rational,
    normalizing_exponent,
    parse_rational,
    roundup,
    truncation,
)


def test_digits_of_one_half_base_two():
    assert digit(Fraction(1, 2), 2, 1) == 0
    assert [digit(Fraction(1, 2), 2, n) for n in range(2, 7)] == [1] * 5


@pytest.mark.parametrize("q", [2, 3, 5, 7])
def test_one_has_all_digits_q_minus_one(q):
    for n in range(1, 6):
        assert digit(1, q, n) == q - 1
        assert truncation(1, q, n) == Fraction(q ** n - 1, q ** n)


def test_five_sixths_base_two():
    assert digit(Fraction(5, 6), 2, 2) == 1
    assert truncation(Fraction(5, 6), 2, 2) == Fraction(3, 4)
    assert roundup(Fraction(5, 6), 2, 2) == 1


def test_digits_rebuild_truncation(rng):
    for _ in range(40):
        t = Fraction(rng.randint(1, 200), rng.randint(1, 60))
        q = rng.choice([2, 3, 4, 5, 9])
        acc = Fraction(ceil(t - 1))
        for n in range(1, 7):
            d = digit(t, q, n)
            assert 0 <= d <= q - 1
            acc += Fraction(d, q ** n)
            assert acc == truncation(t, q, n)
            # truncation < t <= roundup
            assert truncation(t, q, n) < t <= roundup(t, q, n)


def test_eventually_constant_digits():
    assert digits_eventually_constant(1, 3) == (2, 1)
    assert digits_eventually_constant(Fraction(1, 2), 2) == (1, 2)
    assert digits_eventually_constant(Fraction(3, 4), 5) == (3, 1)
    assert digits_eventually_constant(Fraction(1, 5), 2) is None


def test_eventually_constant_onset_is_exact(rng):
    for _ in range(20):
        q = rng.choice([2, 3, 5])
        t = Fraction(rng.randint(1, 50), q ** rng.randint(0, 3) * (q - 1))
        l, onset = digits_eventually_constant(t, q)
        assert all(digit(t, q, n) == l for n in range(onset, onset + 6))
        if onset > 1:
            assert digit(t, q, onset - 1) != l


def test_digit_expansion_rows():
    rows = digit_expansion(Fraction(1, 2), 2, 1, 3)
    assert [r["n"] for r in rows] == [1, 2, 3]
    assert [r["digit"] for r in rows] == [0, 1, 1]
    assert rows[0]["truncation"] == "0/1"
    assert rows[2]["roundup"] == "1/2"


def test_admissible_form():
    assert admissible_form(Fraction(5, 6), 7) == (0, 1)
    assert admissible_form(Fraction(1, 12), 2) == (2, 2)
    assert admissible_form(3, 5) == (0, 1)
    with pytest.raises(InadmissibleExponentError):
        admissible_form(0, 2)


def test_normalizing_exponent():
    assert normalizing_exponent(Fraction(1, 12), 2, 1) == 2
    assert normalizing_exponent(Fraction(5, 6), 7, 1) == 1
    assert normalizing_exponent(Fraction(1, 12), 2, 3) == 6
    for t, p, e in [(Fraction(1, 12), 2, 1), (Fraction(2, 45), 3, 2)]:
        e2 = normalizing_exponent(t, p, e)
        assert e2 % e == 0
        assert (t * p ** e2 * (p ** e2 - 1)).denominator == 1


def test_domain_errors():
    with pytest.raises(QAdicDomainError):
        digit(0, 2, 1)
    with pytest.raises(QAdicDomainError):
        truncation(Fraction(-1, 2), 3, 1)
    with pytest.raises(QAdicDomainError):
        roundup(1, 1, 1)


def test_rational_text_round_trip():
    assert format_rational(Fraction(2)) == "2/1"
    assert format_rational(Fraction(6, 4)) == "3/2"
    assert parse_rational(" 3/6 ") == Fraction(1, 2)
    assert as_rational("5") == 5
    assert approx(Fraction(1, 3)) == "0.333333"


@pytest.mark.parametrize("bad", ["abc", "1/0", "", True, 0.5])
def test_rational_rejects_garbage(bad):
    with pytest.raises(InadmissibleExponentError):
        as_rational(bad)
