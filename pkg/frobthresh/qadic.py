"""
Base-q Digit Calculus
Exact digits, truncations and round-ups of positive rationals in base q, the
admissible-form bookkeeping for exponents c/(p^g(p^h-1)), and the "num/den"
serialisation every report uses.
"""

import logging
from fractions import Fraction
from math import ceil, gcd
from typing import Dict, List, Optional, Tuple, Union

from sympy import n_order

from .errors import InadmissibleExponentError, QAdicDomainError

logger = logging.getLogger(__name__)

RationalLike = Union[Fraction, int, str]


def as_rational(t: RationalLike) -> Fraction:
    if isinstance(t, Fraction):
        return t
    if isinstance(t, bool):
        raise InadmissibleExponentError(f"not a rational: {t!r}")
    if isinstance(t, int):
        return Fraction(t)
    if isinstance(t, str):
        return parse_rational(t)
    raise InadmissibleExponentError(f"not a rational: {t!r}")


def _scaled(t: Fraction, q: int, n: int) -> Fraction:
    return t * Fraction(q) ** n


def _check(t: RationalLike, q: int) -> Fraction:
    t = as_rational(t)
    if t <= 0:
        raise QAdicDomainError(f"digit calculus needs t > 0, got {format_rational(t)}")
    if q < 2:
        raise QAdicDomainError(f"base must be >= 2, got {q}")
    return t


def digit(t: RationalLike, q: int, n: int) -> int:
    """t^(n) = ceil(t q^n - 1) - q ceil(t q^(n-1) - 1)."""
    t = _check(t, q)
    return ceil(_scaled(t, q, n) - 1) - q * ceil(_scaled(t, q, n - 1) - 1)


def truncation(t: RationalLike, q: int, n: int) -> Fraction:
    t = _check(t, q)
    return Fraction(ceil(_scaled(t, q, n) - 1)) / Fraction(q) ** n


def roundup(t: RationalLike, q: int, n: int) -> Fraction:
    t = _check(t, q)
    return Fraction(ceil(_scaled(t, q, n))) / Fraction(q) ** n


def digit_expansion(t: RationalLike, q: int, n_lo: int, n_hi: int) -> List[Dict[str, object]]:
    """Rows (n, digit, truncation, roundup) for n_lo <= n <= n_hi."""
    t = _check(t, q)
    rows = []
    for n in range(n_lo, n_hi + 1):
        rows.append({
            "n": n,
            "digit": digit(t, q, n),
            "truncation": format_rational(truncation(t, q, n)),
            "roundup": format_rational(roundup(t, q, n)),
        })
    return rows


def digits_eventually_constant(t: RationalLike, q: int) -> Optional[Tuple[int, int]]:
    """
    (l, onset) with t^(n) = l for all n >= onset, or None.

    Constant tails occur exactly when q^g (q-1) t is an integer for some g;
    the tail then starts no later than max(g, 1) + 1.
    """
    t = _check(t, q)
    g = None
    for k in range(t.denominator.bit_length() + 2):
        if (t * q ** k * (q - 1)).denominator == 1:
            g = k
            break
    if g is None:
        return None
    onset = max(g, 1) + 1
    l = digit(t, q, onset)
    while onset > 1 and digit(t, q, onset - 1) == l:
        onset -= 1
    return l, onset


def admissible_form(t: RationalLike, p: int) -> Tuple[int, int]:
    """(g, h) with t = c/(p^g (p^h - 1)); h is the order of p modulo the p-free denominator."""
    t = as_rational(t)
    if t <= 0:
        raise InadmissibleExponentError(
            f"exponent must be a positive rational c/(p^g(p^h-1)), got {format_rational(t)}"
        )
    den = t.denominator
    g = 0
    while den % p == 0:
        den //= p
        g += 1
    h = 1 if den == 1 else int(n_order(p, den))
    return g, h


def normalizing_exponent(t: RationalLike, p: int, e: int) -> int:
    """Least multiple e' of e with p^e'(p^e'-1) t integral."""
    g, h = admissible_form(t, p)
    base = e * h // gcd(e, h)
    return base * max(1, -(-g // base))


def format_rational(t: Fraction) -> str:
    t = Fraction(t)
    return f"{t.numerator}/{t.denominator}"


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InadmissibleExponentError(f"cannot read {text!r} as an exact rational") from exc


def approx(t: Fraction, digits: int = 6) -> str:
    """Non-normative decimal display."""
    return f"{float(t):.{digits}g}"
