"""Tests for polynomial and ideal arithmetic over F_p."""

from math import comb

import pytest

from conftest import random_ideal
from frobthresh.errors import InfiniteColengthError, PreconditionError, RingMismatchError, SpecValidationError
from frobthresh.polycore import (
    Ideal,
    PolyRing,
    bracket_power,
    colength,
    contained_mod_max_power,
    containment,
    ell,
    format_ideal,
    format_polynomial,
    frobenius_power,
    ideal_arith,
    ideal_power,
    ideal_product,
    intersection,
    is_homogeneous,
    is_m_primary,
    local_invariants,
    max_ideal,
    max_ideal_power,
    membership,
    mu_upper,
    parse_ideal,
    parse_polynomial,
    power_of_max_exponent,
    power_of_max_quotient_length,
    quotient_length,
)


def test_ring_validation():
    with pytest.raises(PreconditionError):
        PolyRing(4, ("x",))
    with pytest.raises(PreconditionError):
        PolyRing(2, ("x", "x"))
    with pytest.raises(PreconditionError):
        PolyRing(2, ())


def test_parse_reduces_coefficients_mod_p(f2xy, f3xy):
    assert format_polynomial(parse_polynomial("x^2 + 3y^3", f2xy)) == "x^2 + y^3"
    assert format_polynomial(parse_polynomial("x/2", f3xy)) == "2*x"
    assert not parse_polynomial("2*x*y", f2xy)


@pytest.mark.parametrize("text", ["x/2", "z + x", "x**", "1/x"])
def test_parse_rejects_bad_polynomials(f2xy, text):
    with pytest.raises(SpecValidationError):
        parse_polynomial(text, f2xy)


def test_parse_ideal_forms(f2xy):
    a = parse_ideal("(x, y^2)", f2xy)
    assert a == parse_ideal("x, y^2", f2xy)
    assert a == parse_ideal(["x", "y^2"], f2xy)
    assert parse_ideal("(x + y)", f2xy) == Ideal(f2xy, [f2xy.gens[0] + f2xy.gens[1]])


def test_equality_is_basis_equality(f2xy):
    x, y = f2xy.gens
    assert Ideal(f2xy, [x, x + y]) == max_ideal(f2xy)
    assert Ideal(f2xy, [x * y, x]) == Ideal(f2xy, [x])
    assert Ideal(f2xy, [x]) != Ideal(f2xy, [y])


def test_mixed_rings_rejected(f2xy, f3xy):
    with pytest.raises(RingMismatchError):
        containment(max_ideal(f2xy), max_ideal(f3xy))
    with pytest.raises(RingMismatchError):
        Ideal(f2xy, [f3xy.gens[0]])


def test_membership_and_containment(f3xy):
    x, y = f3xy.gens
    a = Ideal(f3xy, [x ** 2 + y ** 3, x * y])
    assert membership(x ** 3 * y + x * y ** 4, a)
    assert not membership(x, a)
    assert containment(a, max_ideal(f3xy))
    assert not containment(max_ideal(f3xy), a)
    assert a <= max_ideal(f3xy)


def test_max_ideal_powers(f2xy):
    m = max_ideal(f2xy)
    assert ideal_power(m, 3) == max_ideal_power(f2xy, 3)
    assert power_of_max_exponent(ideal_power(m, 4)) == 4
    assert power_of_max_exponent(Ideal(f2xy, [f2xy.gens[0] ** 2])) is None


def test_power_matches_repeated_products(f3xy, rng):
    for _ in range(5):
        a = random_ideal(rng, f3xy, max_gens=2, max_deg=3)
        assert ideal_power(a, 3) == ideal_product(ideal_product(a, a), a)


def test_ideal_arith_dispatch(f2xy):
    x, y = f2xy.gens
    a, b = Ideal(f2xy, [x]), Ideal(f2xy, [y])
    assert ideal_arith(a, b, "sum") == max_ideal(f2xy)
    assert ideal_arith(a, b, "product") == Ideal(f2xy, [x * y])
    assert ideal_arith(a, op="power", k=3) == Ideal(f2xy, [x ** 3])
    assert ideal_arith(max_ideal(f2xy), op="bracket_power", e=1) == Ideal(f2xy, [x ** 2, y ** 2])
    with pytest.raises(PreconditionError):
        ideal_arith(a, b, "quotient")


def test_bracket_power_is_generator_independent(f2xy):
    x, y = f2xy.gens
    a = Ideal(f2xy, [x + y, y])
    assert bracket_power(a, 2) == Ideal(f2xy, [x ** 4, y ** 4])


def test_frobenius_power_is_termwise(f3xy):
    x, y = f3xy.gens
    g = x + 2 * x * y + y ** 2
    assert frobenius_power(g, 1, 3) == g ** 3
    assert frobenius_power(g, 2, 3) == x ** 9 + 2 * x ** 9 * y ** 9 + y ** 18


def test_homogeneity(f2xy):
    x, y = f2xy.gens
    assert is_homogeneous(x ** 2 + x * y)
    assert not is_homogeneous(x + y ** 2)
    assert Ideal(f2xy, [x ** 2, x * y + y ** 2]).is_homogeneous
    assert not Ideal(f2xy, [x ** 2 + y ** 3]).is_homogeneous


def test_skoda_pigeonhole_on_powers(f2xy, rng):
    # a^n = a^[q] a^(n-q) once n > mu (q - 1)
    for _ in range(5):
        a = random_ideal(rng, f2xy, max_gens=2, max_deg=3)
        mu = len(a.mingens)
        n = mu + 1
        assert ideal_power(a, n) == ideal_product(bracket_power(a, 1), ideal_power(a, n - 2))


def test_intersection(f2xy, f3xy):
    x, y = f2xy.gens
    assert intersection(Ideal(f2xy, [x]), Ideal(f2xy, [y])) == Ideal(f2xy, [x * y])
    u, v = f3xy.gens
    assert intersection(Ideal(f3xy, [u + v]), Ideal(f3xy, [u])) == Ideal(f3xy, [u ** 2 + u * v])


def test_colength(f2xy):
    x, y = f2xy.gens
    for k in range(1, 6):
        assert colength(max_ideal_power(f2xy, k)) == comb(k + 1, 2)
    assert colength(Ideal(f2xy, [x ** 2, y ** 3])) == 6
    assert colength(Ideal(f2xy, [x ** 2 + y ** 3, x * y])) == 5
    with pytest.raises(InfiniteColengthError):
        colength(Ideal(f2xy, [x]))


def test_m_primary_and_ell(f2xy):
    x, y = f2xy.gens
    assert is_m_primary(Ideal(f2xy, [x ** 2, y ** 3]))
    assert not is_m_primary(Ideal(f2xy, [x]))
    assert not is_m_primary(Ideal.unit(f2xy))
    assert ell(Ideal(f2xy, [x ** 2, y ** 3])) == 4
    assert ell(max_ideal(f2xy)) == 1


@pytest.mark.parametrize(
    "gens, expected",
    [
        # R/I = F_2[y]/(y^4): the leading-term staircase alone suggests 3
        (["y^2 + x", "x^2"], 4),
        (["x + y^3", "y^5"], 5),
        (["x^2 + y^3", "x*y"], 4),
    ],
)
def test_ell_of_non_homogeneous_targets(f2xy, gens, expected):
    I = parse_ideal(gens, f2xy)
    assert ell(I) == expected
    assert containment(max_ideal_power(f2xy, expected), I)
    assert not containment(max_ideal_power(f2xy, expected - 1), I)
    assert ell(I) <= colength(I)


def test_local_invariants(f2xy):
    x, y = f2xy.gens
    inv = local_invariants(Ideal(f2xy, [x ** 2, x * y, y ** 2]), Ideal(f2xy, [x ** 2, y ** 3]))
    assert (inv.colength, inv.mu_upper, inv.mu_exact, inv.emb, inv.ell_I) == (6, 3, True, 2, 4)
    assert inv.to_report()["mu_mode"] == "exact"
    assert mu_upper(Ideal(f2xy, [x, x + y, y]))[0] == 2
    with pytest.raises(PreconditionError):
        local_invariants(Ideal.unit(f2xy), None)


def test_mu_of_unpruned_generators_is_an_upper_bound(f2xy):
    x, y = f2xy.gens
    gens = [x ** (16 - i) * y ** i for i in range(17)] + [x ** 16 + y ** 16]
    a = Ideal(f2xy, gens)
    assert a.is_homogeneous and not a.is_monomial
    assert mu_upper(a) == (17, False)
    assert mu_upper(Ideal(f2xy, [x ** 2 + y ** 2, x * y]))[1] is True


def test_quotient_lengths(f5xy):
    m = max_ideal(f5xy)
    assert quotient_length(m, max_ideal_power(f5xy, 3)) == 5
    # Delta = 0, M = 2, t = 3 over F_5[x, y]: len(R / m^6) = 21
    assert power_of_max_quotient_length(Ideal.unit(f5xy), 6) == 21
    assert power_of_max_quotient_length(m, 2) == colength(max_ideal_power(f5xy, 3)) - colength(m)


def test_contained_mod_max_power(f2xy):
    x, y = f2xy.gens
    small, big = Ideal(f2xy, [x]), Ideal(f2xy, [y])
    assert contained_mod_max_power(small, big, 1) is True
    assert contained_mod_max_power(small, big, 2) is False
    assert contained_mod_max_power(Ideal(f2xy, [x ** 2 + y ** 3]), big, 1, factor=Ideal(f2xy, [x])) is True
    assert contained_mod_max_power(Ideal(f2xy, [x + y ** 3]), big, 1, factor=Ideal(f2xy, [x])) is False
    assert contained_mod_max_power(Ideal(f2xy, [x ** 2]), big, 1, factor=Ideal(f2xy, [y])) is False


def test_format_ideal_is_canonical(f3xy):
    a = parse_ideal("(2*x^2 + y, y)", f3xy)
    assert format_ideal(a) == ["x^2", "y"]
    assert format_ideal(a) == format_ideal(parse_ideal("y, x^2", f3xy))


@pytest.mark.parametrize("ring_name", ["f2xy", "f3xy", "f5xy"])
def test_groebner_basis_ignores_generator_order(request, rng, ring_name):
    ring = request.getfixturevalue(ring_name)
    for _ in range(8):
        gens = list(random_ideal(rng, ring, max_gens=3, max_deg=4).gens)
        shuffled = gens[:]
        rng.shuffle(shuffled)
        first, second = Ideal(ring, gens), Ideal(ring, list(reversed(shuffled)))
        assert first.gb == second.gb
        assert first.key() == second.key()
        assert format_ideal(first) == format_ideal(second)
