"""Tests for F-thresholds, jumping numbers and the denominator bound."""

from fractions import Fraction

import pytest

from frobthresh.errors import ComputationLimitError, PreconditionError
from frobthresh.frobenius import PairDivisor
from frobthresh.polycore import (
    Ideal,
    PolyRing,
    bracket_power,
    containment,
    format_ideal,
    ideal_power,
    ideal_sum,
    max_ideal,
    parse_ideal,
)
from frobthresh.thresholds import (
    ThresholdQuery,
    ThresholdResult,
    candidate_grid,
    denominator_bound,
    fjn,
    fjn_truncated,
    fpt,
    is_jumping_number,
    jumping_numbers,
    nu_oracle,
    orbit,
    orbit_map,
    subadditivity_check,
    subadditivity_verdict,
    threshold_bracket,
)


def test_nu_oracle(f2xy):
    x, _ = f2xy.gens
    m = max_ideal(f2xy)
    assert nu_oracle(m, m, 1) == 2
    for e in range(1, 5):
        q = 2 ** e
        assert nu_oracle(Ideal(f2xy, [x ** 3]), m, e) == -(-q // 3) - 1
    with pytest.raises(PreconditionError):
        nu_oracle(Ideal.zero(f2xy), m, 1)
    with pytest.raises(PreconditionError):
        nu_oracle(m, Ideal(f2xy, [x]), 1)


def _nu_by_counting(a, I, e):
    Iq = bracket_power(I, e)
    r = 0
    while not containment(ideal_power(a, r + 1), Iq):
        r += 1
    return r


@pytest.mark.parametrize("gens", [["y^2 + x", "x^2"], ["x^2 + y^3", "x*y"], ["x + y^3", "y^5"]])
def test_nu_oracle_on_non_homogeneous_targets(f2xy, gens):
    I = parse_ideal(gens, f2xy)
    m = max_ideal(f2xy)
    x, y = f2xy.gens
    for a in (m, Ideal(f2xy, [x * y + y ** 2])):
        for e in (1, 2, 3):
            assert nu_oracle(a, I, e) == _nu_by_counting(a, I, e)


def test_fjn_of_max_ideal_against_non_homogeneous_target(f2xy, trivial):
    # R/I = F_2[y]/(y^4) and tau(m^t) = m^{floor(t)-1}: the threshold is 5
    I = parse_ideal(["y^2 + x", "x^2"], f2xy)
    m = max_ideal(f2xy)
    assert nu_oracle(m, I, 1) == 8
    result = fjn(ThresholdQuery(trivial(f2xy), m, I))
    assert result.value == 5
    assert result.certified


def test_threshold_bracket_contains_fpt(f2xy, trivial):
    m = max_ideal(f2xy)
    lo, hi = threshold_bracket(m, m, trivial(f2xy))
    assert lo < 2 <= hi


def test_fpt_of_max_ideal(f2xy, trivial):
    result = fpt(trivial(f2xy), max_ideal(f2xy))
    assert result.value == 2
    assert result.certified
    assert result.denominator_check is True
    report = result.to_report()
    assert report["value"] == "2/1"
    assert report["resolved"] is True


@pytest.mark.parametrize("k", range(1, 11))
def test_fpt_of_monomial(f2x, trivial, k):
    (x,) = f2x.gens
    result = fpt(trivial(f2x), Ideal(f2x, [x ** k]))
    assert result.value == Fraction(1, k)
    assert result.resolved


@pytest.mark.parametrize("p", [2, 3, 5])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_fpt_of_max_ideal_is_dimension(trivial, p, n):
    ring = PolyRing(p, ("x", "y", "z")[:n])
    result = fpt(trivial(ring), max_ideal(ring))
    assert result.value == n
    assert "fixed-operator" in result.modes


def test_fpt_of_cube(f2xy, trivial):
    x, _ = f2xy.gens
    assert fpt(trivial(f2xy), Ideal(f2xy, [x ** 3])).value == Fraction(1, 3)


def test_fpt_of_cusp_p_one_mod_six(f7xy, trivial):
    x, y = f7xy.gens
    result = fpt(trivial(f7xy), Ideal(f7xy, [x ** 2 + y ** 3]))
    assert result.value == Fraction(5, 6)


def test_fjn_is_zero_when_pair_ideal_is_inside(f2xy):
    x, _ = f2xy.gens
    d = PairDivisor(f2xy, x, 1, 1)
    result = fpt(d, max_ideal(f2xy))
    assert result.value == 0
    assert result.certificate["reason"] == "tau(R, Delta) ⊆ I"


def test_query_preconditions(f2xy, trivial):
    x, _ = f2xy.gens
    d = trivial(f2xy)
    m = max_ideal(f2xy)
    with pytest.raises(PreconditionError):
        ThresholdQuery(d, Ideal.unit(f2xy), m)
    with pytest.raises(PreconditionError):
        ThresholdQuery(d, m, Ideal(f2xy, [x]))
    with pytest.raises(PreconditionError):
        ThresholdQuery(d, m, m, lo=Fraction(2), hi=Fraction(1))
    with pytest.raises(PreconditionError):
        ThresholdQuery(d, m, m, g_max=0)
    with pytest.raises(PreconditionError):
        fjn(ThresholdQuery(d, m, m, lo=Fraction(5), hi=Fraction(6)))


def test_jumping_numbers_of_max_ideal(f2xy, trivial):
    m = max_ideal(f2xy)
    jumps = jumping_numbers(ThresholdQuery(trivial(f2xy), m, m, lo=Fraction(0), hi=Fraction(3)))
    assert jumps.values == [2, 3]
    assert jumps.certified
    assert jumps.to_report()["jumping_numbers"] == ["2/1", "3/1"]


def test_jumping_numbers_of_a_variable(trivial):
    ring = PolyRing(3, ("x",))
    (x,) = ring.gens
    query = ThresholdQuery(trivial(ring), Ideal(ring, [x]), max_ideal(ring), hi=Fraction(2))
    assert jumping_numbers(query).values == [1, 2]


def test_is_jumping_number(f2xy, trivial):
    d, m = trivial(f2xy), max_ideal(f2xy)
    assert is_jumping_number(d, m, 2) is True
    assert is_jumping_number(d, m, Fraction(3, 2)) is False


def test_candidate_grid():
    assert candidate_grid(Fraction(0), Fraction(1), 2, 1, 100) == [Fraction(1, 2)]
    level2 = candidate_grid(Fraction(0), Fraction(1), 2, 2, 100)
    assert Fraction(1, 3) in level2 and Fraction(3, 4) in level2
    assert all(0 < c < 1 for c in level2)
    with pytest.raises(ComputationLimitError):
        candidate_grid(Fraction(0), Fraction(100), 2, 3, 10)


def test_truncated_threshold(f2xy, trivial):
    x, y = f2xy.gens
    d = trivial(f2xy)
    m = max_ideal(f2xy)
    value = fjn_truncated(d, Ideal(f2xy, [x]), Fraction(1, 2), Ideal(f2xy, [y]), m, 1, 1)
    assert value == 1
    assert (value * 2).denominator == 1
    assert fjn_truncated(d, Ideal(f2xy, [x]), Fraction(3, 2), Ideal(f2xy, [y]), m, 1, 1) == 0


def test_denominator_bound(f2xy, trivial):
    bound = denominator_bound(trivial(f2xy), 1)
    assert (bound.l, bound.n, bound.N) == (3, 3, 504)
    assert bound.to_report()["N"] == "504"
    assert denominator_bound(trivial(f2xy), 1, max_bits=1).N is None
    with pytest.raises(PreconditionError):
        denominator_bound(trivial(f2xy), 0)


def test_orbit():
    values, first_repeat = orbit(Fraction(1, 3), 2, 2, 4)
    assert values == [Fraction(1, 3), Fraction(2, 3), Fraction(4, 3), Fraction(5, 3), Fraction(4, 3)]
    assert first_repeat == 4
    assert orbit_map(Fraction(1, 3), 2, 2, 0) == Fraction(1, 3)


def _result(value=None, lo=0, hi=0):
    return ThresholdResult(
        None if value is None else Fraction(value), Fraction(lo), Fraction(hi), value is not None, "test"
    )


def test_subadditivity_verdict():
    half = _result(Fraction(1, 2))
    assert subadditivity_verdict(_result(1), half, half) == "holds"
    assert subadditivity_verdict(_result(2), half, half) == "violated"
    open_lhs = _result(lo=Fraction(1, 2), hi=Fraction(3, 2))
    assert subadditivity_verdict(open_lhs, half, half) == "undetermined"


def test_subadditivity_check(f2xy, trivial):
    x, y = f2xy.gens
    m = max_ideal(f2xy)
    report = subadditivity_check(trivial(f2xy), Ideal(f2xy, [x]), Ideal(f2xy, [y]), m)
    assert (report.lhs.value, report.rhs_a.value, report.rhs_b.value) == (2, 1, 1)
    assert report.verdict == "holds"
    assert report.to_report()["verdict"] == "holds"


def test_subadditivity_on_fifty_pairs(f2x, trivial):
    (x,) = f2x.gens
    d = trivial(f2x)
    m = max_ideal(f2x)
    cache = {}

    def threshold(ideal):
        key = tuple(format_ideal(ideal))
        if key not in cache:
            cache[key] = fjn(ThresholdQuery(d, ideal, m))
        return cache[key]

    verdicts = []
    for i in range(1, 11):
        for j in range(i, 11):
            a, b = Ideal(f2x, [x ** i]), Ideal(f2x, [x ** j])
            verdicts.append(subadditivity_verdict(threshold(ideal_sum(a, b)), threshold(a), threshold(b)))
    assert len(verdicts) >= 50
    assert set(verdicts) == {"holds"}


def test_jumping_numbers_record_modes(f2xy, trivial):
    m = max_ideal(f2xy)
    jumps = jumping_numbers(ThresholdQuery(trivial(f2xy), m, m, lo=Fraction(0), hi=Fraction(3)))
    assert "fixed-operator" in jumps.modes
    assert jumps.to_report()["certificate_modes"] == jumps.modes
