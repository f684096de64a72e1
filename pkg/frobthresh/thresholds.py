"""
F-Threshold Engine
F-jumping numbers fjn^I(R, Delta; a), F-pure thresholds, the nu-function
oracle, jumping-number sweeps, truncated thresholds fjn^{n,u}, and the
finite-colength denominator bound with its orbit map.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, comb, factorial, floor
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

from .config import Settings, resolve
from .errors import ComputationLimitError, PreconditionError
from .frobenius import PairDivisor
from .polycore import (
    Ideal,
    bracket_power,
    containment,
    ell,
    ideal_power,
    ideal_sum,
    is_m_primary,
    max_ideal,
    mu_upper,
    quotient_length,
)
from .qadic import approx, as_rational, format_rational
from .testideal import (
    FIXED_OPERATOR,
    FactorLike,
    MixedExponent,
    Perturbation,
    left_limit,
    left_limit_setup,
    mixed_contained,
    mixed_exponents,
    tau_pair,
    test_ideal,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ThresholdQuery:
    """fjn^I(R, Delta; a) searched in (lo, hi] down to resolution g_max."""

    d: PairDivisor
    a: Ideal
    I: Ideal
    lo: Optional[Fraction] = None
    hi: Optional[Fraction] = None
    g_max: int = 6

    def __post_init__(self):
        ring = self.d.ring
        if self.a.ring != ring or self.I.ring != ring:
            raise PreconditionError("query ideals must live in the divisor's ring")
        if not containment(self.a, max_ideal(ring)):
            raise PreconditionError("threshold queries need a ⊆ m")
        if not is_m_primary(self.I):
            raise PreconditionError("threshold queries need an m-primary I")
        if self.lo is not None and self.hi is not None and self.lo >= self.hi:
            raise PreconditionError(f"empty window ({self.lo}, {self.hi}]")
        if self.g_max < 1:
            raise PreconditionError("g_max must be >= 1")


@dataclass
class ThresholdResult:
    value: Optional[Fraction]
    lo: Fraction
    hi: Fraction
    certified: bool
    provenance: str
    level: int = 0
    certificate: Dict[str, object] = field(default_factory=dict)
    denominator_check: Optional[bool] = None
    modes: List[str] = field(default_factory=list)

    @property
    def resolved(self) -> bool:
        return self.value is not None

    def to_report(self) -> Dict[str, object]:
        out: Dict[str, object] = {
            "value": format_rational(self.value) if self.value is not None else None,
            "bracket": [format_rational(self.lo), format_rational(self.hi)],
            "resolved": self.resolved,
            "certified": self.certified,
            "provenance": self.provenance,
            "level": self.level,
            "certificate": self.certificate,
            "certificate_modes": self.modes,
            "denominator_divides_N": self.denominator_check,
        }
        if self.value is not None:
            out["approx"] = approx(self.value)
        return out


# ---------------------------------------------------------------------------
# nu-oracle

def nu_oracle(a: Ideal, I: Ideal, e: int) -> int:
    """
    nu = max{r >= 0 : a^r ⊄ I^[p^e]}, by bisection on the monotone predicate.

    Args:
        a: Ideal with 0 != a ⊆ m
        I: m-primary ideal
        e: Frobenius exponent

    Returns:
        nu_a^I(p^e)
    """
    ring = a.ring
    if a.is_zero or not containment(a, max_ideal(ring)):
        raise PreconditionError("nu-oracle needs 0 != a ⊆ m")
    if not is_m_primary(I):
        raise PreconditionError("nu-oracle needs an m-primary I")
    q = ring.p ** e
    Iq = bracket_power(I, e)
    hi = ell(I) * q + ring.ngens * (q - 1)
    lo = 0
    # least r with a^r ⊆ I^[q] lies in (lo, hi]
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if containment(ideal_power(a, mid), Iq):
            hi = mid
        else:
            lo = mid
    return hi - 1


def threshold_bracket(
    a: Ideal,
    I: Ideal,
    d: PairDivisor,
    settings: Optional[Settings] = None,
) -> Tuple[Fraction, Fraction]:
    """(lo, hi] containing fjn^I: nu-brackets when Delta = 0, else the Skoda cap."""
    cfg = resolve(settings)
    mu, _ = mu_upper(a)
    lo, hi = Fraction(0), Fraction(ell(I) + mu)
    if d.is_trivial:
        p = a.ring.p
        e = 1
        while p ** e <= cfg.nu_max_q:
            q = p ** e
            nu = nu_oracle(a, I, e)
            lo = max(lo, Fraction(nu, q))
            hi = min(hi, Fraction(nu + mu, q))
            e += 1
    logger.debug("threshold bracket (%s, %s]", lo, hi)
    return lo, hi


# ---------------------------------------------------------------------------
# candidate grids

def candidate_grid(lo: Fraction, hi: Fraction, p: int, level: int, cap: int) -> List[Fraction]:
    """All c = A/(p^g (p^h - 1)) with g <= level, 1 <= h <= level and lo < c < hi."""
    values = set()
    for g in range(level + 1):
        for h in range(1, level + 1):
            D = p ** g * (p ** h - 1)
            start = floor(lo * D) + 1
            stop = -(-hi.numerator * D // hi.denominator)
            if stop - start > cap:
                raise ComputationLimitError(f"more than {cap} candidates at level {level}", "max_candidates")
            for A in range(start, stop):
                c = Fraction(A, D)
                if lo < c < hi:
                    values.add(c)
            if len(values) > cap:
                raise ComputationLimitError(f"more than {cap} candidates at level {level}", "max_candidates")
    return sorted(values)


def _least_true(cands: Sequence[Fraction], pred: Callable[[Fraction], bool]) -> int:
    """Index of the least candidate satisfying a monotone predicate; the last is assumed true."""
    lo, hi = -1, len(cands) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(cands[mid]):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# fjn

def _tau(
    d: PairDivisor, a: Ideal, c: Fraction, settings: Settings, flags: List[str], modes: Optional[Set[str]] = None
) -> Ideal:
    value, cert = test_ideal(d, MixedExponent.single(a, c), settings)
    if modes is not None:
        modes.add(cert.mode)
    if not cert.certified:
        flags.append(format_rational(c))
    return value


def _u_range(d: PairDivisor, a: Ideal, c: Fraction, settings: Settings) -> range:
    u_min = left_limit_setup(d, a, c)[2]
    return range(u_min, max(u_min, settings.u_max) + 1)


def _left_limits(d: PairDivisor, a: Ideal, c: Fraction, settings: Settings, modes: Optional[Set[str]] = None):
    for u in _u_range(d, a, c, settings):
        L, cert = left_limit(d, a, c, u, settings)
        if modes is not None:
            modes.add(cert.mode)
        yield u, L


def _left_not_contained(
    d: PairDivisor, a: Ideal, c: Fraction, I: Ideal, settings: Settings, modes: Optional[Set[str]] = None
) -> Optional[int]:
    """u with lim_n tau^{n,u}(a^c) ⊄ I, which forces tau(a^{c-eps}) ⊄ I."""
    for u, L in _left_limits(d, a, c, settings, modes):
        if not containment(L, I):
            return u
    return None


def fjn(query: ThresholdQuery, settings: Optional[Settings] = None) -> ThresholdResult:
    """
    The exact threshold inf{t : tau(R, Delta, a^t) ⊆ I}.

    Candidates of increasing resolution are bisected with certified test
    ideals; the least passing candidate c is accepted once a left-limit
    certificate shows tau(a^{c-eps}) ⊄ I. Otherwise the bracket narrows to
    (previous candidate, c] and the resolution grows, up to g_max.
    """
    cfg = resolve(settings)
    d, a, I = query.d, query.a, query.I
    provenance = "nu-oracle+tau" if d.is_trivial else "single-method"
    tau0 = tau_pair(d, cfg)
    if containment(tau0, I):
        return ThresholdResult(Fraction(0), Fraction(0), Fraction(0), True, provenance,
                               certificate={"reason": "tau(R, Delta) ⊆ I"}, modes=[FIXED_OPERATOR])
    lo, hi = threshold_bracket(a, I, d, cfg)
    if query.lo is not None:
        lo = max(lo, query.lo)
    if query.hi is not None:
        hi = min(hi, query.hi)
    if lo >= hi:
        raise PreconditionError(f"search window ({lo}, {hi}] misses the threshold bracket")
    uncertified: List[str] = []
    modes: Set[str] = {FIXED_OPERATOR}
    p = d.ring.p
    for level in range(1, query.g_max + 1):
        cands = candidate_grid(lo, hi, p, level, cfg.max_candidates) + [hi]
        idx = _least_true(cands, lambda c: containment(_tau(d, a, c, cfg, uncertified, modes), I))
        c = cands[idx]
        prev = cands[idx - 1] if idx > 0 else lo
        u = _left_not_contained(d, a, c, I, cfg, modes)
        if u is not None:
            logger.info("threshold %s certified at level %d (u=%d)", format_rational(c), level, u)
            result = ThresholdResult(
                c, prev, c, not uncertified, provenance, level,
                {"left_limit_u": u, "uncertified_points": uncertified},
                modes=sorted(modes),
            )
            result.denominator_check = _denominator_check(d, a, [c], cfg)
            return result
        lo, hi = prev, c
    logger.warning("threshold unresolved in (%s, %s] at g_max=%d", lo, hi, query.g_max)
    return ThresholdResult(None, lo, hi, False, provenance, query.g_max,
                           {"uncertified_points": uncertified}, modes=sorted(modes))


def fpt(d: PairDivisor, a: Ideal, g_max: int = 6, settings: Optional[Settings] = None) -> ThresholdResult:
    return fjn(ThresholdQuery(d, a, max_ideal(d.ring), g_max=g_max), settings)


def is_jumping_number(
    d: PairDivisor,
    a: Ideal,
    c,
    settings: Optional[Settings] = None,
) -> Optional[bool]:
    """True/False when certified, None when neither certificate applies."""
    cfg = resolve(settings)
    c = as_rational(c)
    at_c, _ = test_ideal(d, MixedExponent.single(a, c), cfg)
    for _, L in _left_limits(d, a, c, cfg):
        if not containment(L, at_c):
            return True
    q = d.q
    for k in range(1, cfg.u_max + 1):
        below = c - Fraction(1, q ** k)
        if below <= 0:
            continue
        before, _ = test_ideal(d, MixedExponent.single(a, below), cfg)
        if before == at_c:
            return False
    return None


@dataclass
class JumpList:
    values: List[Fraction]
    unresolved: List[Tuple[Fraction, Fraction]]
    certified: bool
    denominator_check: Optional[bool] = None
    modes: List[str] = field(default_factory=list)

    def to_report(self) -> Dict[str, object]:
        return {
            "jumping_numbers": [format_rational(v) for v in self.values],
            "unresolved": [[format_rational(x), format_rational(y)] for x, y in self.unresolved],
            "certified": self.certified,
            "certificate_modes": self.modes,
            "denominator_divides_N": self.denominator_check,
        }


def jumping_numbers(query: ThresholdQuery, settings: Optional[Settings] = None) -> JumpList:
    """
    Every F-jumping number of a in (lo, hi].

    Sweeps upward: from the current value T, the next jump is the least c
    with tau(a^c) != T, accepted when a left-limit certificate contains T.
    Past mu(a) + 1 the Skoda periodicity restricts candidates to b + k for
    jumps b in (mu, mu + 1], each verified directly.
    """
    cfg = resolve(settings)
    d, a = query.d, query.a
    lo = query.lo if query.lo is not None else Fraction(0)
    hi = query.hi if query.hi is not None else Fraction(ell(query.I) + mu_upper(a)[0])
    mu = mu_upper(a)[0]
    p = d.ring.p
    uncertified: List[str] = []
    modes: Set[str] = {FIXED_OPERATOR}
    found: List[Fraction] = []
    unresolved: List[Tuple[Fraction, Fraction]] = []
    current = lo
    T = tau_pair(d, cfg) if lo == 0 else _tau(d, a, lo, cfg, uncertified, modes)
    while current < hi:
        if lo <= mu and current >= mu + 1 and not unresolved:
            base_jumps = [b for b in found if mu < b <= mu + 1]
            extra = sorted({b + k for b in base_jumps for k in range(1, int(hi - b) + 1)
                            if current < b + k <= hi})
            for c in extra:
                verdict = is_jumping_number(d, a, c, cfg)
                if verdict:
                    found.append(c)
                elif verdict is None:
                    unresolved.append((c, c))
            break
        if T.is_zero or _tau(d, a, hi, cfg, uncertified, modes) == T:
            break
        window_lo, window_hi = current, hi
        accepted = None
        for level in range(1, query.g_max + 1):
            cands = candidate_grid(window_lo, window_hi, p, level, cfg.max_candidates) + [window_hi]
            idx = _least_true(cands, lambda c: _tau(d, a, c, cfg, uncertified, modes) != T)
            c = cands[idx]
            prev = cands[idx - 1] if idx > 0 else window_lo
            if any(containment(T, L) for _, L in _left_limits(d, a, c, cfg, modes)):
                accepted = c
                break
            window_lo, window_hi = prev, c
        if accepted is None:
            logger.warning("jump in (%s, %s] unresolved", window_lo, window_hi)
            unresolved.append((window_lo, window_hi))
            current = window_hi
        else:
            found.append(accepted)
            current = accepted
        T = _tau(d, a, current, cfg, uncertified, modes)
    found.sort()
    return JumpList(found, unresolved, not uncertified and not unresolved,
                    _denominator_check(d, a, found, cfg), sorted(modes))


# ---------------------------------------------------------------------------
# truncated thresholds

def fjn_truncated(
    d: PairDivisor,
    a: FactorLike,
    t,
    b: FactorLike,
    I: Ideal,
    n: int,
    u: int,
    settings: Optional[Settings] = None,
) -> Fraction:
    """
    inf{s > 0 : tau^{n,u}(a^t b^s) ⊆ I} = k*/q^n.

    The mixed ideal is constant for s in ((k-1)/q^n, k/q^n], so the value
    is the least k >= 0 with the b-exponent q^u k passing, found by bisection
    on [0, (ell_I + mu(b)) q^n]. a and b may be symbolic Perturbations.
    """
    cfg = resolve(settings)
    t = as_rational(t)
    q = d.q
    if isinstance(a, Perturbation):
        base_exps = [(a, q ** u * max(0, ceil(t * q ** n - 1)))]
    else:
        base_exps = mixed_exponents(d, MixedExponent.single(a, t), n, u)
    tau0 = tau_pair(d, cfg)
    if base_exps is None:
        return Fraction(0)
    b_ideal = b.base if isinstance(b, Perturbation) else b

    def passes(k: int) -> bool:
        exps: List[Tuple[FactorLike, int]] = list(base_exps) + [(b, q ** u * k)]
        return mixed_contained(d, exps, tau0, n + u, I, cfg)

    if passes(0):
        return Fraction(0)
    lo, hi = 0, (ell(I) + mu_upper(b_ideal)[0]) * q ** n
    doublings = 0
    while not passes(hi):
        lo, hi = hi, 2 * hi
        doublings += 1
        if doublings > cfg.max_chain:
            raise ComputationLimitError("truncated threshold search did not close", "max_chain")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if passes(mid):
            hi = mid
        else:
            lo = mid
    return Fraction(hi, q ** n)


# ---------------------------------------------------------------------------
# denominators

@dataclass(frozen=True)
class DenominatorBound:
    l: int
    n: int
    N: Optional[int]

    def to_report(self) -> Dict[str, object]:
        return {"l": self.l, "n": self.n, "N": str(self.N) if self.N is not None else None}


def denominator_bound(
    d: PairDivisor,
    M: int,
    settings: Optional[Settings] = None,
    max_bits: int = 1 << 16,
) -> DenominatorBound:
    """
    N = q^n (q^{n!} - 1) with every jumping number of a ⊇ m^M in (1/N)Z.

    l = len(R/m^M) + mu(m^M) and n = len(tau(R, Delta)/tau(R, Delta, m^{Ml})).
    N is left as None when q^{n!} would exceed max_bits.
    """
    if M < 1:
        raise PreconditionError(f"M must be >= 1, got {M}")
    cfg = resolve(settings)
    ring = d.ring
    k = ring.ngens
    l = comb(M + k - 1, k) + comb(M + k - 1, k - 1)
    tau0 = tau_pair(d, cfg)
    low, _ = test_ideal(d, MixedExponent.single(max_ideal(ring), Fraction(M * l)), cfg)
    n = quotient_length(tau0, low, cfg)
    q = d.q
    N = None
    if n < 20 and factorial(n) * q.bit_length() <= max_bits:
        N = q ** n * (q ** factorial(n) - 1)
    return DenominatorBound(l, n, N)


def _denominator_check(d: PairDivisor, a: Ideal, values: Sequence[Fraction], cfg: Settings) -> Optional[bool]:
    if not values or not is_m_primary(a):
        return None
    try:
        bound = denominator_bound(d, ell(a), cfg)
    except ComputationLimitError:
        return None
    if bound.N is None:
        return None
    return all((v * bound.N).denominator == 1 for v in values)


def orbit_map(b: Fraction, q: int, l: int, m: int) -> Fraction:
    """b_m = (q^m b - floor(q^m b)) + min(l - 1, floor(q^m b))."""
    x = b * q ** m
    whole = floor(x)
    return (x - whole) + min(l - 1, whole)


def orbit(b: Fraction, q: int, l: int, steps: int) -> Tuple[List[Fraction], Optional[int]]:
    """[b_0..b_steps] and the first index whose value already appeared."""
    seen: Dict[Fraction, int] = {}
    values = []
    first_repeat = None
    for m in range(steps + 1):
        v = orbit_map(b, q, l, m)
        values.append(v)
        if first_repeat is None and v in seen:
            first_repeat = m
        seen.setdefault(v, m)
    return values, first_repeat


# ---------------------------------------------------------------------------
# subadditivity

@dataclass
class SubadditivityReport:
    lhs: ThresholdResult
    rhs_a: ThresholdResult
    rhs_b: ThresholdResult
    verdict: str

    def to_report(self) -> Dict[str, object]:
        return {
            "fjn_sum": self.lhs.to_report(),
            "fjn_a": self.rhs_a.to_report(),
            "fjn_b": self.rhs_b.to_report(),
            "verdict": self.verdict,
        }


def subadditivity_verdict(lhs: ThresholdResult, ra: ThresholdResult, rb: ThresholdResult) -> str:
    # unresolved brackets are (lo, hi]: lo is a strict lower bound
    lhs_upper = lhs.value if lhs.resolved else lhs.hi
    rhs_upper = (ra.value if ra.resolved else ra.hi) + (rb.value if rb.resolved else rb.hi)
    rhs_floor = (ra.value if ra.resolved else ra.lo) + (rb.value if rb.resolved else rb.lo)
    if lhs_upper <= rhs_floor:
        return "holds"
    if (lhs.resolved and lhs.value > rhs_upper) or (not lhs.resolved and lhs.lo >= rhs_upper):
        logger.error("subadditivity violated: fjn(a+b) exceeds %s", format_rational(rhs_upper))
        return "violated"
    return "undetermined"


def subadditivity_check(
    d: PairDivisor,
    a: Ideal,
    b: Ideal,
    I: Ideal,
    g_max: int = 6,
    settings: Optional[Settings] = None,
) -> SubadditivityReport:
    """fjn(a + b) <= fjn(a) + fjn(b), decided from values or brackets."""
    lhs = fjn(ThresholdQuery(d, ideal_sum(a, b), I, g_max=g_max), settings)
    ra = fjn(ThresholdQuery(d, a, I, g_max=g_max), settings)
    rb = fjn(ThresholdQuery(d, b, I, g_max=g_max), settings)
    return SubadditivityReport(lhs, ra, rb, subadditivity_verdict(lhs, ra, rb))
