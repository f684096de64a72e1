"""
Test Ideal Engine
Computes tau(R, Delta), the approximating chains tau_+ / tau_- and the mixed
ideals tau^{n,u}_{e,q}, full test ideals with stabilization certificates,
left limits tau(a^{c-eps}), and stabilization exponents.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import ceil, comb, gcd
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .config import Settings, resolve
from .errors import ComputationLimitError, InadmissibleExponentError, InfiniteColengthError, PreconditionError
from .frobenius import PairDivisor, pair_step, pair_trace_image, trace_power_image, trace_power_image_peeled
from .polycore import (
    Ideal,
    containment,
    ell,
    ideal_sum,
    max_ideal,
    max_ideal_power,
    power_of_max_quotient_length,
)
from .qadic import admissible_form, as_rational, digit, format_rational

logger = logging.getLogger(__name__)

FIXED_OPERATOR = "fixed-operator"
WINDOW_HEURISTIC = "window-heuristic"
TRIVIAL = "trivial"


@dataclass(frozen=True)
class MixedExponent:
    """The formal product a_1^{t_1} ... a_m^{t_m}."""

    factors: Tuple[Tuple[Ideal, Fraction], ...]

    def __post_init__(self):
        clean = []
        for A, t in self.factors:
            t = as_rational(t)
            if t < 0:
                raise InadmissibleExponentError(f"exponent must be >= 0, got {format_rational(t)}")
            clean.append((A, t))
        if len({A.ring for A, _ in clean}) > 1:
            raise PreconditionError("mixed exponent over different rings")
        object.__setattr__(self, "factors", tuple(clean))

    @classmethod
    def single(cls, a: Ideal, t) -> "MixedExponent":
        return cls(((a, as_rational(t)),))

    def scaled(self, factor: Fraction) -> "MixedExponent":
        return MixedExponent(tuple((A, t * factor) for A, t in self.factors))

    def shifted(self, index: int, delta: Fraction) -> "MixedExponent":
        return MixedExponent(tuple(
            (A, t + delta if i == index else t) for i, (A, t) in enumerate(self.factors)
        ))


@dataclass(frozen=True)
class TauChainCertificate:
    mode: str
    stable_index: int
    burn_in: int = 0
    witness: str = ""
    e_used: int = 1
    scaling: int = 0

    @property
    def certified(self) -> bool:
        return self.mode != WINDOW_HEURISTIC

    def to_report(self) -> Dict[str, object]:
        return {
            "mode": self.mode,
            "stable_index": self.stable_index,
            "burn_in": self.burn_in,
            "witness": self.witness,
            "e": self.e_used,
            "scaling": self.scaling,
            "certified": self.certified,
        }


@dataclass(frozen=True)
class Perturbation:
    """The ideal base + m^M, kept symbolic when M is too large to expand."""

    base: Ideal
    M: int

    def materialize(self, cap: int) -> Optional[Ideal]:
        n = self.base.ring.ngens
        if n == 1 or comb(self.M + n - 1, n - 1) <= cap:
            return ideal_sum(self.base, max_ideal_power(self.base.ring, self.M))
        return None


FactorLike = Union[Ideal, Perturbation]


# ---------------------------------------------------------------------------
# tau(R, Delta)

@lru_cache(maxsize=256)
def _tau_pair(d: PairDivisor, max_chain: int) -> Tuple[Ideal, int]:
    ring = d.ring
    if d.is_trivial:
        return Ideal.unit(ring), 0
    q = d.q
    J = Ideal(ring, [d.f ** (-(-d.a // (q - 1)))])
    for n in range(max_chain):
        nxt = pair_step(J, d)
        if nxt == J:
            logger.debug("tau(R, Delta) stable at n=%d", n)
            return J, n
        J = nxt
    raise ComputationLimitError(f"tau(R, Delta) chain did not close within {max_chain} steps", "max_chain")


def tau_pair(d: PairDivisor, settings: Optional[Settings] = None) -> Ideal:
    """
    tau(R, Delta): the stable value of J_{n+1} = phi^e_Delta(F^e_* J_n),
    J_0 = (f^{ceil(a/(q-1))}). First equality certifies the value.
    """
    return _tau_pair(d, resolve(settings).max_chain)[0]


def check_pair_compatibility(d: PairDivisor, settings: Optional[Settings] = None) -> bool:
    """phi^e_Delta(F^e_* tau(R, Delta)) == tau(R, Delta)."""
    tau0 = tau_pair(d, settings)
    return pair_step(tau0, d) == tau0


# ---------------------------------------------------------------------------
# approximating chains

def _usable(m: MixedExponent) -> Optional[List[Tuple[Ideal, Fraction]]]:
    kept = []
    for A, t in m.factors:
        if t == 0 or A.is_unit:
            continue
        if A.is_zero:
            return None
        kept.append((A, t))
    return kept


def _base(d: PairDivisor, q_aux: Optional[Ideal], settings: Optional[Settings]) -> Ideal:
    return q_aux if q_aux is not None else tau_pair(d, settings)


def tau_plus(d: PairDivisor, m: MixedExponent, n: int, settings: Optional[Settings] = None) -> Ideal:
    """tau_+^{en} = phi^{en}_Delta(F_*(prod a_i^{ceil(t_i q^n)} tau(R, Delta)))."""
    ring = d.ring
    factors = _usable(m)
    if factors is None:
        return Ideal.zero(ring)
    q = d.q
    exps = [(A, ceil(t * q ** n)) for A, t in factors]
    return trace_power_image(exps, tau_pair(d, settings), d, n)


def tau_minus(d: PairDivisor, m: MixedExponent, n: int, settings: Optional[Settings] = None) -> Ideal:
    """tau_-^{en} = phi^{en}_Delta(F_*(prod a_i^{ceil(t_i q^n - 1)} tau(R, Delta)))."""
    ring = d.ring
    factors = _usable(m)
    if factors is None:
        return Ideal.zero(ring)
    q = d.q
    exps = [(A, ceil(t * q ** n - 1)) for A, t in factors]
    return trace_power_image(exps, tau_pair(d, settings), d, n)


def mixed_exponents(d: PairDivisor, m: MixedExponent, n: int, u: int) -> Optional[List[Tuple[Ideal, int]]]:
    factors = _usable(m)
    if factors is None:
        return None
    q = d.q
    return [(A, q ** u * max(0, ceil(t * q ** n - 1))) for A, t in factors]


def tau_mixed_nu(
    d: PairDivisor,
    m: MixedExponent,
    n: int,
    u: int,
    q_aux: Optional[Ideal] = None,
    settings: Optional[Settings] = None,
) -> Ideal:
    """
    tau^{n,u}_{e,q} = phi^{e(n+u)}_Delta(F_*(prod a_i^{q^u ceil(t_i q^n - 1)} q_aux)).

    Args:
        d: Pair divisor
        m: Mixed exponent
        n: Truncation level
        u: Frobenius padding
        q_aux: Auxiliary ideal; defaults to tau(R, Delta)

    Returns:
        The mixed ideal
    """
    if n < 0 or u < 0:
        raise PreconditionError(f"tau_mixed_nu needs n, u >= 0, got n={n}, u={u}")
    exps = mixed_exponents(d, m, n, u)
    if exps is None:
        return Ideal.zero(d.ring)
    return trace_power_image(exps, _base(d, q_aux, settings), d, n + u)


def perturbation_cutoff(I: Ideal, q: int, steps: int) -> int:
    """L with eth_root(m^L, steps) ⊆ m^{ell_I} ⊆ I."""
    Q = q ** steps
    return ell(I) * Q + I.ring.ngens * (Q - 1)


def mixed_contained(
    d: PairDivisor,
    exps: Sequence[Tuple[FactorLike, int]],
    base: Ideal,
    steps: int,
    I: Ideal,
    settings: Optional[Settings] = None,
) -> bool:
    """
    phi^{e*steps}_Delta(F_*(prod A_i^{k_i} base)) ⊆ I with symbolic perturbations.

    (a + m^M)^K expands to sum_j a^{K-j} m^{Mj}; terms with Mj past the
    cutoff land in I after the trace and are dropped.
    """
    cfg = resolve(settings)
    plain: List[Tuple[Ideal, int]] = []
    symbolic: List[Tuple[Perturbation, int]] = []
    for A, k in exps:
        if isinstance(A, Perturbation):
            ideal = A.materialize(cfg.expand_cap)
            if ideal is not None:
                plain.append((ideal, k))
            elif k:
                symbolic.append((A, k))
        else:
            plain.append((A, k))
    if not symbolic:
        return containment(trace_power_image(plain, base, d, steps), I)
    cutoff = perturbation_cutoff(I, d.q, steps)
    ranges = [range(0, min(k, -(-cutoff // P.M) - 1) + 1) for P, k in symbolic]
    m = max_ideal(d.ring)
    for js in itertools.product(*ranges):
        order = sum(P.M * j for (P, _), j in zip(symbolic, js))
        if order >= cutoff:
            continue
        term = list(plain)
        for (P, k), j in zip(symbolic, js):
            term.append((P.base, k - j))
        if order:
            term.append((m, order))
        if not containment(trace_power_image(term, base, d, steps), I):
            return False
    return True


def tau_mixed_nu_contained(
    d: PairDivisor,
    factors: Sequence[Tuple[FactorLike, Fraction]],
    n: int,
    u: int,
    I: Ideal,
    q_aux: Optional[Ideal] = None,
    settings: Optional[Settings] = None,
) -> bool:
    """tau^{n,u}_{e,q}(prod b_i^{t_i}) ⊆ I where some b_i may be a Perturbation."""
    q = d.q
    exps = []
    for A, t in factors:
        t = as_rational(t)
        if t == 0:
            continue
        exps.append((A, q ** u * max(0, ceil(t * q ** n - 1))))
    return mixed_contained(d, exps, _base(d, q_aux, settings), n + u, I, settings)


# ---------------------------------------------------------------------------
# full test ideals

def _mu(A: Ideal) -> int:
    return len(A.mingens)


def _rescaling(d: PairDivisor, factors: Sequence[Tuple[Ideal, Fraction]]) -> Tuple[int, int]:
    """(e', G) with (p^e'-1) p^{e'G} t_i integral and p^{e'G} t_i > mu(a_i)."""
    p = d.ring.p
    e_new = d.e
    gs = []
    for _, t in factors:
        g, h = admissible_form(t, p)
        e_new = e_new * h // gcd(e_new, h)
        gs.append(g)
    G = max(-(-g // e_new) for g in gs)
    qn = p ** e_new
    while any(qn ** G * t <= _mu(A) for A, t in factors):
        G += 1
    return e_new, G


def _fixed_operator_chain(
    d: PairDivisor,
    factors: Sequence[Tuple[Ideal, Fraction]],
    settings: Settings,
) -> Tuple[Ideal, int]:
    """
    tau_+ chain of s_i with (q-1)s_i integral and s_i > mu_i, driven by
    T_{n+1} = phi^e_Delta(F_*(prod a_i^{(q-1)s_i} T_n)); first equality is final.
    """
    q = d.q
    tau0 = tau_pair(d, settings)
    T = trace_power_image([(A, ceil(s)) for A, s in factors], tau0, d, 0)
    step_factors = [(A, int((q - 1) * s)) for A, s in factors]
    for n in range(settings.max_chain):
        nxt = trace_power_image(step_factors, T, d, 1)
        logger.debug("fixed-operator chain n=%d: %d generators", n, len(nxt.gens))
        if nxt == T:
            return T, n
        T = nxt
    raise ComputationLimitError(f"tau chain did not close within {settings.max_chain} steps", "max_chain")


def _window_chain(d: PairDivisor, m: MixedExponent, settings: Settings) -> Tuple[Ideal, int]:
    history: List[Ideal] = []
    for n in range(settings.max_chain):
        history.append(tau_plus(d, m, n, settings))
        if n >= settings.burn_in + settings.window:
            tail = history[-(settings.window + 1):]
            if all(x == tail[0] for x in tail):
                return tail[0], n - settings.window
    raise ComputationLimitError(f"no stable window within {settings.max_chain} steps", "max_chain")


@lru_cache(maxsize=1024)
def _test_ideal_cached(d: PairDivisor, factors: Tuple[Tuple[Ideal, Fraction], ...], settings: Settings):
    kept = list(factors)
    e_new, G = _rescaling(d, kept)
    if G > settings.max_scaling:
        logger.warning("rescaling %d exceeds cap %d; using the window heuristic", G, settings.max_scaling)
        value, n_star = _window_chain(d, MixedExponent(factors), settings)
        cert = TauChainCertificate(
            WINDOW_HEURISTIC, n_star, settings.burn_in,
            f"{settings.window} equal steps", d.e, 0,
        )
        return value, cert
    big = d.enlarge(e_new // d.e)
    scale = big.q ** G
    scaled = [(A, t * scale) for A, t in kept]
    T, n_star = _fixed_operator_chain(big, scaled, settings)
    value = pair_trace_image(T, big, G)
    cert = TauChainCertificate(FIXED_OPERATOR, n_star, 0, f"T_{n_star} == T_{n_star + 1}", e_new, G)
    return value, cert


def test_ideal(
    d: PairDivisor,
    m: MixedExponent,
    settings: Optional[Settings] = None,
) -> Tuple[Ideal, TauChainCertificate]:
    """
    The test ideal tau(R, Delta, prod a_i^{t_i}) with its certificate.

    Exponents are rescaled to s_i = p^{e'G} t_i with (p^{e'}-1)s_i integral and
    s_i > mu(a_i); the tau_+ chain of s then closes at its first one-step
    equality and tau(t) = phi^{e'G}_Delta(F_* tau(s)). When G would exceed the
    configured cap the unscaled chain is stopped by an equal-value window and
    flagged.

    Args:
        d: Pair divisor
        m: Mixed exponent
        settings: Limits; env-derived when omitted

    Returns:
        (test ideal, TauChainCertificate)
    """
    cfg = resolve(settings)
    factors = _usable(m)
    if factors is None:
        return Ideal.zero(d.ring), TauChainCertificate(TRIVIAL, 0, witness="zero factor")
    if not factors:
        return tau_pair(d, cfg), TauChainCertificate(TRIVIAL, 0, witness="no factors")
    return _test_ideal_cached(d, tuple(factors), cfg)


# ---------------------------------------------------------------------------
# left limits

@dataclass(frozen=True)
class LeftLimitCertificate:
    mode: str
    fixpoint_index: int
    e_used: int
    u: int
    digit: int

    def to_report(self) -> Dict[str, object]:
        return {
            "mode": self.mode,
            "fixpoint_index": self.fixpoint_index,
            "e": self.e_used,
            "u": self.u,
            "digit": self.digit,
        }


def left_limit_setup(d: PairDivisor, a: Ideal, c: Fraction) -> Tuple[PairDivisor, int, int]:
    """(d', l, u_min): base enlarged so q'(q'-1)c is integral, the constant digit, the least usable u."""
    c = as_rational(c)
    if c <= 0:
        raise InadmissibleExponentError(f"left limit needs c > 0, got {format_rational(c)}")
    p = d.ring.p
    g, h = admissible_form(c, p)
    step = d.e * h // gcd(d.e, h)
    e_new = step * max(1, -(-g // step))
    big = d.enlarge(e_new // d.e)
    l = digit(c, big.q, 2)
    mu = _mu(a)
    u_min = 1
    while big.q ** (u_min - 1) < mu:
        u_min += 1
    return big, l, u_min


def left_limit(
    d: PairDivisor,
    a: Ideal,
    c,
    u: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> Tuple[Ideal, LeftLimitCertificate]:
    """
    Lower certificate for tau(a^{c-eps}): lim_n tau^{n,u}(a^c).

    With the base enlarged so that every digit of c from index 2 on is l,
    the digit-shift Q -> phi^e_Delta(F_*(a^{q^u l} Q)) is iterated from
    tau(R, Delta) to a fixpoint Q*, and tau^{1,u}_{e,Q*}(a^c) is returned.
    The result is inside tau(a^{c-eps}) and equals it once u >= ustab.
    """
    cfg = resolve(settings)
    c = as_rational(c)
    big, l, u_min = left_limit_setup(d, a, c)
    u = max(u_min, u if u is not None else u_min)
    q = big.q
    # Q = B * prod A^k over rest; the large power a^{q^{u-1} l} is never expanded
    B, rest = tau_pair(d, cfg), []
    history = [(B, rest)]
    mode, index = FIXED_OPERATOR, None
    for k in range(cfg.max_chain):
        state = trace_power_image_peeled([(a, q ** u * l)] + rest, B, big, 1)
        if state == (B, rest):
            index = k
            break
        B, rest = state
        history.append(state)
    if index is None:
        tail = history[-cfg.window:]
        if len(tail) == cfg.window and all(x == tail[0] for x in tail):
            mode, index = WINDOW_HEURISTIC, len(history) - cfg.window
        else:
            raise ComputationLimitError(f"digit-shift iteration did not settle within {cfg.max_chain} steps", "max_chain")
        logger.warning("left limit at %s settled only by window", format_rational(c))
    value = trace_power_image([(a, q ** u * ceil(c * q - 1))] + rest, B, big, 1 + u)
    return value, LeftLimitCertificate(mode, index, big.e, u, l)


# ---------------------------------------------------------------------------
# stabilization exponents

def stab_exponent(d: PairDivisor, m: MixedExponent, settings: Optional[Settings] = None) -> int:
    """Least n with tau_+^{en} equal to the test ideal."""
    cfg = resolve(settings)
    target, _ = test_ideal(d, m, cfg)
    for n in range(cfg.max_chain + 1):
        if tau_plus(d, m, n, cfg) == target:
            return n
    raise ComputationLimitError(f"stabilization exponent above {cfg.max_chain}", "max_chain")


def stab_skoda_pair(d: PairDivisor, a: Ideal, t, settings: Optional[Settings] = None) -> Tuple[int, int]:
    """(stab(t), stab(t-1)) for t > mu(a); the first never exceeds the second."""
    t = as_rational(t)
    if t <= _mu(a) or t <= 1:
        raise PreconditionError("stab_skoda_pair needs t > mu(a) and t > 1")
    return (
        stab_exponent(d, MixedExponent.single(a, t), settings),
        stab_exponent(d, MixedExponent.single(a, t - 1), settings),
    )


def stab_frobenius_pair(d: PairDivisor, m: MixedExponent, settings: Optional[Settings] = None) -> Tuple[int, int]:
    """(stab(t), stab(q t)); the first is at most the second plus one."""
    return stab_exponent(d, m, settings), stab_exponent(d, m.scaled(Fraction(d.q)), settings)


def stab_shift(t, p: int, e: int, limit: int = 64) -> Optional[int]:
    """Least l >= 0 with p^{el}(p^e-1)t integral; stab(t) <= ustab + l."""
    t = as_rational(t)
    q = p ** e
    for l in range(limit + 1):
        if (t * q ** l * (q - 1)).denominator == 1:
            return l
    return None


def stab_fin_colen_bound(d: PairDivisor, M: int, settings: Optional[Settings] = None) -> int:
    """u_0 = len(tau / m^{l M q^{n_0}} tau) + n_0 bounding ustab for ideals containing m^M."""
    if M < 1:
        raise PreconditionError(f"M must be >= 1, got {M}")
    ring = d.ring
    n = ring.ngens
    l = comb(M + n - 1, n) + comb(M + n - 1, n - 1)
    q = d.q
    n0 = 1
    while q ** (n0 - 1) <= l:
        n0 += 1
    return power_of_max_quotient_length(tau_pair(d, settings), l * M * q ** n0, settings) + n0


@dataclass
class UStabResult:
    value: int
    certified: bool
    evaluated: int
    worst: Optional[List[str]] = None
    bound: Optional[int] = None
    notes: List[str] = field(default_factory=list)

    def to_report(self) -> Dict[str, object]:
        return {
            "ustab": self.value,
            "certified": self.certified,
            "evaluated": self.evaluated,
            "worst_exponents": self.worst,
            "stab_fin_colen_bound": self.bound,
            "notes": self.notes,
        }


def ustab_bounded(
    d: PairDivisor,
    a_list: Sequence[Ideal],
    search_cap: int,
    settings: Optional[Settings] = None,
) -> UStabResult:
    """
    max stab over t_i = k/(q-1), 1 <= k <= mu(a_i)(q-1).

    Larger t_i never raise stab, so this finite enumeration is the uniform
    stabilization exponent. Exceeding search_cap returns the partial maximum
    marked uncertified.
    """
    cfg = resolve(settings)
    q = d.q
    grids = [[Fraction(k, q - 1) for k in range(1, _mu(A) * (q - 1) + 1)] for A in a_list]
    best, worst, count = 0, None, 0
    certified = True
    for ts in itertools.product(*grids):
        if count >= search_cap:
            certified = False
            logger.warning("ustab enumeration stopped at cap %d", search_cap)
            break
        m = MixedExponent(tuple(zip(a_list, ts)))
        s = stab_exponent(d, m, cfg)
        count += 1
        if s > best or worst is None:
            best, worst = max(best, s), [format_rational(t) for t in ts]
    bound = None
    if len(a_list) == 1:
        A = a_list[0]
        try:
            bound = stab_fin_colen_bound(d, ell(A), cfg)
        except (ComputationLimitError, InfiniteColengthError) as exc:
            logger.debug("no stab_fin_colen bound: %s", exc)
    return UStabResult(best, certified, count, worst, bound)
