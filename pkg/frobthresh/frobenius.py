"""
Frobenius Pushforward and Trace Maps
Decomposes polynomials over the monomial basis of F^e_* R, computes e-th root
ideals (images of the generating trace map), and evaluates the pair maps
phi^e_Delta for Delta = (a/(p^e-1)) div(f), including images of arbitrarily
large ideal powers without expanding them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import PreconditionError
from .polycore import (
    Ideal,
    Monomial,
    PolyRing,
    Polynomial,
    format_polynomial,
    frobenius_power,
    ideal_power,
    ideal_product,
    max_ideal,
    power_of_max_exponent,
)

logger = logging.getLogger(__name__)

Factor = Tuple[Ideal, int]


def _char(g: Polynomial) -> int:
    return int(g.ring.domain.mod)


@dataclass(frozen=True)
class FrobComponents:
    """g = sum_u parts[u]^(p^e) * x^u over basis exponents 0 <= u_i < p^e."""

    e: int
    q: int
    parts: Dict[Monomial, Polynomial] = field(default_factory=dict)

    def component(self, u: Sequence[int]) -> Optional[Polynomial]:
        return self.parts.get(tuple(u))

    def nonzero(self) -> List[Polynomial]:
        return [c for c in self.parts.values() if c]


def frobenius_decompose(g: Polynomial, e: int) -> FrobComponents:
    """
    Split g over the free basis {x^u : 0 <= u_i < q} of F^e_* R.

    Args:
        g: Polynomial over F_p
        e: Frobenius exponent (>= 1)

    Returns:
        FrobComponents with parts[u] = g_u; c^(1/q) = c on F_p
    """
    if e < 1:
        raise PreconditionError(f"frobenius_decompose needs e >= 1, got {e}")
    q = _char(g) ** e
    buckets: Dict[Monomial, Dict[Monomial, object]] = {}
    for m, c in g.items():
        u = tuple(v % q for v in m)
        w = tuple(v // q for v in m)
        buckets.setdefault(u, {})[w] = c
    parts = {u: g.ring.from_dict(terms) for u, terms in buckets.items()}
    return FrobComponents(e=e, q=q, parts=parts)


def reassemble(components: FrobComponents, ring: PolyRing) -> Polynomial:
    total = ring.zero
    for u, part in components.parts.items():
        total += frobenius_power(part, components.e, ring.p) * ring.monomial(u)
    return total


def trace_map(g: Polynomial, e: int) -> Polynomial:
    """Phi^e(F^e_* g): the component at the top basis monomial x^(q-1,...,q-1)."""
    comps = frobenius_decompose(g, e)
    top = tuple([comps.q - 1] * g.ring.ngens)
    part = comps.component(top)
    return part if part is not None else g.ring.zero


def eth_root(J: Ideal, e: int) -> Ideal:
    """Smallest C with J ⊆ C^[p^e]: generated by every basis component of every generator."""
    if e < 1:
        raise PreconditionError(f"eth_root needs e >= 1, got {e}")
    if J.is_zero:
        return J
    comps: List[Polynomial] = []
    for g in J.gens:
        comps.extend(frobenius_decompose(g, e).nonzero())
    return Ideal(J.ring, comps).minimized()


@dataclass(frozen=True)
class PairDivisor:
    """Delta = (a/(p^e-1)) div(f); phi^e_Delta is Phi^e(f^a * -)."""

    ring: PolyRing
    f: Polynomial
    a: int = 0
    e: int = 1

    def __post_init__(self):
        f = self.ring.coerce(self.f)
        object.__setattr__(self, "f", f)
        if not f:
            raise PreconditionError("divisor polynomial f must be nonzero")
        if self.a < 0:
            raise PreconditionError(f"divisor coefficient a must be >= 0, got {self.a}")
        if self.e < 1:
            raise PreconditionError(f"divisor exponent e must be >= 1, got {self.e}")
        if self.a > 0 and _constant_term(f):
            raise PreconditionError("f must vanish at the origin when a > 0")

    @classmethod
    def trivial(cls, ring: PolyRing, e: int = 1) -> "PairDivisor":
        return cls(ring, ring.one, 0, e)

    @property
    def q(self) -> int:
        return self.ring.p ** self.e

    @property
    def is_trivial(self) -> bool:
        return self.a == 0

    @property
    def f_power(self) -> Polynomial:
        return self.f ** self.a

    def enlarge(self, k: int) -> "PairDivisor":
        """Same Delta viewed at exponent k*e."""
        if k < 1:
            raise PreconditionError(f"enlargement factor must be >= 1, got {k}")
        if k == 1:
            return self
        q = self.q
        a = self.a * (q ** k - 1) // (q - 1)
        return PairDivisor(self.ring, self.f, a, self.e * k)

    def to_report(self) -> Dict[str, object]:
        if self.is_trivial:
            return {"f": None, "a": 0, "e": self.e}
        return {"f": format_polynomial(self.f), "a": self.a, "e": self.e}


def _constant_term(f: Polynomial) -> bool:
    zero = tuple([0] * f.ring.ngens)
    return any(m == zero for m in f.keys())


def _times_poly(J: Ideal, h: Polynomial) -> Ideal:
    if h == J.ring.one:
        return J
    return Ideal(J.ring, [h * g for g in J.gens])


def pair_step(J: Ideal, d: PairDivisor) -> Ideal:
    """phi^e_Delta(F^e_* J) = eth_root(f^a J, e)."""
    return eth_root(_times_poly(J, d.f_power), d.e)


def pair_trace_image(J: Ideal, d: PairDivisor, n: int) -> Ideal:
    """phi^{en}_Delta(F^{en}_* J), evaluated as n single steps."""
    if n < 0:
        raise PreconditionError(f"pair_trace_image needs n >= 0, got {n}")
    if n == 0:
        return J
    if d.is_trivial:
        return eth_root(J, d.e * n)
    X = J
    for _ in range(n):
        X = pair_step(X, d)
    return X


def pair_trace_image_direct(J: Ideal, d: PairDivisor, n: int) -> Ideal:
    """eth_root(f^{a(q^n-1)/(q-1)} J, en) without iterating."""
    if n < 1:
        raise PreconditionError(f"pair_trace_image_direct needs n >= 1, got {n}")
    q = d.q
    exponent = d.a * (q ** n - 1) // (q - 1)
    return eth_root(_times_poly(J, d.f ** exponent), d.e * n)


def normalize_factors(factors: Iterable[Factor]) -> Optional[List[Factor]]:
    """
    Merge equal ideals, rewrite m^j as (m, j*k) and drop trivial factors.

    Returns None when some factor is the zero ideal with a positive exponent.
    """
    merged: List[List] = []
    for A, k in factors:
        if k < 0:
            raise PreconditionError(f"factor exponent must be >= 0, got {k}")
        if k == 0 or A.is_unit:
            continue
        if A.is_zero:
            return None
        j = power_of_max_exponent(A)
        if j is not None and j > 1:
            A, k = max_ideal(A.ring), j * k
        for entry in merged:
            if entry[0] == A:
                entry[1] += k
                break
        else:
            merged.append([A, k])
    return [(A, k) for A, k in merged]


def trace_power_image(
    factors: Iterable[Factor],
    base: Ideal,
    d: PairDivisor,
    steps: int,
) -> Ideal:
    """
    phi^{e*steps}_Delta(F_*(prod A_i^{k_i} * base)) for arbitrarily large k_i.

    Each step peels k_i = q*k_i' + r_i with A^k = (A^{k'})^[q] A^r (Skoda
    pigeonhole over mu generators) and pulls A^{k'} out by the projection
    formula, so only powers A^r with r <= mu(q-1) are ever expanded.

    Args:
        factors: (ideal, exponent) pairs
        base: Ideal multiplied in before the first step
        d: Pair divisor supplying f^a and e
        steps: Number of e-steps

    Returns:
        The image ideal
    """
    X, rest = trace_power_image_peeled(factors, base, d, steps)
    for A, k in rest:
        X = ideal_product(X, ideal_power(A, k))
    return X


def trace_power_image_peeled(
    factors: Iterable[Factor],
    base: Ideal,
    d: PairDivisor,
    steps: int,
) -> Tuple[Ideal, List[Factor]]:
    """
    trace_power_image left unexpanded: (X, rest) with image = X * prod A^k over rest.

    rest is normalized, so two results with equal X and equal rest are the
    same ideal.
    """
    ring = base.ring
    current = normalize_factors(factors)
    if current is None or base.is_zero:
        return Ideal.zero(ring), []
    q = d.q
    X = base
    for step in range(steps):
        residual = _times_poly(X, d.f_power)
        peeled: List[Factor] = []
        for A, k in current:
            mu = len(A.mingens)
            kp = max(0, -((mu * (q - 1) - k) // q))
            r = k - q * kp
            if r:
                residual = ideal_product(residual, ideal_power(A, r))
            if kp:
                peeled.append((A, kp))
        X = eth_root(residual, d.e)
        current = peeled
        logger.debug("trace step %d: %d generators, %d factors left", step + 1, len(X.gens), len(current))
        if X.is_zero:
            return X, []
    return X, current
