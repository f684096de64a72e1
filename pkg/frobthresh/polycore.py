"""
Polynomial and Ideal Arithmetic over F_p
Exact ideal arithmetic in F_p[x_1..x_n] (degrevlex), the Groebner kernel the
Frobenius and test-ideal engines are built on, and the local invariants
(colength, mu, embedding dimension, ell_I) used by the threshold bounds.

The local ring at the origin is represented globally: every containment the
engines need is against an m-primary ideal, where global and local agree.
"""

from __future__ import annotations

import itertools
import logging
import threading
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from sympy import Poly, Symbol, isprime
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication,
    parse_expr,
    standard_transformations,
)
from sympy.polys.domains import GF
from sympy.polys.groebnertools import groebner
from sympy.polys.monomials import monomial_divides
from sympy.polys.orderings import grevlex, lex
from sympy.polys.rings import PolyElement
from sympy.polys.rings import ring as sympy_ring

from .config import Settings, resolve
from .errors import (
    ComputationLimitError,
    InfiniteColengthError,
    PreconditionError,
    RingMismatchError,
    SpecValidationError,
)

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]
Polynomial = PolyElement

_PARSE_TRANSFORMS = standard_transformations + (implicit_multiplication, convert_xor)
_ELIM_VAR = "_elim"
_PRUNE_LIMIT = 16


@lru_cache(maxsize=None)
def _build_sympy_ring(p: int, names: Tuple[str, ...], order: str):
    order_obj = grevlex if order == "grevlex" else lex
    return sympy_ring(",".join(names), GF(p), order_obj)[0]


@dataclass(frozen=True)
class PolyRing:
    """F_p[vars] with degrevlex order; the maximal ideal m = (vars) is implicit."""

    p: int
    vars: Tuple[str, ...]
    order: str = "grevlex"

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 2 or not isprime(self.p):
            raise PreconditionError(f"characteristic must be prime, got {self.p!r}")
        if not self.vars:
            raise PreconditionError("ring needs at least one variable")
        if len(set(self.vars)) != len(self.vars):
            raise PreconditionError(f"variables must be distinct: {list(self.vars)}")
        if self.order != "grevlex":
            raise PreconditionError("only the degrevlex order is supported")
        object.__setattr__(self, "vars", tuple(self.vars))

    @property
    def sympy(self):
        return _build_sympy_ring(self.p, self.vars, self.order)

    @property
    def ngens(self) -> int:
        return len(self.vars)

    @property
    def one(self) -> Polynomial:
        return self.sympy.one

    @property
    def zero(self) -> Polynomial:
        return self.sympy.zero

    @property
    def gens(self) -> Tuple[Polynomial, ...]:
        return tuple(self.sympy.gens)

    def monomial(self, exps: Sequence[int], coeff: int = 1) -> Polynomial:
        return self.sympy.from_dict({tuple(exps): coeff % self.p})

    def from_terms(self, terms: Dict[Monomial, int]) -> Polynomial:
        return self.sympy.from_dict({m: c % self.p for m, c in terms.items() if c % self.p})

    def coerce(self, g) -> Polynomial:
        if isinstance(g, PolyElement):
            if g.ring is not self.sympy:
                raise RingMismatchError(f"polynomial from ring {g.ring} used in {self.describe()}")
            return g
        if isinstance(g, int):
            return self.sympy(g % self.p)
        raise RingMismatchError(f"cannot use {type(g).__name__} as a polynomial of {self.describe()}")

    def describe(self) -> str:
        return f"F_{self.p}[{','.join(self.vars)}]"

    def to_report(self) -> Dict[str, object]:
        return {"p": self.p, "vars": list(self.vars), "order": "degrevlex"}


def coeff_int(c, p: int) -> int:
    return int(c) % p


def total_degree(g: Polynomial) -> int:
    return max((sum(m) for m in g.keys()), default=-1)


def is_homogeneous(g: Polynomial) -> bool:
    return len({sum(m) for m in g.keys()}) <= 1


def homogeneous_components(g: Polynomial) -> Dict[int, Polynomial]:
    parts: Dict[int, Dict[Monomial, object]] = {}
    for m, c in g.items():
        parts.setdefault(sum(m), {})[m] = c
    return {d: g.ring.from_dict(t) for d, t in parts.items()}


def _minimal_monomials(monoms: Iterable[Monomial]) -> List[Monomial]:
    by_degree: Dict[int, set] = {}
    for m in monoms:
        by_degree.setdefault(sum(m), set()).add(tuple(m))
    kept: List[Monomial] = []
    for d in sorted(by_degree):
        lower = list(kept)
        for m in sorted(by_degree[d]):
            if not any(monomial_divides(k, m) for k in lower):
                kept.append(m)
    return kept


def monomials_of_degree(n: int, d: int) -> List[Monomial]:
    out = []
    for combo in itertools.combinations_with_replacement(range(n), d):
        exps = [0] * n
        for i in combo:
            exps[i] += 1
        out.append(tuple(exps))
    return out


class Ideal:
    """
    Finite generator list with a lazily computed reduced Groebner basis.

    Values are immutable; the basis cache is filled once under a lock and is
    read-only afterwards, so ideals can be shared between threads.
    """

    __slots__ = ("ring", "gens", "_gb", "_mingens", "_powers", "_lock")

    def __init__(self, ring: PolyRing, gens: Iterable = ()):
        self.ring = ring
        seen = set()
        kept = []
        for g in gens:
            g = ring.coerce(g)
            if not g:
                continue
            key = _poly_key(g, ring.p)
            if key in seen:
                continue
            seen.add(key)
            kept.append(g)
        self.gens: Tuple[Polynomial, ...] = tuple(kept)
        self._gb: Optional[Tuple[Polynomial, ...]] = None
        self._mingens: Optional[Tuple[Polynomial, ...]] = None
        self._powers: Dict[int, "Ideal"] = {}
        self._lock = threading.Lock()

    # constructors
    @classmethod
    def unit(cls, ring: PolyRing) -> "Ideal":
        return cls(ring, [ring.one])

    @classmethod
    def zero(cls, ring: PolyRing) -> "Ideal":
        return cls(ring, [])

    @classmethod
    def principal(cls, g: Polynomial, ring: PolyRing) -> "Ideal":
        return cls(ring, [g])

    @classmethod
    def from_monomials(cls, ring: PolyRing, monoms: Iterable[Monomial]) -> "Ideal":
        return cls(ring, [ring.monomial(m) for m in _minimal_monomials(monoms)])

    # structure
    @property
    def is_zero(self) -> bool:
        return not self.gens

    @property
    def is_unit(self) -> bool:
        return any(len(g) == 1 and not any(next(iter(g.keys()))) for g in self.gens) or (
            len(self.gb) == 1 and not any(self.gb[0].LM)
        )

    @property
    def is_monomial(self) -> bool:
        return all(len(g) == 1 for g in self.gens)

    @property
    def is_principal(self) -> bool:
        return len(self.gens) == 1

    @property
    def is_homogeneous(self) -> bool:
        return all(is_homogeneous(g) for g in self.gens)

    @property
    def gb(self) -> Tuple[Polynomial, ...]:
        if self._gb is None:
            with self._lock:
                if self._gb is None:
                    self._gb = self._compute_gb()
        return self._gb

    def _compute_gb(self) -> Tuple[Polynomial, ...]:
        ring = self.ring
        if not self.gens:
            return ()
        if any(len(g) == 1 and not any(next(iter(g.keys()))) for g in self.gens):
            return (ring.one,)
        if self.is_monomial:
            monoms = _minimal_monomials(next(iter(g.keys())) for g in self.gens)
            basis = [ring.monomial(m) for m in monoms]
        elif len(self.gens) == 1:
            basis = [self.gens[0].monic()]
        else:
            logger.debug("groebner: %d generators in %s", len(self.gens), ring.describe())
            basis = [g.monic() for g in groebner(list(self.gens), ring.sympy)]
        order = ring.sympy.order
        return tuple(sorted(basis, key=lambda g: order(g.LM), reverse=True))

    @property
    def leading_monomials(self) -> List[Monomial]:
        return [g.LM for g in self.gb]

    def minimized(self) -> "Ideal":
        """A generating set no larger than the current one, inter-reduced where cheap."""
        if self.is_monomial or len(self.gens) <= 1:
            return Ideal(self.ring, self.gb) if self.is_monomial else self
        if len(self.gb) <= len(self.gens):
            return Ideal(self.ring, self.gb)
        return self

    @property
    def mingens(self) -> Tuple[Polynomial, ...]:
        """Generators with redundant ones removed (minimal when homogeneous)."""
        if self._mingens is None:
            gens = self._prune()
            with self._lock:
                if self._mingens is None:
                    self._mingens = gens
        return self._mingens

    def _prune(self) -> Tuple[Polynomial, ...]:
        if not self.gens:
            return ()
        if self.is_unit:
            return (self.ring.one,)
        if self.is_monomial:
            return self.gb
        if len(self.gens) == 1:
            return (self.gens[0].monic(),)
        start = self.gens if len(self.gens) <= len(self.gb) else self.gb
        if len(start) > _PRUNE_LIMIT:
            return tuple(start)
        ordered = sorted(start, key=lambda g: (total_degree(g), len(g)))
        kept: List[Polynomial] = []
        for g in ordered:
            if not kept or not membership(g, Ideal(self.ring, kept)):
                kept.append(g)
        return tuple(kept)

    def key(self) -> Tuple:
        return tuple(_poly_key(g, self.ring.p) for g in self.gb)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Ideal):
            return NotImplemented
        return self.ring == other.ring and self.key() == other.key()

    def __hash__(self) -> int:
        return hash((self.ring, self.key()))

    def __repr__(self) -> str:
        return f"Ideal({', '.join(format_polynomial(g) for g in self.gens) or '0'})"

    def __add__(self, other: "Ideal") -> "Ideal":
        return ideal_sum(self, other)

    def __mul__(self, other: "Ideal") -> "Ideal":
        return ideal_product(self, other)

    def power(self, k: int) -> "Ideal":
        return ideal_power(self, k)

    def bracket(self, e: int) -> "Ideal":
        return bracket_power(self, e)

    def contains(self, f: Polynomial) -> bool:
        return membership(f, self)

    def __le__(self, other: "Ideal") -> bool:
        return containment(self, other)


def _poly_key(g: Polynomial, p: int) -> Tuple:
    return tuple(sorted((m, coeff_int(c, p)) for m, c in g.items()))


def _same_ring(*ideals: Ideal) -> PolyRing:
    ring = ideals[0].ring
    for other in ideals[1:]:
        if other.ring != ring:
            raise RingMismatchError(f"{ring.describe()} vs {other.ring.describe()}")
    return ring


def max_ideal(ring: PolyRing) -> Ideal:
    return Ideal(ring, ring.gens)


def max_ideal_power(ring: PolyRing, k: int) -> Ideal:
    if k <= 0:
        return Ideal.unit(ring)
    return Ideal(ring, [ring.monomial(m) for m in monomials_of_degree(ring.ngens, k)])


def power_of_max_exponent(a: Ideal) -> Optional[int]:
    """k when a = m^k (k = 0 for the unit ideal), else None."""
    if a.is_zero or not a.is_monomial:
        return None
    lms = a.leading_monomials
    degrees = {sum(m) for m in lms}
    if len(degrees) != 1:
        return None
    d = degrees.pop()
    if len(lms) == comb(d + a.ring.ngens - 1, a.ring.ngens - 1):
        return d
    return None


# ---------------------------------------------------------------------------
# ideal_arith

def ideal_sum(a: Ideal, b: Ideal) -> Ideal:
    ring = _same_ring(a, b)
    return Ideal(ring, a.gens + b.gens)


def ideal_product(a: Ideal, b: Ideal) -> Ideal:
    ring = _same_ring(a, b)
    if a.is_zero or b.is_zero:
        return Ideal.zero(ring)
    if a.is_unit:
        return b
    if b.is_unit:
        return a
    ga, gb_ = a.mingens, b.mingens
    if a.is_monomial and b.is_monomial:
        monoms = [tuple(x + y for x, y in zip(f.LM, g.LM)) for f in ga for g in gb_]
        return Ideal.from_monomials(ring, monoms)
    prod = Ideal(ring, [f * g for f in ga for g in gb_])
    if len(prod.gens) > 8:
        return prod.minimized()
    return prod


def ideal_power(a: Ideal, k: int) -> Ideal:
    if k < 0:
        raise PreconditionError(f"ideal power needs k >= 0, got {k}")
    ring = a.ring
    if k == 0:
        return Ideal.unit(ring)
    if k == 1:
        return a
    if a.is_zero:
        return a
    cached = a._powers.get(k)
    if cached is not None:
        return cached
    d = power_of_max_exponent(a)
    if d is not None:
        result = max_ideal_power(ring, d * k)
    elif len(a.mingens) == 1:
        result = Ideal(ring, [a.mingens[0] ** k])
    else:
        result = Ideal.unit(ring)
        base = Ideal(ring, a.mingens)
        n = k
        while n:
            if n & 1:
                result = ideal_product(result, base)
            n >>= 1
            if n:
                base = ideal_product(base, base)
    with a._lock:
        a._powers.setdefault(k, result)
    return result


def frobenius_power(g: Polynomial, e: int, p: int) -> Polynomial:
    """g^(p^e), term-wise: (sum c x^m)^q = sum c x^(qm) over F_p."""
    q = p ** e
    return g.ring.from_dict({tuple(q * x for x in m): c for m, c in g.items()})


def bracket_power(a: Ideal, e: int) -> Ideal:
    if e < 0:
        raise PreconditionError(f"bracket power needs e >= 0, got {e}")
    if e == 0:
        return a
    ring = a.ring
    return Ideal(ring, [frobenius_power(g, e, ring.p) for g in a.mingens])


def ideal_arith(a: Ideal, b: Optional[Ideal] = None, op: str = "sum", k: int = 0, e: int = 0) -> Ideal:
    """
    Generator-level ideal arithmetic.

    Args:
        a: Left operand
        b: Right operand (sum/product only)
        op: One of "sum", "product", "power", "bracket_power"
        k: Exponent for "power"
        e: Frobenius exponent for "bracket_power"

    Returns:
        The resulting ideal
    """
    if op == "sum":
        return ideal_sum(a, b)
    if op == "product":
        return ideal_product(a, b)
    if op == "power":
        return ideal_power(a, k)
    if op == "bracket_power":
        return bracket_power(a, e)
    raise PreconditionError(f"unknown ideal operation {op!r}")


# ---------------------------------------------------------------------------
# membership / containment

def membership(f: Polynomial, a: Ideal) -> bool:
    f = a.ring.coerce(f)
    if not f:
        return True
    if a.is_zero:
        return False
    basis = a.gb
    if len(basis) == 1 and not any(basis[0].LM):
        return True
    if a.is_monomial:
        lms = [g.LM for g in basis]
        return all(any(monomial_divides(lm, m) for lm in lms) for m in f.keys())
    return not f.rem(list(basis))


def containment(a: Ideal, b: Ideal) -> bool:
    _same_ring(a, b)
    if a.is_zero:
        return True
    if b.is_zero:
        return False
    return all(membership(g, b) for g in a.gens)


def intersection(a: Ideal, b: Ideal) -> Ideal:
    """a ∩ b by eliminating an auxiliary variable: (t·a + (1-t)·b) ∩ R."""
    ring = _same_ring(a, b)
    if a.is_zero or b.is_zero:
        return Ideal.zero(ring)
    if a.is_unit:
        return b
    if b.is_unit:
        return a
    if a.is_monomial and b.is_monomial:
        lcms = [tuple(max(x, y) for x, y in zip(f.LM, g.LM)) for f in a.gb for g in b.gb]
        return Ideal.from_monomials(ring, lcms)
    elim = _build_sympy_ring(ring.p, (_ELIM_VAR,) + ring.vars, "lex")
    lifted = []
    for g in a.mingens:
        lifted.append(elim.from_dict({(1,) + m: c for m, c in g.items()}))
    for g in b.mingens:
        terms = {}
        for m, c in g.items():
            terms[(0,) + m] = c
            terms[(1,) + m] = -c
        lifted.append(elim.from_dict(terms))
    basis = groebner(lifted, elim)
    kept = []
    for h in basis:
        if all(m[0] == 0 for m in h.keys()):
            kept.append(ring.sympy.from_dict({m[1:]: c for m, c in h.items()}))
    return Ideal(ring, kept)


# ---------------------------------------------------------------------------
# local invariants

@dataclass(frozen=True)
class LocalInvariants:
    colength: Optional[int]
    mu_upper: Optional[int]
    mu_exact: bool
    emb: int
    ell_I: Optional[int]

    def to_report(self) -> Dict[str, object]:
        return {
            "colength": self.colength,
            "mu_upper": self.mu_upper,
            "mu_mode": "exact" if self.mu_exact else "upper-bound",
            "emb": self.emb,
            "ell_I": self.ell_I,
        }


def is_m_primary(I: Ideal) -> bool:
    if I.is_zero:
        return False
    if I.is_unit:
        return False
    return _m_primary_bounds(I) is not None


def _m_primary_bounds(I: Ideal) -> Optional[List[int]]:
    n = I.ring.ngens
    bounds: List[Optional[int]] = [None] * n
    for lm in I.leading_monomials:
        support = [i for i, x in enumerate(lm) if x]
        if len(support) == 1:
            i = support[0]
            if bounds[i] is None or lm[i] < bounds[i]:
                bounds[i] = lm[i]
    if any(b is None for b in bounds):
        return None
    dim = _count_standard(I.leading_monomials, bounds)
    ring = I.ring
    for i in range(n):
        exps = [0] * n
        exps[i] = dim
        if not membership(ring.monomial(exps), I):
            return None
    return bounds


def _count_standard(lms: Sequence[Monomial], bounds: Sequence[int]) -> int:
    @lru_cache(maxsize=None)
    def count(gens: frozenset, depth: int) -> int:
        if any(not any(g) for g in gens):
            return 0
        if depth == len(bounds):
            return 1
        total = 0
        for x in range(bounds[depth]):
            projected = frozenset(g[1:] for g in gens if g[0] <= x)
            total += count(projected, depth + 1)
        return total

    return count(frozenset(tuple(m) for m in lms), 0)


def colength(I: Ideal) -> int:
    """dim_F R/I for an m-primary ideal (0 for the unit ideal)."""
    if I.is_unit:
        return 0
    d = power_of_max_exponent(I)
    if d is not None:
        return comb(d + I.ring.ngens - 1, I.ring.ngens)
    bounds = _m_primary_bounds(I) if not I.is_zero else None
    if bounds is None:
        raise InfiniteColengthError(f"{I!r} is not m-primary")
    return _count_standard(I.leading_monomials, bounds)


def mu_upper(a: Ideal) -> Tuple[int, bool]:
    """(mu, exact): exact minimal generator count when homogeneous, else an upper bound."""
    if a.is_zero:
        return 0, True
    gens = a.mingens
    # larger generating sets are returned unpruned
    exact = a.is_monomial or len(gens) == 1 or (a.is_homogeneous and len(gens) <= _PRUNE_LIMIT)
    return len(gens), exact


def embedding_dimension(ring: PolyRing) -> int:
    return ring.ngens


def ell(I: Ideal) -> int:
    """min{m >= 0 : m^m ⊆ I}."""
    if I.is_unit:
        return 0
    bounds = _m_primary_bounds(I) if not I.is_zero else None
    if bounds is None:
        raise InfiniteColengthError(f"{I!r} is not m-primary")
    n = I.ring.ngens

    def holds(m: int) -> bool:
        return all(membership(I.ring.monomial(mon), I) for mon in monomials_of_degree(n, m))

    # m^{len(R/I)} ⊆ I always; the staircase bound is exact for monomial I
    guess = sum(b - 1 for b in bounds) + 1
    if holds(guess):
        lo, hi = 0, guess
    else:
        lo, hi = guess, colength(I)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return hi


def local_invariants(a: Optional[Ideal], I: Optional[Ideal]) -> LocalInvariants:
    """
    Colength and ell of I, mu of a, embedding dimension of the ring.

    Args:
        a: Ideal contained in m (or None to skip mu)
        I: m-primary ideal (or None to skip colength/ell)

    Returns:
        LocalInvariants record
    """
    ring = (a or I).ring
    mu, exact = (None, True)
    if a is not None:
        if not containment(a, max_ideal(ring)):
            raise PreconditionError("local invariants need a ⊆ m")
        mu, exact = mu_upper(a)
    length = ell_I = None
    if I is not None:
        length = colength(I)
        ell_I = ell(I)
    return LocalInvariants(length, mu, exact, embedding_dimension(ring), ell_I)


def quotient_length(J: Ideal, K: Ideal, settings: Optional[Settings] = None) -> int:
    """len(J/K) for K ⊆ J with J/K of finite length."""
    ring = _same_ring(J, K)
    if not containment(K, J):
        raise PreconditionError("quotient_length needs K ⊆ J")
    if J.is_unit or is_m_primary(J):
        return colength(K) - colength(J)
    cfg = resolve(settings)
    for N in range(1, cfg.max_chain + 1):
        mN = max_ideal_power(ring, N)
        if containment(intersection(J, mN), K):
            return colength(ideal_sum(K, mN)) - colength(ideal_sum(J, mN))
    raise ComputationLimitError(f"J/K not of finite length within m^{cfg.max_chain}", "max_chain")


def power_of_max_quotient_length(tau: Ideal, K: int, settings: Optional[Settings] = None) -> int:
    """len(tau / m^K tau)."""
    n = tau.ring.ngens
    if tau.is_zero or K <= 0:
        return 0
    if tau.is_unit or len(tau.mingens) == 1:
        return comb(K + n - 1, n)
    cfg = resolve(settings)
    if comb(K + n - 1, n - 1) > cfg.expand_cap:
        raise ComputationLimitError(f"m^{K} too large to materialise", "expand_cap")
    return quotient_length(tau, ideal_product(max_ideal_power(tau.ring, K), tau), cfg)


def contained_mod_max_power(
    small: Ideal,
    big: Ideal,
    M: int,
    factor: Optional[Ideal] = None,
    settings: Optional[Settings] = None,
) -> Optional[bool]:
    """
    small ⊆ big + m^M·factor, or None when no exact method applies.

    factor defaults to the unit ideal.
    """
    ring = _same_ring(small, big)
    if containment(small, big):
        return True
    cfg = resolve(settings)
    n = ring.ngens
    if factor is None or factor.is_unit:
        if M <= 0:
            return True
        if is_m_primary(big) and ell(big) <= M:
            return False
        if big.is_homogeneous:
            for g in small.gens:
                for d, part in homogeneous_components(g).items():
                    if d < M and not membership(part, big):
                        return False
            return True
        if comb(M + n - 1, n - 1) <= cfg.expand_cap:
            return containment(small, ideal_sum(big, max_ideal_power(ring, M)))
        return None
    if factor.is_zero or (is_m_primary(big) and ell(big) <= M):
        return False
    if comb(M + n - 1, n - 1) * max(1, len(factor.mingens)) <= cfg.expand_cap:
        extra = ideal_product(max_ideal_power(ring, M), factor)
        return containment(small, Ideal(ring, big.gens + extra.gens))
    return None


# ---------------------------------------------------------------------------
# text syntax

def split_top_level(text: str) -> List[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    tail = "".join(cur).strip()
    if tail:
        parts.append(tail)
    return [p for p in parts if p]


def parse_polynomial(text: str, ring: PolyRing) -> Polynomial:
    """Parse integer-coefficient text such as ``x^2*y + 3y^3`` modulo p."""
    symbols = {name: Symbol(name) for name in ring.vars}
    try:
        expr = parse_expr(text, local_dict=dict(symbols), transformations=_PARSE_TRANSFORMS)
    except Exception as exc:
        raise SpecValidationError(f"cannot parse polynomial {text!r}: {exc}") from exc
    unknown = {str(s) for s in expr.free_symbols} - set(ring.vars)
    if unknown:
        raise SpecValidationError(f"polynomial {text!r} uses unknown variables {sorted(unknown)}")
    try:
        poly = Poly(expr, *[symbols[v] for v in ring.vars])
    except Exception as exc:
        raise SpecValidationError(f"{text!r} is not a polynomial: {exc}") from exc
    terms: Dict[Monomial, int] = {}
    for monom, coeff in poly.as_dict().items():
        if not coeff.is_Rational:
            raise SpecValidationError(f"coefficient {coeff} of {text!r} is not rational")
        num, den = int(coeff.p), int(coeff.q)
        if den % ring.p == 0:
            raise SpecValidationError(f"coefficient {coeff} of {text!r} is not defined mod {ring.p}")
        terms[tuple(monom)] = (num * pow(den, -1, ring.p)) % ring.p
    return ring.from_terms(terms)


def parse_ideal(spec, ring: PolyRing) -> Ideal:
    """Accepts "(x, y^2)", "x, y^2" or a list of generator strings."""
    if isinstance(spec, str):
        text = spec.strip()
        if text.startswith("(") and text.endswith(")") and len(split_top_level(text)) == 1:
            inner = text[1:-1]
            if split_top_level(inner) and len(split_top_level(inner)) > 1:
                text = inner
        items = split_top_level(text)
    else:
        items = list(spec)
    return Ideal(ring, [parse_polynomial(s, ring) for s in items])


def _format_monomial(m: Monomial, names: Sequence[str]) -> str:
    pieces = []
    for name, x in zip(names, m):
        if x == 1:
            pieces.append(name)
        elif x > 1:
            pieces.append(f"{name}^{x}")
    return "*".join(pieces)


def format_polynomial(g: Polynomial) -> str:
    """Canonical text: coefficients in 0..p-1, terms in descending degrevlex order."""
    if not g:
        return "0"
    ring = g.ring
    p = int(ring.domain.mod)
    names = [str(s) for s in ring.symbols]
    out = []
    for m, c in g.terms():
        c = coeff_int(c, p)
        mono = _format_monomial(m, names)
        if not mono:
            out.append(str(c))
        elif c == 1:
            out.append(mono)
        else:
            out.append(f"{c}*{mono}")
    return " + ".join(out)


def format_ideal(I: Ideal) -> List[str]:
    return [format_polynomial(g) for g in I.gb]
