"""
Ideal family grammar for ACC sweeps.

    monomials(maxdeg=D)              principal (x^alpha), 1 <= |alpha| <= D
    powers(IDEAL, kmax)              IDEAL^k, 1 <= k <= kmax
    binomial-hypersurfaces(amax, bmax)  (x^a + y^b) on the first two variables
    explicit([g, ...], [h, ...])     one ideal per bracket group
"""

import itertools
import logging
import re
from dataclasses import dataclass
from typing import List

from .errors import SpecValidationError
from .polycore import (
    Ideal,
    PolyRing,
    format_polynomial,
    ideal_power,
    parse_ideal,
    split_top_level,
)

logger = logging.getLogger(__name__)

_CALL = re.compile(r"^\s*([A-Za-z][A-Za-z_-]*)\s*\((.*)\)\s*$", re.S)
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_KEYWORDS = {"monomials", "powers", "binomial", "hypersurfaces", "explicit", "maxdeg", "kmax", "amax", "bmax"}


@dataclass(frozen=True)
class FamilyMember:
    index: int
    label: str
    ideal: Ideal


def _int_arg(text: str, name: str) -> int:
    value = text.split("=", 1)[1] if "=" in text else text
    try:
        out = int(value.strip())
    except ValueError as exc:
        raise SpecValidationError(f"family argument {name} must be an integer, got {text!r}", [name]) from exc
    if out < 1:
        raise SpecValidationError(f"family argument {name} must be >= 1", [name])
    return out


def _split(text: str):
    match = _CALL.match(text)
    if not match:
        raise SpecValidationError(f"cannot parse family {text!r}", ["family"])
    return match.group(1).lower(), split_top_level(match.group(2))


def family_variables(text: str) -> List[str]:
    """Variable names mentioned in a family spec, in order of appearance."""
    seen: List[str] = []
    for name in _IDENT.findall(text):
        if name.lower() in _KEYWORDS or name in seen:
            continue
        seen.append(name)
    return seen


def parse_family(text: str, ring: PolyRing) -> List[FamilyMember]:
    kind, args = _split(text)
    members: List[FamilyMember] = []
    if kind == "monomials":
        if len(args) != 1:
            raise SpecValidationError("monomials(maxdeg=D) takes one argument", ["family"])
        maxdeg = _int_arg(args[0], "maxdeg")
        n = ring.ngens
        exps = sorted(
            (v for v in itertools.product(range(maxdeg + 1), repeat=n) if 1 <= sum(v) <= maxdeg),
            key=lambda v: (sum(v), tuple(-x for x in v)),
        )
        for v in exps:
            g = ring.monomial(v)
            members.append(FamilyMember(len(members), f"({format_polynomial(g)})", Ideal(ring, [g])))
    elif kind == "powers":
        if len(args) != 2:
            raise SpecValidationError("powers(ideal, kmax) takes two arguments", ["family"])
        base = parse_ideal(args[0], ring)
        kmax = _int_arg(args[1], "kmax")
        for k in range(1, kmax + 1):
            members.append(FamilyMember(len(members), f"{args[0]}^{k}", ideal_power(base, k)))
    elif kind == "binomial-hypersurfaces":
        if len(args) != 2:
            raise SpecValidationError("binomial-hypersurfaces(amax, bmax) takes two arguments", ["family"])
        if ring.ngens < 2:
            raise SpecValidationError("binomial-hypersurfaces needs two variables", ["vars"])
        amax, bmax = _int_arg(args[0], "amax"), _int_arg(args[1], "bmax")
        x, y = ring.gens[0], ring.gens[1]
        for a in range(1, amax + 1):
            for b in range(1, bmax + 1):
                g = x ** a + y ** b
                members.append(FamilyMember(len(members), f"({format_polynomial(g)})", Ideal(ring, [g])))
    elif kind == "explicit":
        for group in args:
            group = group.strip()
            if not (group.startswith("[") and group.endswith("]")):
                raise SpecValidationError(f"explicit groups are bracketed lists, got {group!r}", ["family"])
            gens = split_top_level(group[1:-1])
            members.append(FamilyMember(len(members), f"({', '.join(gens)})", parse_ideal(gens, ring)))
    else:
        raise SpecValidationError(f"unknown family kind {kind!r}", ["family"])
    logger.debug("family %s: %d members", kind, len(members))
    return members
