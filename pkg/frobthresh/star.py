"""
Condition (star) Verification
Finite-range checks of the controlled-descent inequality for truncated
thresholds, the hypotheses that imply it, perturbation rigidity, the
stabilization bound for perturbed ideals, and empirical ACC sweeps over
enumerated ideal families.

Every statement here is verified on an explicit range of n only.
"""

from __future__ import annotations

import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Dict, List, Optional, Sequence, Tuple

from .config import Settings, resolve
from .errors import FrobThreshError, PreconditionError
from .families import FamilyMember, parse_family
from .frobenius import PairDivisor
from .polycore import (
    Ideal,
    contained_mod_max_power,
    ell,
    embedding_dimension,
    ideal_sum,
    is_m_primary,
    max_ideal,
    mu_upper,
    power_of_max_quotient_length,
)
from .qadic import admissible_form, approx, as_rational, digits_eventually_constant, format_rational, truncation
from .testideal import (
    MixedExponent,
    Perturbation,
    tau_mixed_nu,
    tau_mixed_nu_contained,
    tau_pair,
    test_ideal,
    ustab_bounded,
)
from .thresholds import ThresholdQuery, ThresholdResult, fjn, fjn_truncated, subadditivity_verdict

logger = logging.getLogger(__name__)

PASS, FAIL, UNDETERMINED = "pass", "fail", "undetermined"


@dataclass(frozen=True)
class StarConfig:
    d: PairDivisor
    a: Ideal
    t: Fraction
    I: Ideal
    u: int
    N: int
    n_range: Tuple[int, int] = (0, 8)
    M: Optional[int] = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "t", as_rational(self.t))
        if self.t <= 0:
            raise PreconditionError(f"t must be positive, got {format_rational(self.t)}")
        if self.u < 0 or self.N < 0:
            raise PreconditionError("u and N must be >= 0")
        if self.n_range[0] < 0 or self.n_range[0] > self.n_range[1]:
            raise PreconditionError(f"bad n range {self.n_range}")
        if not is_m_primary(self.I):
            raise PreconditionError("I must be m-primary")

    @property
    def q(self) -> int:
        return self.d.q

    def with_(self, **changes) -> "StarConfig":
        values = dict(d=self.d, a=self.a, t=self.t, I=self.I, u=self.u, N=self.N,
                      n_range=self.n_range, M=self.M, label=self.label)
        values.update(changes)
        return StarConfig(**values)


@dataclass
class StarRow:
    n: int
    value: Fraction
    next_value: Fraction
    margin: Fraction

    @property
    def passes(self) -> bool:
        return self.margin >= 0

    def to_report(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "fjn_n": format_rational(self.value),
            "fjn_n_plus_1": format_rational(self.next_value),
            "margin": format_rational(self.margin),
            "passes": self.passes,
        }


@dataclass
class StarReport:
    label: str
    verdict: str
    rows: List[StarRow] = field(default_factory=list)
    hypotheses: Dict[str, Dict[str, object]] = field(default_factory=dict)
    constants: Dict[str, object] = field(default_factory=dict)
    first_violation: Optional[int] = None
    unverified: bool = False
    extra: Dict[str, object] = field(default_factory=dict)

    def to_report(self) -> Dict[str, object]:
        return {
            "label": self.label,
            "verdict": self.verdict,
            "rows": [r.to_report() for r in self.rows],
            "hypotheses": self.hypotheses,
            "constants": self.constants,
            "first_violation": self.first_violation,
            "unverified": self.unverified,
            **self.extra,
        }


def _hyp(status: str, detail: str) -> Dict[str, object]:
    return {"status": status, "detail": detail}


def truncated_values(c: StarConfig, lo: int, hi: int, settings: Optional[Settings] = None) -> Dict[int, Fraction]:
    """fjn^{n,u}(a^t; m) for lo <= n <= hi."""
    m = max_ideal(c.d.ring)
    return {n: fjn_truncated(c.d, c.a, c.t, m, c.I, n, c.u, settings) for n in range(lo, hi + 1)}


def check_condition_star(c: StarConfig, settings: Optional[Settings] = None) -> StarReport:
    """
    fjn^{n+1,u}(a^t; m) >= fjn^{n,u}(a^t; m) - N/q^n for n in the range.

    Margins are exact; the verdict never extends beyond the range.
    """
    lo, hi = c.n_range
    values = truncated_values(c, lo, hi + 1, settings)
    rows = []
    first = None
    for n in range(lo, hi + 1):
        margin = values[n + 1] - values[n] + Fraction(c.N, c.q ** n)
        row = StarRow(n, values[n], values[n + 1], margin)
        rows.append(row)
        if first is None and not row.passes:
            first = n
    verdict = "holds-on-range" if first is None else "violated"
    logger.info("condition (star) %s on [%d, %d]%s", verdict, lo, hi,
                "" if first is None else f", first failure n={first}")
    return StarReport(c.label, verdict, rows, constants={"N": c.N, "q": c.q, "u": c.u},
                      first_violation=first)


def b_to_a_constants(q: int, n0: int, emb: int) -> Dict[str, object]:
    return {
        "N": q ** (n0 + 3) * emb,
        "t0": Fraction(q * q, q - 1),
        "M0": (q ** (n0 + 6) - 1) * emb // (q - 1),
    }


def b_to_a_hypotheses(c: StarConfig, n0: int, settings: Optional[Settings] = None) -> Tuple[Dict[str, Dict[str, object]], Dict[str, object]]:
    """Hypothesis checklist and derived constants for the sufficient condition."""
    q = c.q
    ring = c.d.ring
    emb = embedding_dimension(ring)
    mu, mu_exact = mu_upper(c.a)
    ell_I = ell(c.I)
    consts = b_to_a_constants(q, n0, emb)
    hyps: Dict[str, Dict[str, object]] = {}
    hyps["u_at_least_2"] = _hyp(PASS if c.u >= 2 else FAIL, f"u = {c.u}")
    hyps["1_q_exceeds_mu"] = _hyp(PASS if q > mu else FAIL,
                                  f"q = {q}, mu = {mu} ({'exact' if mu_exact else 'upper bound'})")
    weak, strong = q > ell_I, q > mu + ell_I + emb
    hyps["2_q_exceeds_ell"] = _hyp(
        PASS if strong else FAIL,
        f"q > ell_I: {weak}; q > mu + ell_I + emb: {strong} (ell_I = {ell_I}, emb = {emb})",
    )
    const = digits_eventually_constant(c.t, q)
    if const is None or const[1] > 2 or not 0 < const[0] < q:
        hyps["3_constant_digits"] = _hyp(FAIL, f"digits of t in base {q}: {const}")
        return hyps, consts
    l = const[0]
    consts["l"] = l
    hyps["3_constant_digits"] = _hyp(PASS, f"t^(n) = {l} for n >= {const[1]}")
    exponent = MixedExponent.single(c.a, l * consts["t0"])
    small = tau_mixed_nu(c.d, exponent, n0, c.u, settings=settings)
    big = tau_mixed_nu(c.d, exponent, n0 + 1, c.u, settings=settings)
    verdict = contained_mod_max_power(small, big, consts["M0"], tau_pair(c.d, settings), settings)
    status = {True: PASS, False: FAIL, None: UNDETERMINED}[verdict]
    hyps["4_coset_containment"] = _hyp(status, f"M0 = {consts['M0']}, n0 = {n0}")
    return hyps, consts


def verify_B_to_A(c: StarConfig, n0: int, settings: Optional[Settings] = None) -> StarReport:
    """
    Check the four sufficient hypotheses, then (star) with N = q^{n0+3} emb.

    A hypothesis failure yields "hypothesis-failed" without a verdict on
    (star). A (star) failure under passing hypotheses is a conclusion failure.
    """
    hyps, consts = b_to_a_hypotheses(c, n0, settings)
    statuses = [h["status"] for h in hyps.values()]
    if FAIL in statuses:
        return StarReport(c.label, "hypothesis-failed", hypotheses=hyps, constants=_consts_report(consts))
    star = check_condition_star(c.with_(N=consts["N"]), settings)
    star.hypotheses = hyps
    star.constants.update(_consts_report(consts))
    if star.verdict == "violated":
        if UNDETERMINED in statuses:
            star.verdict = "violated-hypotheses-undetermined"
        else:
            star.verdict = "conclusion-failed"
            logger.error("condition (star) failed under verified hypotheses at n=%s (%s)",
                         star.first_violation, c.label or "unlabelled")
    elif UNDETERMINED in statuses:
        star.unverified = True
    return star


def _consts_report(consts: Dict[str, object]) -> Dict[str, object]:
    return {k: format_rational(v) if isinstance(v, Fraction) else v for k, v in consts.items()}


def condA_single_witness(
    d: PairDivisor,
    a: Ideal,
    t,
    I: Ideal,
    e_cap: int = 4,
    n0_cap: int = 8,
    u_cap: int = 64,
    n_range: Tuple[int, int] = (0, 8),
    settings: Optional[Settings] = None,
) -> StarReport:
    """
    Search multiples e' of e for a witness (e', u0, N) of (star).

    For the first e' meeting the q-hypotheses: l = t^(2), n0 is the first
    index where tau at consecutive truncations of l*t0 agree, u0 = max(2, ustab)
    and N = q^{n0+3} emb. N' = N + 1 bounds the untruncated descent.
    """
    cfg = resolve(settings)
    t = as_rational(t)
    emb = embedding_dimension(d.ring)
    mu = mu_upper(a)[0]
    ell_I = ell(I)
    for k in range(1, e_cap + 1):
        big = d.enlarge(k)
        q = big.q
        const = digits_eventually_constant(t, q)
        if q <= mu or q <= ell_I or const is None or const[1] > 2 or not 0 < const[0] < q:
            continue
        l = const[0]
        t0 = Fraction(q * q, q - 1)
        n0 = None
        for j in range(n0_cap + 1):
            left, _ = test_ideal(big, MixedExponent.single(a, truncation(l * t0, q, j)), cfg)
            right, _ = test_ideal(big, MixedExponent.single(a, truncation(l * t0, q, j + 1)), cfg)
            if left == right:
                n0 = j
                break
        if n0 is None:
            continue
        ustab = ustab_bounded(big, [a], u_cap, cfg)
        u0 = max(2, ustab.value)
        N = q ** (n0 + 3) * emb
        report = check_condition_star(StarConfig(big, a, t, I, u0, N, n_range, label=f"e'={big.e}"), cfg)
        report.extra["witness"] = {
            "e": big.e, "u0": u0, "N": N, "N_prime": N + 1, "n0": n0,
            "ustab_certified": ustab.certified,
        }
        report.unverified = report.unverified or not ustab.certified
        return report
    return StarReport("", "no-witness", extra={"witness": None, "e_cap": e_cap})


def perturbation_equivalence(c: StarConfig, settings: Optional[Settings] = None) -> StarReport:
    """
    fjn^{n,u}(a^t; m) == fjn^{n,u}(b^t; m) for b = a + m^M, M = q^{u+2} N
    unless the config overrides M, together with the matching ⊆ I predicates.
    """
    q = c.q
    emb = embedding_dimension(c.d.ring)
    mu = mu_upper(c.a)[0]
    ell_I = ell(c.I)
    M = c.M if c.M is not None else q ** (c.u + 2) * c.N
    b = Perturbation(c.a, M)
    m = max_ideal(c.d.ring)
    lo, hi = max(1, c.n_range[0]), c.n_range[1]
    rows = []
    mismatches = []
    for n in range(lo, hi + 1):
        va = fjn_truncated(c.d, c.a, c.t, m, c.I, n, c.u, settings)
        vb = fjn_truncated(c.d, b, c.t, m, c.I, n, c.u, settings)
        pa = tau_mixed_nu_contained(c.d, [(c.a, c.t)], n, c.u, c.I, settings=settings)
        pb = tau_mixed_nu_contained(c.d, [(b, c.t)], n, c.u, c.I, settings=settings)
        rows.append({
            "n": n,
            "fjn_a": format_rational(va),
            "fjn_b": format_rational(vb),
            "contained_a": pa,
            "contained_b": pb,
            "equal": va == vb and pa == pb,
        })
        if va != vb or pa != pb:
            mismatches.append(n)
    hyps = {"extra_q_bound": _hyp(PASS if q > ell_I + mu + emb else FAIL,
                                  f"q = {q} vs ell_I + mu + emb = {ell_I + mu + emb}")}
    verdict = "equal-on-range" if not mismatches else "differs"
    return StarReport(c.label, verdict, hypotheses=hyps, constants={"M": M, "q": q, "u": c.u, "N": c.N},
                      first_violation=mismatches[0] if mismatches else None,
                      extra={"comparisons": rows})


def key_equivalence(c: StarConfig, n0: int, settings: Optional[Settings] = None) -> StarReport:
    """
    Compare tau^{n,u}(a^t) ⊆ I with tau^{n,u}(b^t) ⊆ I for
    b = a + m^{q^{u+n0+5} emb}; report where the predicate settles.
    """
    q = c.q
    emb = embedding_dimension(c.d.ring)
    M = q ** (c.u + n0 + 5) * emb
    b = Perturbation(c.a, M)
    lo, hi = c.n_range
    rows = []
    preds = []
    for n in range(lo, hi + 1):
        pa = tau_mixed_nu_contained(c.d, [(c.a, c.t)], n, c.u, c.I, settings=settings)
        pb = tau_mixed_nu_contained(c.d, [(b, c.t)], n, c.u, c.I, settings=settings)
        rows.append({"n": n, "contained_a": pa, "contained_b": pb, "equal": pa == pb})
        preds.append(pa)
    settle = _settle_index(preds, lo)
    mismatch = next((r["n"] for r in rows if not r["equal"]), None)
    verdict = "equivalent-on-range" if mismatch is None else "differs"
    return StarReport(c.label, verdict, constants={"M": M, "n0": n0, "u": c.u},
                      first_violation=mismatch,
                      extra={"comparisons": rows, "empirical_n1": settle})


def _settle_index(values: Sequence, start: int) -> int:
    """Least index after which the sequence is constant (within the observed range)."""
    idx = len(values) - 1
    while idx > 0 and values[idx - 1] == values[-1]:
        idx -= 1
    return start + idx


def _normalized_shift(t: Fraction, q: int, mu: int, emb: int, cap: int = 64) -> Optional[int]:
    for k in range(cap + 1):
        s = t * q ** k
        if s > mu + emb and (s * (q - 1)).denominator == 1:
            return k
    return None


def stabilization_experiment(c: StarConfig, settings: Optional[Settings] = None) -> StarReport:
    """
    Empirical stabilization of n -> [tau^{n,u}(b^t) ⊆ I] for b = a + m^M
    against the colength bound len(tau / m^{M ceil(t)} tau).

    When t is not already in the proposition's normal form, the bound is
    also reported for t' = q^k t plus k, and that one decides the verdict.
    """
    if c.M is None or c.M < 1:
        raise PreconditionError("stabilization_experiment needs a perturbation order M >= 1")
    cfg = resolve(settings)
    q = c.q
    emb = embedding_dimension(c.d.ring)
    mu = mu_upper(c.a)[0]
    tau0 = tau_pair(c.d, cfg)
    raw = power_of_max_quotient_length(tau0, c.M * ceil(c.t), cfg)
    hyps = {
        "q_exceeds_mu_plus_emb": _hyp(PASS if q > mu + emb else FAIL, f"q = {q}, mu + emb = {mu + emb}"),
        "u_at_least_2": _hyp(PASS if c.u >= 2 else FAIL, f"u = {c.u}"),
    }
    shift = _normalized_shift(c.t, q, mu, emb)
    hyps["admissible_t"] = _hyp(PASS if shift is not None else FAIL, f"shift k = {shift}")
    normalized = None
    if shift:
        normalized = power_of_max_quotient_length(tau0, c.M * ceil(c.t * q ** shift), cfg) + shift
    bound = normalized if normalized is not None else raw
    b = Perturbation(c.a, c.M)
    lo, hi = max(1, c.n_range[0]), c.n_range[1]
    preds = [tau_mixed_nu_contained(c.d, [(b, c.t)], n, c.u, c.I, settings=cfg) for n in range(lo, hi + 1)]
    chain_index = None
    b_ideal = b.materialize(cfg.expand_cap)
    if b_ideal is not None:
        chain = [tau_mixed_nu(c.d, MixedExponent.single(b_ideal, c.t), n, c.u, settings=cfg)
                 for n in range(lo, hi + 1)]
        chain_index = _settle_index(chain, lo)
    empirical = _settle_index(preds, lo)
    within = empirical <= bound
    verdict = "within-bound" if within else "exceeds-bound"
    if not within and all(h["status"] == PASS for h in hyps.values()):
        logger.error("empirical stabilization %d exceeds bound %d (%s)", empirical, bound, c.label)
    return StarReport(
        c.label, verdict, hypotheses=hyps,
        constants={"M": c.M, "raw_bound": raw, "normalized_bound": normalized, "u": c.u},
        extra={
            "empirical_n1": empirical,
            "bound_n1": bound,
            "chain_stable_index": chain_index,
            "predicates": [{"n": lo + i, "contained": p} for i, p in enumerate(preds)],
        },
    )


# ---------------------------------------------------------------------------
# ACC sweeps

@dataclass
class MemberOutcome:
    member: FamilyMember
    result: Optional[ThresholdResult] = None
    error: Optional[str] = None

    def to_report(self) -> Dict[str, object]:
        out: Dict[str, object] = {"index": self.member.index, "label": self.member.label}
        if self.result is not None:
            out["fjn"] = self.result.to_report()
        else:
            out["error"] = self.error
        return out


def _run_member(member: FamilyMember, d: PairDivisor, I: Ideal, g_max: int, cfg: Settings) -> MemberOutcome:
    try:
        return MemberOutcome(member, fjn(ThresholdQuery(d, member.ideal, I, g_max=g_max), cfg))
    except FrobThreshError as exc:
        logger.warning("member %d (%s) failed: %s", member.index, member.label, exc)
        return MemberOutcome(member, error=f"{type(exc).__name__}: {exc}")
    except Exception as exc:
        logger.exception("member %d (%s) raised unexpectedly", member.index, member.label)
        return MemberOutcome(member, error=f"{type(exc).__name__}: {exc}")


def _cluster_anomalies(values: Sequence[Fraction], resolution: Fraction) -> List[str]:
    """Values approached from below by two or more distinct family values within resolution."""
    distinct = sorted(set(values))
    flagged = []
    for v in distinct:
        below = [w for w in distinct if v - resolution < w < v]
        if len(below) >= 2:
            flagged.append(format_rational(v))
    return flagged


def acc_probe(
    family: str,
    d: PairDivisor,
    I: Optional[Ideal] = None,
    cap: Optional[int] = None,
    g_max: int = 6,
    pairs: int = 8,
    seed: int = 0,
    settings: Optional[Settings] = None,
) -> Dict[str, object]:
    """
    Thresholds of every family member, with certification, clustering and
    sampled subadditivity checks. Members run on a pool of
    ``settings.threads`` workers; results are ordered by family index and a
    failing member never stops the run.
    """
    cfg = resolve(settings)
    ring = d.ring
    I = I if I is not None else max_ideal(ring)
    members = parse_family(family, ring)
    if cap is not None:
        members = members[:cap]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        outcomes = list(pool.map(lambda mem: _run_member(mem, d, I, g_max, cfg), members))
    resolved = [o for o in outcomes if o.result is not None and o.result.resolved]
    values = [o.result.value for o in resolved]
    forms = {}
    for o in resolved:
        v = o.result.value
        forms[o.member.index] = list(admissible_form(v, ring.p)) if v > 0 else [0, 0]
    resolution = Fraction(1, ring.p ** g_max)
    anomalies = _cluster_anomalies(values, resolution)

    rng = random.Random(seed)
    index_pairs = [(i, j) for i in range(len(resolved)) for j in range(i + 1, len(resolved))]
    rng.shuffle(index_pairs)
    sub_rows = []
    for i, j in index_pairs[:pairs]:
        oa, ob = resolved[i], resolved[j]
        try:
            lhs = fjn(ThresholdQuery(d, ideal_sum(oa.member.ideal, ob.member.ideal), I, g_max=g_max), cfg)
            verdict = subadditivity_verdict(lhs, oa.result, ob.result)
        except FrobThreshError as exc:
            logger.warning("subadditivity sample (%d, %d) failed: %s", i, j, exc)
            verdict = "error"
        except Exception:
            logger.exception("subadditivity sample (%d, %d) raised unexpectedly", i, j)
            verdict = "error"
        sub_rows.append({"pair": [oa.member.index, ob.member.index], "verdict": verdict})
    return {
        "family": family,
        "members": [o.to_report() for o in outcomes],
        "thresholds": [format_rational(o.result.value) if o.result is not None and o.result.resolved else None
                       for o in outcomes],
        "approx": [approx(o.result.value) if o.result is not None and o.result.resolved else None
                   for o in outcomes],
        "certified": all(o.result.certified for o in resolved),
        "admissible_forms": {str(k): v for k, v in sorted(forms.items())},
        "ascending_chain_anomalies": anomalies,
        "subadditivity": sub_rows,
        "failures": sum(1 for o in outcomes if o.error is not None),
        "unresolved": sum(1 for o in outcomes if o.result is not None and not o.result.resolved),
    }
