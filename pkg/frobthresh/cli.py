"""
Command-Line Interface
Parses a job (flags and/or a key=value job file) into a validated JobSpec,
runs one command and prints a deterministic JSON report.

Exit codes: 0 success, 2 unresolved or uncertified result, 1 input error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from sympy import isprime

from .config import Settings, configure_logging, resolve
from .errors import ComputationLimitError, FrobThreshError, SpecValidationError
from .families import family_variables
from .frobenius import PairDivisor
from .polycore import (
    Ideal,
    PolyRing,
    colength,
    format_ideal,
    is_m_primary,
    local_invariants,
    max_ideal,
    parse_ideal,
    parse_polynomial,
)
from .qadic import admissible_form, as_rational, digit_expansion, digits_eventually_constant, format_rational
from .star import (
    StarConfig,
    acc_probe,
    check_condition_star,
    condA_single_witness,
    key_equivalence,
    perturbation_equivalence,
    stabilization_experiment,
    verify_B_to_A,
)
from .testideal import MixedExponent, check_pair_compatibility, test_ideal
from .thresholds import ThresholdQuery, fjn, jumping_numbers

logger = logging.getLogger(__name__)

COMMANDS = (
    "fpt",
    "test-ideal",
    "jumping-numbers",
    "digits",
    "star-check",
    "b-to-a",
    "perturb-check",
    "stab-experiment",
    "acc-probe",
)

EXIT_OK, EXIT_INPUT, EXIT_UNRESOLVED = 0, 1, 2

# star verdicts that leave the question open
_STAR_OPEN = {"conclusion-failed", "violated-hypotheses-undetermined", "no-witness"}


def _rational_or_value_error(text: str):
    try:
        return as_rational(text)
    except FrobThreshError as exc:
        raise ValueError(str(exc)) from exc


class JobSpec(BaseModel):
    """One validated job; every command reads the fields it needs."""

    model_config = ConfigDict(extra="forbid")

    p: Optional[int] = Field(None, description="Characteristic of the prime field")
    vars: Optional[List[str]] = Field(None, description="Ring variables; inferred from inputs when omitted")
    e: int = Field(1, description="Frobenius exponent of the pair divisor")
    divisor: Optional[str] = Field(None, description='Pair divisor as "f,a": Delta = a/(p^e-1) div(f)')
    ideal: List[str] = Field(default_factory=list, description="Ideal generators, one entry per ideal")
    I: Optional[str] = Field(None, description="Target m-primary ideal (default m)")
    t: List[str] = Field(default_factory=list, description="Exponents as rationals, one per ideal")
    q: Optional[int] = Field(None, description="Digit base for the digits command (default p^e)")
    n: Tuple[int, int] = Field((0, 8), description='Index range "lo..hi"')
    u: int = Field(2, description="Frobenius padding u of truncated test ideals")
    N: Optional[int] = Field(None, description="Descent constant N of condition (star)")
    M: Optional[int] = Field(None, description="Perturbation order of b = a + m^M")
    n0: Optional[int] = Field(None, description="Stabilization index n0 of the sufficient hypotheses")
    lo: Optional[str] = Field(None, description="Lower end of the search window (exclusive)")
    hi: Optional[str] = Field(None, description="Upper end of the search window")
    g_max: int = Field(6, description="Largest candidate resolution level")
    family: Optional[str] = Field(None, description="Ideal family for acc-probe")
    cap: Optional[int] = Field(None, description="Cap on family members or witness search")
    pairs: int = Field(8, description="Sampled pairs for the subadditivity check")
    seed: int = Field(0, description="Seed for pair sampling")
    witness: bool = Field(False, description="b-to-a: search for an exponent witness instead")
    output: Optional[str] = Field(None, description="Write the report here instead of stdout")
    log_level: Optional[str] = Field(None, description="Logging level override")

    @field_validator("p")
    @classmethod
    def _prime(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and not isprime(v):
            raise ValueError(f"p must be prime, got {v}")
        return v

    @field_validator("vars", mode="before")
    @classmethod
    def _split_vars(cls, v):
        if isinstance(v, str):
            v = [s.strip() for s in v.split(",") if s.strip()]
        return v

    @field_validator("ideal", "t", mode="before")
    @classmethod
    def _listify(cls, v):
        return [v] if isinstance(v, str) else v

    @field_validator("t")
    @classmethod
    def _rationals(cls, v: List[str]) -> List[str]:
        for item in v:
            if _rational_or_value_error(item) <= 0:
                raise ValueError(f"exponent must be positive, got {item}")
        return v

    @field_validator("lo", "hi")
    @classmethod
    def _rational(cls, v: Optional[str]) -> Optional[str]:
        if v is not None and _rational_or_value_error(v) < 0:
            raise ValueError(f"window end must be >= 0, got {v}")
        return v

    @field_validator("n", mode="before")
    @classmethod
    def _range(cls, v):
        if isinstance(v, str):
            lo, sep, hi = v.partition("..")
            if not sep:
                raise ValueError(f'expected "lo..hi", got {v!r}')
            v = (int(lo), int(hi))
        if v[0] < 0 or v[0] > v[1]:
            raise ValueError(f"bad range {v}")
        return v

    @field_validator("e", "g_max", "pairs")
    @classmethod
    def _positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @field_validator("u", "seed")
    @classmethod
    def _non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("must be >= 0")
        return v

    @field_validator("q")
    @classmethod
    def _base(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 2:
            raise ValueError("q must be >= 2")
        return v


# ---------------------------------------------------------------------------
# job assembly

_LIST_KEYS = {"ideal", "t"}


def read_job_file(path: str) -> Dict[str, Any]:
    """key=value lines; '#' starts a comment; ideal and t may repeat."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecValidationError(f"cannot read job file {path}: {exc}", ["job"]) from exc
    values: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise SpecValidationError(f"{path}:{lineno}: expected key=value", ["job"])
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key in _LIST_KEYS:
            values.setdefault(key, []).append(value)
        elif key == "witness":
            values[key] = value.lower() in ("1", "true", "yes")
        else:
            values[key] = value
    return values


def build_spec(values: Dict[str, Any]) -> JobSpec:
    try:
        return JobSpec(**values)
    except ValidationError as exc:
        fields = [
            {"field": ".".join(str(x) for x in err["loc"]), "message": err["msg"]}
            for err in exc.errors()
        ]
        raise SpecValidationError("invalid job spec", fields) from exc


def infer_vars(spec: JobSpec) -> List[str]:
    texts = list(spec.ideal)
    if spec.I:
        texts.append(spec.I)
    if spec.divisor:
        texts.append(spec.divisor.rsplit(",", 1)[0])
    if spec.family:
        texts.append(spec.family)
    names = family_variables(" ".join(texts))
    return names or ["x"]


def build_ring(spec: JobSpec) -> PolyRing:
    if spec.p is None:
        raise SpecValidationError("p is required", ["p"])
    return PolyRing(spec.p, tuple(spec.vars or infer_vars(spec)))


def build_divisor(spec: JobSpec, ring: PolyRing) -> PairDivisor:
    if not spec.divisor:
        return PairDivisor.trivial(ring, spec.e)
    f_text, sep, a_text = spec.divisor.rpartition(",")
    if not sep:
        raise SpecValidationError('divisor must be "f,a"', ["divisor"])
    try:
        a = int(a_text)
    except ValueError as exc:
        raise SpecValidationError(f"divisor coefficient must be an integer, got {a_text!r}", ["divisor"]) from exc
    return PairDivisor(ring, parse_polynomial(f_text, ring), a, spec.e)


def _one(items: List[str], name: str) -> str:
    if len(items) != 1:
        raise SpecValidationError(f"exactly one {name} is required, got {len(items)}", [name])
    return items[0]


def _target(spec: JobSpec, ring: PolyRing) -> Ideal:
    return parse_ideal(spec.I, ring) if spec.I else max_ideal(ring)


def _star_config(spec: JobSpec, d: PairDivisor, ring: PolyRing, need_N: bool = True) -> StarConfig:
    if need_N and spec.N is None:
        raise SpecValidationError("N is required", ["N"])
    return StarConfig(
        d,
        parse_ideal(_one(spec.ideal, "ideal"), ring),
        as_rational(_one(spec.t, "t")),
        _target(spec, ring),
        spec.u,
        spec.N if spec.N is not None else 0,
        spec.n,
        spec.M,
    )


# ---------------------------------------------------------------------------
# commands

Outcome = Tuple[int, Dict[str, Any], Dict[str, Any]]


def _cmd_fpt(spec: JobSpec, ring: PolyRing, cfg: Settings) -> Outcome:
    d = build_divisor(spec, ring)
    a = parse_ideal(_one(spec.ideal, "ideal"), ring)
    lo = as_rational(spec.lo) if spec.lo else None
    hi = as_rational(spec.hi) if spec.hi else None
    res = fjn(ThresholdQuery(d, a, _target(spec, ring), lo, hi, spec.g_max), cfg)
    result = {"fpt" if spec.I is None else "fjn": format_rational(res.value) if res.resolved else None,
              "threshold": res.to_report()}
    code = EXIT_OK if res.resolved and res.certified else EXIT_UNRESOLVED
    return code, result, {"method": res.provenance, "certificate_modes": res.modes, "uncertified": not res.certified}


def _cmd_test_ideal(spec: JobSpec, ring: PolyRing, cfg: Settings) -> Outcome:
    d = build_divisor(spec, ring)
    if len(spec.ideal) != len(spec.t):
        raise SpecValidationError("one exponent per ideal is required", ["t"])
    ideals = [parse_ideal(g, ring) for g in spec.ideal]
    exponent = MixedExponent(tuple(zip(ideals, (as_rational(t) for t in spec.t))))
    tau, cert = test_ideal(d, exponent, cfg)
    result: Dict[str, Any] = {"generators": format_ideal(tau), "certificate": cert.to_report()}
    result["pair_compatible"] = check_pair_compatibility(d, cfg)
    if is_m_primary(tau):
        result["colength"] = colength(tau)
    if len(ideals) == 1:
        result["invariants"] = local_invariants(ideals[0], _target(spec, ring)).to_report()
    code = EXIT_OK if cert.certified else EXIT_UNRESOLVED
    return code, result, {"method": "test-ideal", "certificate_modes": [cert.mode], "uncertified": not cert.certified}


def _cmd_jumping_numbers(spec: JobSpec, ring: PolyRing, cfg: Settings) -> Outcome:
    d = build_divisor(spec, ring)
    a = parse_ideal(_one(spec.ideal, "ideal"), ring)
    lo = as_rational(spec.lo) if spec.lo else None
    hi = as_rational(spec.hi) if spec.hi else None
    jumps = jumping_numbers(ThresholdQuery(d, a, _target(spec, ring), lo, hi, spec.g_max), cfg)
    code = EXIT_OK if jumps.certified else EXIT_UNRESOLVED
    return code, jumps.to_report(), {
        "method": "upward-sweep", "certificate_modes": jumps.modes, "uncertified": not jumps.certified,
    }


def _cmd_digits(spec: JobSpec, ring: Optional[PolyRing], cfg: Settings) -> Outcome:
    t = as_rational(_one(spec.t, "t"))
    q = spec.q or (ring.p ** spec.e if ring is not None else None)
    if q is None:
        raise SpecValidationError("digits needs q or p", ["q"])
    const = digits_eventually_constant(t, q)
    result: Dict[str, Any] = {
        "t": format_rational(t),
        "q": q,
        "rows": digit_expansion(t, q, spec.n[0], spec.n[1]),
        "eventually_constant": {"digit": const[0], "onset": const[1]} if const else None,
    }
    if ring is not None:
        g, h = admissible_form(t, ring.p)
        result["admissible_form"] = {"g": g, "h": h}
    return EXIT_OK, result, {"method": "exact"}


def _star_outcome(report, method: str) -> Outcome:
    code = EXIT_UNRESOLVED if report.unverified or report.verdict in _STAR_OPEN else EXIT_OK
    return code, report.to_report(), {"method": method, "uncertified": report.unverified}


def _cmd_star_check(spec: JobSpec, ring: PolyRing, cfg: Settings) -> Outcome:
    c = _star_config(spec, build_divisor(spec, ring), ring)
    return _star_outcome(check_condition_star(c, cfg), "finite-range")


def _cmd_b_to_a(spec: JobSpec, ring: PolyRing, cfg: Settings) -> Outcome:
    d = build_divisor(spec, ring)
    if spec.witness:
        report = condA_single_witness(
            d,
            parse_ideal(_one(spec.ideal, "ideal"), ring),
            as_rational(_one(spec.t, "t")),
            _target(spec, ring),
            e_cap=spec.cap or 4,
            n_range=spec.n,
            settings=cfg,
        )
        return _star_outcome(report, "witness-search")
    c = _star_config(spec, d, ring, need_N=False)
    return _star_outcome(verify_B_to_A(c, spec.n0 or 0, cfg), "sufficient-hypotheses")


def _cmd_perturb_check(spec: JobSpec, ring: PolyRing, cfg: Settings) -> Outcome:
    c = _star_config(spec, build_divisor(spec, ring), ring)
    report = perturbation_equivalence(c, cfg)
    code, result, prov = _star_outcome(report, "perturbation")
    if spec.n0 is not None:
        key = key_equivalence(c, spec.n0, cfg)
        result = {"perturbation": result, "key": key.to_report()}
    return code, result, prov


def _cmd_stab_experiment(spec: JobSpec, ring: PolyRing, cfg: Settings) -> Outcome:
    if spec.M is None:
        raise SpecValidationError("M is required", ["M"])
    c = _star_config(spec, build_divisor(spec, ring), ring, need_N=False)
    return _star_outcome(stabilization_experiment(c, cfg), "colength-bound")


def _cmd_acc_probe(spec: JobSpec, ring: PolyRing, cfg: Settings) -> Outcome:
    if not spec.family:
        raise SpecValidationError("family is required", ["family"])
    d = build_divisor(spec, ring)
    result = acc_probe(spec.family, d, _target(spec, ring), spec.cap, spec.g_max, spec.pairs, spec.seed, cfg)
    clean = result["unresolved"] == 0 and result["failures"] == 0 and result["certified"]
    return (EXIT_OK if clean else EXIT_UNRESOLVED), result, {"method": "family-sweep", "uncertified": not clean}


_HANDLERS = {
    "fpt": _cmd_fpt,
    "test-ideal": _cmd_test_ideal,
    "jumping-numbers": _cmd_jumping_numbers,
    "digits": _cmd_digits,
    "star-check": _cmd_star_check,
    "b-to-a": _cmd_b_to_a,
    "perturb-check": _cmd_perturb_check,
    "stab-experiment": _cmd_stab_experiment,
    "acc-probe": _cmd_acc_probe,
}


def _error_report(exc: Exception) -> Dict[str, Any]:
    fields = getattr(exc, "fields", [])
    return {
        "error": str(exc),
        "fields": [f if isinstance(f, dict) else {"field": f, "message": str(exc)} for f in fields],
    }


def run(command: str, spec: JobSpec, settings: Optional[Settings] = None) -> Tuple[int, Dict[str, Any]]:
    """
    Run one command.

    Args:
        command: One of COMMANDS
        spec: Validated job
        settings: Limits; env-derived when omitted

    Returns:
        (exit code, report envelope)
    """
    if command not in _HANDLERS:
        return EXIT_INPUT, _error_report(SpecValidationError(f"unknown command {command!r}", ["command"]))
    cfg = resolve(settings)
    envelope: Dict[str, Any] = {"command": command, "ring": None, "provenance": {}, "result": None}
    logger.info("running %s", command)
    try:
        ring = None if command == "digits" and spec.p is None else build_ring(spec)
        if ring is not None:
            envelope["ring"] = ring.to_report()
        code, result, provenance = _HANDLERS[command](spec, ring, cfg)
    except ComputationLimitError as exc:
        logger.warning("%s stopped at limit %s: %s", command, exc.limit, exc)
        envelope["provenance"] = {"uncertified": True}
        envelope["result"] = {"error": str(exc), "limit": exc.limit}
        return EXIT_UNRESOLVED, envelope
    except FrobThreshError as exc:
        logger.info("%s rejected input: %s", command, exc)
        return EXIT_INPUT, _error_report(exc)
    provenance.setdefault("certificate_modes", [])
    provenance.setdefault("uncertified", code != EXIT_OK)
    envelope["provenance"] = provenance
    envelope["result"] = result
    logger.info("%s finished with exit code %d", command, code)
    return code, envelope


def dumps(report: Dict[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False)


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--job", help="key=value job file; flags override its values")
    shared.add_argument("--p", type=int, help="Characteristic")
    shared.add_argument("--vars", help="Comma-separated variables (inferred when omitted)")
    shared.add_argument("--e", type=int, help="Frobenius exponent of the divisor")
    shared.add_argument("--divisor", help='Pair divisor "f,a"')
    shared.add_argument("--I", dest="I", help="Target m-primary ideal (default m)")
    shared.add_argument("--output", help="Write the JSON report to this file")
    shared.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR")
    shared.add_argument("--ideal", action="append", help="Ideal generators; repeatable")
    shared.add_argument("--t", action="append", help="Exponent; repeatable for mixed test ideals")
    shared.add_argument("--q", type=int, help="Digit base")
    shared.add_argument("--n", help='Index range "lo..hi"')
    shared.add_argument("--u", type=int, help="Frobenius padding u")
    shared.add_argument("--N", dest="N", type=int, help="Descent constant N")
    shared.add_argument("--M", dest="M", type=int, help="Perturbation order M")
    shared.add_argument("--n0", type=int, help="Stabilization index n0")
    shared.add_argument("--lo", help="Window lower end (exclusive)")
    shared.add_argument("--hi", help="Window upper end")
    shared.add_argument("--g-max", dest="g_max", type=int, help="Largest resolution level")
    shared.add_argument("--family", help="Ideal family for acc-probe")
    shared.add_argument("--cap", type=int, help="Member cap or witness search cap")
    shared.add_argument("--pairs", type=int, help="Sampled subadditivity pairs")
    shared.add_argument("--seed", type=int, help="Sampling seed")
    shared.add_argument("--witness", action="store_true", default=None, help="b-to-a: search e-multiples for a witness")

    parser = argparse.ArgumentParser(
        prog="frobthresh",
        description="Exact test ideals and F-thresholds over F_p[x_1..x_n]",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[shared])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in ("command", "job")}
    configure_logging(flags.get("log_level"))
    try:
        values = read_job_file(args.job) if args.job else {}
        values.update(flags)
        spec = build_spec(values)
        if spec.log_level:
            configure_logging(spec.log_level)
    except SpecValidationError as exc:
        print(dumps(_error_report(exc)))
        return EXIT_INPUT
    code, report = run(args.command, spec)
    text = dumps(report)
    if spec.output:
        Path(spec.output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
