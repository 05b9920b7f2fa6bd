"""Batch front end: ingest a JSON problem spec, run the measure /
pushforward / induced-potential pipelines, and emit CSV tables and JSON
certificates.

Outputs are deterministic: identical spec and flags give byte-identical
files (sorted keys, repr floats, no timestamps).

Exit codes: 0 ok, 2 validation error, 3 certification unreachable,
4 verify mismatch.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .bounds import budget_constants, decay_certificate, exact_range_certificate
from .errors import CertificationError, HiddenGibbsError, SpecValidationError
from .markov import gibbs_inequality_check, measure_from
from .oracle import OracleConfig, oracle_pushforward_table
from .potentials import (
    LocallyConstantPotential,
    VariationBoundedPotential,
    approximant,
    first_symbol_weighted,
    geometric_tail,
    table_family,
    variation_profile,
)
from .pushforward import (
    exact_evaluator,
    gibbs_check_pushforward,
    induced_potential_general,
    pushforward_measure,
)
from .symbols import Alphabet, AmalgamationMap, Word, word_from_rank

LOG2 = math.log(2.0)


@dataclass
class ProblemSpec:
    """Validated problem description loaded from a JSON document."""

    alphabet: Alphabet
    potential: LocallyConstantPotential | VariationBoundedPotential
    target: Alphabet | None = None
    amap: AmalgamationMap | None = None
    r: int | None = None
    n: int | None = None
    tol: float | None = None
    delta: float = 1.0
    separator: str = ""
    words: list[str] = field(default_factory=list)
    max_word_length: int = 8
    seed_label: str = ""


def load_spec(path: str | Path) -> ProblemSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecValidationError("cannot read spec %s: %s" % (path, exc)) from exc
    try:
        return _parse_spec(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecValidationError("invalid spec %s: %s" % (path, exc)) from exc


def _parse_spec(data: dict) -> ProblemSpec:
    alphabet = Alphabet(data["alphabet"])
    sep = data.get("separator", "")
    pot_data = data.get("potential")
    if pot_data is None:
        raise SpecValidationError("spec misses the potential section")
    family = pot_data.get("family", "table")
    if family == "table":
        values = pot_data.get("values")
        if values is None:
            values = {e["word"]: e["value"] for e in pot_data["entries"]}
        potential = table_family(alphabet, int(pot_data["r"]), values, sep=sep)
    elif family == "first-symbol-weighted":
        potential = first_symbol_weighted(alphabet, pot_data["weights"])
    elif family == "geometric-tail":
        potential = geometric_tail(
            alphabet, pot_data["f"], base=float(pot_data.get("base", 2.0))
        )
    else:
        raise SpecValidationError("unknown potential family %r" % family)

    target = None
    amap = None
    if "alphabet_b" in data or "amalgamation" in data:
        if "alphabet_b" not in data or "amalgamation" not in data:
            raise SpecValidationError(
                "amalgamation needs both alphabet_b and the mapping table"
            )
        target = Alphabet(data["alphabet_b"])
        mapping = data["amalgamation"]
        hit = {mapping.get(a) for a in alphabet.symbols if a in mapping}
        missing_b = [b for b in target.symbols if b not in hit]
        if missing_b:
            raise SpecValidationError(
                "amalgamation not surjective: target symbol %r unreachable"
                % missing_b[0]
            )
        try:
            amap = AmalgamationMap(alphabet, target, mapping)
        except ValueError as exc:
            raise SpecValidationError(str(exc)) from exc

    schedule = data.get("schedule", {})
    return ProblemSpec(
        alphabet=alphabet,
        potential=potential,
        target=target,
        amap=amap,
        r=schedule.get("r"),
        n=schedule.get("n"),
        tol=schedule.get("tol"),
        delta=float(schedule.get("delta", 1.0)),
        separator=sep,
        words=list(data.get("words", [])),
        max_word_length=int(data.get("max_word_length", 8)),
    )


def _resolve_potential(spec: ProblemSpec) -> LocallyConstantPotential:
    pot = spec.potential
    if isinstance(pot, LocallyConstantPotential):
        return pot
    r = spec.r if spec.r is not None else 3
    return approximant(pot, r)


def _fmt(value: float, log2: bool) -> str:
    return repr(value / LOG2 if log2 else value)


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(str(c) for c in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, payload) -> None:
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def cmd_measure(spec: ProblemSpec, out: Path, log2: bool = False) -> int:
    pot = _resolve_potential(spec)
    measure = measure_from(pot)
    rows = [
        (word, _fmt(lp, log2))
        for word, lp in measure.to_csv_rows(spec.max_word_length, spec.separator)
    ]
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "cylinders.csv", "word,log_prob", rows)
    profile = variation_profile(pot)
    summary = {
        "pressure": measure.pressure / (LOG2 if log2 else 1.0),
        "gibbs_constant": measure.gibbs_constant,
        "log_gibbs_constant": measure.log_gibbs_constant,
        "r": pot.r,
        "alphabet": list(pot.alphabet.symbols),
        "certificate_inputs": {
            "perron_tol_residual": measure.perron.certified_residual,
            "primitivity_index": measure.perron.primitivity,
            "tau": measure.perron.tau,
            "s_psi": profile.s_psi,
            "theta": profile.theta,
            "sup_norm": pot.sup_norm,
        },
    }
    _write_json(out / "measure.json", summary)
    return 0


def _require_amap(spec: ProblemSpec) -> AmalgamationMap:
    if spec.amap is None:
        raise SpecValidationError("this command needs an amalgamation section")
    return spec.amap


def _build_pushforward(spec: ProblemSpec):
    pot = _resolve_potential(spec)
    amap = _require_amap(spec)
    measure = measure_from(pot)
    base = spec.potential
    profile = variation_profile(
        base if isinstance(base, VariationBoundedPotential) else pot
    )
    return pot, pushforward_measure(measure, amap, profile)


def cmd_pushforward(
    spec: ProblemSpec, out: Path, log2: bool = False, verify: bool = False
) -> int:
    pot, pf = _build_pushforward(spec)
    out.mkdir(parents=True, exist_ok=True)
    rows = [
        (word, _fmt(lp, log2))
        for word, lp in pf.to_csv_rows(spec.max_word_length, spec.separator)
    ]
    _write_csv(out / "pushforward.csv", "word,log_prob", rows)
    if verify:
        mismatch = _verify_pushforward(spec, pot, pf)
        if mismatch is not None:
            print("verify mismatch at word %s: %s" % mismatch, file=sys.stderr)
            return 4
    return 0


def _verify_pushforward(spec: ProblemSpec, pot, pf, tol: float = 1e-9):
    amap = pf.amap
    config = OracleConfig(max_word_length=min(spec.max_word_length, 10))
    for n in range(1, config.max_word_length + 1):
        reference = oracle_pushforward_table(pot, amap, n, config)
        computed = pf.cylinder_log_probs_all(n)
        for k, ref in enumerate(reference):
            got = math.exp(computed[k])
            if abs(got - ref) > tol * max(ref, 1e-300):
                word = word_from_rank(amap.target, k, n).label(spec.separator)
                return word, "oracle %.17g vs pipeline %.17g" % (ref, got)
    return None


def cmd_induced(spec: ProblemSpec, out: Path, log2: bool = False) -> int:
    amap = _require_amap(spec)
    out.mkdir(parents=True, exist_ok=True)
    base = spec.potential
    if isinstance(base, VariationBoundedPotential) and (
        spec.tol is not None or spec.r is not None
    ):
        evaluator = induced_potential_general(
            base, amap, tol=spec.tol, r=spec.r, delta=spec.delta
        )
    else:
        pot, pf = _build_pushforward(spec)
        evaluator = exact_evaluator(pf, depth=spec.n)
    pf = evaluator.pushforward
    depth = spec.n if spec.n is not None else evaluator.default_depth
    words = spec.words or [
        word_from_rank(amap.target, k, 2).label(spec.separator)
        for k in range(amap.target.size ** 2)
    ]
    evaluations = []
    for text in words:
        w = amap.target.parse(text, sep=spec.separator)
        value = evaluator.evaluate(w, n=depth)
        d = value.to_json_dict()
        if log2:
            d["value"] = d["value"] / LOG2
            d["error_bar"] = d["error_bar"] / LOG2
        evaluations.append(d)
    _write_json(out / "induced.json", evaluations)

    report = evaluator.variation(n_max=min(spec.max_word_length, 10))
    _write_csv(
        out / "variation_report.csv",
        "n,empirical_var,certified_bound,error_bar",
        [(r[0], repr(r[1]), repr(r[2]), repr(r[3])) for r in report.to_csv_rows()],
    )

    profile = pf.profile
    cert: dict
    try:
        if profile.locally_constant_range is not None:
            certificate = exact_range_certificate(
                pf.theta, pf.r, pf.constants.c, pf.d_star / (1.0 - pf.family.tau_star)
            )
        else:
            certificate = decay_certificate(profile, pf.constants.c, spec.delta)
        cert = certificate.to_json_dict()
    except CertificationError as exc:
        cert = {"error": str(exc)}
    consts = budget_constants(profile)
    cert["certificate_inputs"] = {
        "r": pf.r,
        "n": depth,
        "theta": pf.theta,
        "s_psi": profile.s_psi,
        "D": consts.d,
        "D1": consts.d1,
        "tau_star": pf.family.tau_star,
        "d_star": pf.d_star,
        "limit_bar": evaluator.limit_bar,
    }
    _write_json(out / "certificate.json", cert)
    return 0


def cmd_verify(spec: ProblemSpec, out: Path) -> int:
    pot, pf = _build_pushforward(spec)
    mismatch = _verify_pushforward(spec, pot, pf)
    out.mkdir(parents=True, exist_ok=True)
    payload = {"status": "ok" if mismatch is None else "mismatch"}
    if mismatch is not None:
        payload["word"], payload["detail"] = mismatch
    _write_json(out / "verify.json", payload)
    if mismatch is not None:
        print("verify mismatch at word %s: %s" % mismatch, file=sys.stderr)
        return 4
    return 0


def cmd_report(spec: ProblemSpec, out: Path, log2: bool = False) -> int:
    code = cmd_measure(spec, out, log2)
    if code:
        return code
    if spec.amap is not None:
        code = cmd_pushforward(spec, out, log2)
        if code:
            return code
        code = cmd_induced(spec, out, log2)
        if code:
            return code
        pot, pf = _build_pushforward(spec)
        scan = gibbs_check_pushforward(pf, n_max=min(spec.max_word_length, 8))
        pot_scan = gibbs_inequality_check(
            measure_from(pot), n_max=min(spec.max_word_length, 8)
        )
        _write_json(
            out / "gibbs_checks.json",
            {
                "base": {
                    "constant": pot_scan.constant,
                    "max_ratio": pot_scan.max_ratio,
                    "min_ratio": pot_scan.min_ratio,
                    "violations": pot_scan.violations,
                },
                "pushforward": {
                    "log_constant": scan.log_constant,
                    "per_depth": [list(row) for row in scan.per_depth],
                    "drift": scan.drift,
                    "violations": scan.violations,
                },
            },
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hiddengibbs",
        description="Gibbs measures of finite-range potentials, their "
        "amalgamation pushforwards, and induced potentials with certified "
        "error bars.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("measure", "pushforward", "induced", "verify", "report"):
        p = sub.add_parser(name)
        p.add_argument("--spec", required=True, help="path to the JSON problem spec")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--r", type=int, default=None)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--cap", type=int, default=None, help="enumeration cap")
        p.add_argument("--log2", action="store_true", help="display in log base 2")
        if name == "pushforward":
            p.add_argument("--verify", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_spec(args.spec)
        if args.r is not None:
            spec.r = args.r
        if args.n is not None:
            spec.n = args.n
        if args.tol is not None:
            spec.tol = args.tol
        if args.delta is not None:
            spec.delta = args.delta
        if args.cap is not None:
            spec.max_word_length = min(
                spec.max_word_length,
                max(1, int(math.log(max(args.cap, 2), spec.alphabet.size))),
            )
        out = Path(args.out)
        if args.command == "measure":
            return cmd_measure(spec, out, args.log2)
        if args.command == "pushforward":
            return cmd_pushforward(spec, out, args.log2, getattr(args, "verify", False))
        if args.command == "induced":
            return cmd_induced(spec, out, args.log2)
        if args.command == "verify":
            return cmd_verify(spec, out)
        return cmd_report(spec, out, args.log2)
    except SpecValidationError as exc:
        print("validation error: %s" % exc, file=sys.stderr)
        return 2
    except CertificationError as exc:
        print("certification unreachable: %s" % exc, file=sys.stderr)
        return 3
    except ValueError as exc:
        print("validation error: %s" % exc, file=sys.stderr)
        return 2
    except HiddenGibbsError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
