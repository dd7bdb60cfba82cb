"""Command-line front end.

Subcommands: validate, rank, indep, exchange, suite, fuzz, replay,
build-example.  Exit codes are a stable contract:

    0  success
    2  parse/usage error (bad spec, bad flags, budget exhausted)
    3  the input system fails closure validation
    4  oracle disagreement or a contradicted theorem (engine bug class)
    5  replay mismatch (witness or fuzz case does not reproduce)

GEOCLOSE_BUDGET overrides the default search budgets; every report embeds
the tool version, the seed, a config hash, and the input spec hash.
"""

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

from .closure import system_from_spec, system_to_spec, validate
from .errors import (
    GeocloseError,
    NoGroup,
    NotSoftEI,
    ReplayMismatch,
    SearchBudgetExceeded,
    SpecFormatError,
    TheoremContradiction,
)
from .indep import (
    indep,
    softei_collapse_check,
    suite_extension,
    suite_finite_character,
    suite_invariance,
    suite_locality,
    suite_monotonicity,
    suite_symmetry,
    suite_transitivity,
)
from .lab import (
    build_equivalence_example,
    build_identity_system,
    build_linear_span_gf2,
    build_nonexchange_pairs,
    build_quotient_system,
    build_trivial_acl_graph,
    fuzz_counterexamples,
    fuzzcase_from_dict,
    replay_finding,
    QuotientRelation,
    QuotientSpec,
)
from .pregeom import ExchangeWitness, check_exchange, exchange_status, replay_exchange_witness
from .rank import (
    build_nccs,
    check_chain,
    check_rank_laws,
    greedy_rank,
    is_nccs,
    rank_by_sequences,
    rank_recursive,
    CoordSequence,
)
from .reports import build_report, canonical_bytes, render_text
from .sampling import Sampler

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INVALID = 3
EXIT_DISAGREEMENT = 4
EXIT_REPLAY = 5


def _read_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecFormatError(f"cannot read JSON from {path}: {exc}") from exc


def _load_system(path):
    return system_from_spec(_read_json(path), name=path)


def _resolve_ids(system, text):
    """Comma-separated element labels or numeric ids; empty means the empty set."""
    if text is None or text.strip() == "":
        return frozenset()
    by_label = {}
    for e in system.elements:
        if e.label is not None:
            by_label.setdefault(e.label, []).append(e.id)
    out = []
    for token in text.split(","):
        token = token.strip()
        if token == "":
            continue
        if token.lstrip("-").isdigit():
            out.append(int(token))
        elif token in by_label:
            hits = by_label[token]
            if len(hits) > 1:
                raise SpecFormatError(f"label {token!r} is ambiguous: ids {hits}")
            out.append(hits[0])
        else:
            raise SpecFormatError(f"unknown element {token!r}")
    ids = frozenset(out)
    for eid in ids:
        system.pos(eid)  # raises UnknownElement -> parse error path
    return ids


def _emit(report, args):
    payload = canonical_bytes(report) if args.format == "json" else \
        render_text(report).encode("utf-8")
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)


def _precheck(system, seed=0):
    report = validate(system, seed=seed)
    if not report.ok:
        return report
    return None


# ---- subcommands -------------------------------------------------------------


def cmd_validate(args):
    spec = _read_json(args.spec)
    system = system_from_spec(spec, name=args.spec)
    exhaustive = True if args.exhaustive else None
    report = validate(system, exhaustive=exhaustive, seed=args.seed)
    out = build_report("validate", {"validation": report.to_dict()},
                       seed=args.seed, config=vars_config(args), spec=spec)
    _emit(out, args)
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_rank(args):
    spec = _read_json(args.spec)
    system = system_from_spec(spec, name=args.spec)
    bad = _precheck(system)
    if bad is not None:
        _emit(build_report("rank", {"validation": bad.to_dict()},
                           config=vars_config(args), spec=spec), args)
        return EXIT_INVALID
    A = _resolve_ids(system, args.A)
    B = _resolve_ids(system, args.B)
    n = args.n

    if args.verify:
        cert = _read_json(args.verify)
        return _verify_certificate(system, A, B, n, cert, spec, args)

    seq = rank_by_sequences(system, A, B, n)
    rec = rank_recursive(system, A, B, n)
    greedy = greedy_rank(system, A, B, n, tiebreak=args.tiebreak)
    body = {
        "query": {"A": sorted(A), "B": sorted(B), "n": n},
        "rankBySequences": seq.to_dict(),
        "rankRecursive": rec,
        "greedy": greedy.to_dict(),
        "witnessLabels": [system.label_of(e) for e in seq.witness],
        "methodsAgree": rec == seq.value,
    }
    if args.ccs:
        coord = build_nccs(system, A, B, n, tiebreak=args.tiebreak)
        body["canonicalSequence"] = coord.to_dict()
    out = build_report("rank", body, config=vars_config(args), spec=spec)
    _emit(out, args)
    return EXIT_OK if rec == seq.value else EXIT_DISAGREEMENT


def _verify_certificate(system, A, B, n, cert, spec, args):
    keys = set(cert)
    if not {"value", "witness"} <= keys or keys - {"value", "witness", "coreIndices"}:
        raise SpecFormatError("certificate must carry value, witness and optional coreIndices")
    witness = tuple(cert["witness"])
    ok = check_chain(system, A, B, n, witness) and len(witness) == cert["value"]
    truth = rank_by_sequences(system, A, B, n)
    ok = ok and truth.value == cert["value"]
    if ok and "coreIndices" in cert:
        ok = is_nccs(system, A, B, n, CoordSequence(witness, tuple(cert["coreIndices"])))
    out = build_report("rank", {
        "query": {"A": sorted(A), "B": sorted(B), "n": n},
        "verify": {"certificate": cert, "confirmed": ok, "trueValue": truth.value},
    }, config=vars_config(args), spec=spec)
    _emit(out, args)
    return EXIT_OK if ok else EXIT_REPLAY


def cmd_indep(args):
    spec = _read_json(args.spec)
    system = system_from_spec(spec, name=args.spec)
    bad = _precheck(system)
    if bad is not None:
        _emit(build_report("indep", {"validation": bad.to_dict()},
                           config=vars_config(args), spec=spec), args)
        return EXIT_INVALID
    A = _resolve_ids(system, args.A)
    B = _resolve_ids(system, args.B)
    C = _resolve_ids(system, args.C)
    result = indep(system, A, B, C, args.n)
    out = build_report("indep", {
        "query": {"A": sorted(A), "B": sorted(B), "C": sorted(C), "n": args.n},
        "queryLabels": {"A": [system.label_of(e) for e in sorted(A)],
                        "B": [system.label_of(e) for e in sorted(B)],
                        "C": [system.label_of(e) for e in sorted(C)]},
        "result": result.to_dict(),
    }, config=vars_config(args), spec=spec)
    _emit(out, args)
    return EXIT_OK


def cmd_exchange(args):
    spec = _read_json(args.spec)
    system = system_from_spec(spec, name=args.spec)
    bad = _precheck(system)
    if bad is not None:
        _emit(build_report("exchange", {"validation": bad.to_dict()},
                           config=vars_config(args), spec=spec), args)
        return EXIT_INVALID
    C = _resolve_ids(system, args.C)
    witness = check_exchange(system, C, args.n, k_max=args.kmax)
    body = {
        "query": {"C": sorted(C), "n": args.n, "kMax": args.kmax},
        "passed": witness is None,
    }
    if witness is not None:
        body["witness"] = witness.to_dict()
        body["witnessLabels"] = [system.label_of(e) for e in witness.tuple]
    out = build_report("exchange", body, config=vars_config(args), spec=spec)
    _emit(out, args)
    return EXIT_OK


def _suite_tasks(system, args):
    sampler = Sampler(system, set_size=args.set_size, seed=args.seed)
    has_group = system.automorphisms is not None

    def exchange_section():
        per_level = {}
        for n in sampler.levels:
            passed, witness = exchange_status(system, n, c_size_max=args.c_size,
                                              k_max=args.kmax)
            entry = {"passed": passed}
            if witness is not None:
                entry["witness"] = witness.to_dict()
            per_level[str(n)] = entry
        return per_level

    def softei_section():
        try:
            return softei_collapse_check(system, sampler).to_dict()
        except NotSoftEI as exc:
            return {"axiom": "soft-ei-collapse", "outcome": "not-soft-ei",
                    "element": exc.element_id, "checked": 0, "witnesses": [],
                    "seed": sampler.seed}

    def symmetry_section():
        out = {}
        for n in sampler.levels:
            passed, _ = exchange_status(system, n, c_size_max=args.c_size,
                                        k_max=args.kmax)
            out[str(n)] = suite_symmetry(system, sampler, n,
                                         exchange_passed=passed).to_dict()
        return out

    def skipped(name):
        return {"axiom": name, "outcome": "not-witnessed", "checked": 0,
                "witnesses": [{"kind": "skipped", "reason": "no automorphism group"}],
                "seed": sampler.seed}

    tasks = [
        ("exchange", exchange_section),
        ("rankLaws", lambda: check_rank_laws(system, sampler).to_dict()),
        ("monotonicity", lambda: suite_monotonicity(system, sampler).to_dict()),
        ("transitivity", lambda: suite_transitivity(system, sampler).to_dict()),
        ("finiteCharacter", lambda: suite_finite_character(system, sampler).to_dict()),
        ("locality", lambda: suite_locality(system, sampler).to_dict()),
        ("invariance", (lambda: suite_invariance(system, sampler).to_dict())
         if has_group else (lambda: skipped("invariance"))),
        ("extension", (lambda: suite_extension(system, sampler).to_dict())
         if has_group else (lambda: skipped("extension"))),
        ("symmetry", symmetry_section),
        ("softEICollapse", softei_section),
    ]
    return tasks


def cmd_suite(args):
    spec = _read_json(args.spec)
    system = system_from_spec(spec, name=args.spec)
    bad = _precheck(system, seed=args.seed)
    if bad is not None:
        _emit(build_report("suite", {"validation": bad.to_dict()},
                           config=vars_config(args), spec=spec), args)
        return EXIT_INVALID
    tasks = _suite_tasks(system, args)
    try:
        if args.workers > 1:
            with ThreadPoolExecutor(max_workers=args.workers) as pool:
                results = list(pool.map(lambda t: t[1](), tasks))
        else:
            results = [fn() for _, fn in tasks]
    except TheoremContradiction as exc:
        out = build_report("suite", {
            "hardFailure": {"kind": "theorem-contradiction", "witness": exc.witness},
        }, seed=args.seed, config=vars_config(args), spec=spec)
        _emit(out, args)
        return EXIT_DISAGREEMENT
    sections = {name: result for (name, _), result in zip(tasks, results)}
    out = build_report("suite", {"sections": sections},
                       seed=args.seed, config=vars_config(args), spec=spec)
    _emit(out, args)
    return EXIT_OK


def cmd_fuzz(args):
    config = {"seed": args.seed, "universeSize": args.universe_size,
              "trials": args.trials}
    if args.inject:
        config["inject"] = [_read_json(path) for path in args.inject]
    case = fuzz_counterexamples(config)
    out = build_report("fuzz", {"case": case.to_dict()},
                       seed=args.seed, config=vars_config(args))
    _emit(out, args)
    return EXIT_OK


def cmd_replay(args):
    if args.fuzzcase:
        data = _read_json(args.fuzzcase)
        case_dict = data["case"] if "case" in data else data
        case = fuzzcase_from_dict(case_dict)
        confirmed = []
        for f in case.findings:
            system = system_from_spec(f.system)
            confirmed.append(replay_finding(system, f.kind, f.witness))
        regenerated = fuzz_counterexamples(case.config).to_dict() == case.to_dict()
        ok = all(confirmed) and regenerated
        out = build_report("replay", {
            "kind": "fuzzcase",
            "findingsConfirmed": confirmed,
            "regeneratedIdentical": regenerated,
            "confirmed": ok,
        }, seed=case.seed, config=vars_config(args))
        _emit(out, args)
        return EXIT_OK if ok else EXIT_REPLAY
    spec = _read_json(args.spec)
    system = system_from_spec(spec, name=args.spec)
    witness = ExchangeWitness.from_dict(_read_json(args.witness))
    ok = replay_exchange_witness(system, witness)
    out = build_report("replay", {
        "kind": "exchange-witness",
        "witness": witness.to_dict(),
        "confirmed": ok,
    }, config=vars_config(args), spec=spec)
    _emit(out, args)
    return EXIT_OK if ok else EXIT_REPLAY


def cmd_build_example(args):
    kind = args.kind
    if kind == "equivalence":
        system = build_equivalence_example(args.classes, args.class_size)
    elif kind == "equality-quotient":
        base = build_identity_system(args.size)
        rel = QuotientRelation.of(1, [[(i,)] for i in range(args.size)], level=1)
        system = build_quotient_system(QuotientSpec((rel,)), base)
    elif kind == "trivial-graph":
        edges = [(0, 1), (1, 2), (3, 4), (6, 7)]
        levels = {i: (1 if i in (2, 7) else 0) for i in range(8)}
        system = build_trivial_acl_graph(
            edges, levels,
            labels={i: "pqrstuvw"[i] for i in range(8)},
            generators=[[1, 0, 2, 3, 4, 5, 6, 7], [0, 1, 2, 4, 3, 5, 6, 7]],
        )
    elif kind == "linear-gf2":
        system = build_linear_span_gf2(args.dim)
    elif kind == "identity":
        system = build_identity_system(args.size)
    elif kind == "nonexchange":
        system = build_nonexchange_pairs()
    else:  # pragma: no cover - argparse restricts choices
        raise SpecFormatError(f"unknown example kind {kind!r}")
    spec = system_to_spec(system)
    payload = canonical_bytes(spec)
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)
    return EXIT_OK


# ---- parser ------------------------------------------------------------------


def vars_config(args):
    # workers is an execution detail: reports must be byte-identical across
    # thread counts, so it stays out of the config hash
    skip = {"func", "output", "format", "workers"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _add_common(p):
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("-o", "--output", default=None, help="write the report to a file")


def make_parser():
    parser = argparse.ArgumentParser(
        prog="geoclose",
        description="Workbench for leveled closure systems: ranks, "
                    "coordinatization, exchange and independence checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the closure axioms of a structure spec")
    p.add_argument("spec")
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("rank", help="compute a rank with certificates")
    p.add_argument("spec")
    p.add_argument("--A", required=True)
    p.add_argument("--B", default="")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ccs", action="store_true", help="also build the canonical sequence")
    p.add_argument("--tiebreak", choices=("asc", "desc"), default="asc")
    p.add_argument("--verify", default=None, help="replay a certificate file")
    _add_common(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("indep", help="evaluate an independence query")
    p.add_argument("spec")
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)
    p.add_argument("--C", default="")
    p.add_argument("--n", type=int, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_indep)

    p = sub.add_parser("exchange", help="check the exchange property over a base set")
    p.add_argument("spec")
    p.add_argument("--C", default="")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kmax", type=int, default=4)
    _add_common(p)
    p.set_defaults(func=cmd_exchange)

    p = sub.add_parser("suite", help="run all verification suites")
    p.add_argument("spec")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--set-size", type=int, default=2)
    p.add_argument("--c-size", type=int, default=2)
    p.add_argument("--kmax", type=int, default=3)
    p.add_argument("--workers", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("fuzz", help="random counterexample search with shrinking")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--universe-size", type=int, default=8)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--inject", nargs="*", default=None,
                   help="structure specs analyzed before the random trials")
    _add_common(p)
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("replay", help="confirm a recorded witness or fuzz case")
    p.add_argument("--fuzzcase", default=None)
    p.add_argument("--witness", default=None)
    p.add_argument("--spec", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("build-example", help="emit a canned structure spec")
    p.add_argument("--kind", required=True,
                   choices=("equivalence", "equality-quotient", "trivial-graph",
                            "linear-gf2", "identity", "nonexchange"))
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--class-size", type=int, default=3)
    p.add_argument("--size", type=int, default=6)
    p.add_argument("--dim", type=int, default=3)
    _add_common(p)
    p.set_defaults(func=cmd_build_example)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (SpecFormatError, SearchBudgetExceeded, NoGroup) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ReplayMismatch as exc:
        print(f"replay mismatch: {exc}", file=sys.stderr)
        return EXIT_REPLAY
    except TheoremContradiction as exc:
        print(f"theorem contradiction: {exc} witness={exc.witness}", file=sys.stderr)
        return EXIT_DISAGREEMENT
    except GeocloseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
