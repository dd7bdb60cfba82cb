import json

import pytest

from geoclose.closure import system_from_spec, system_to_spec, validate
from geoclose.errors import (
    NotEquivalence,
    RelationNotInvariant,
    SpecFormatError,
    UniverseTooLarge,
)
from geoclose.indep import indep, suite_symmetry
from geoclose.lab import (
    QuotientRelation,
    QuotientSpec,
    build_equivalence_example,
    build_identity_system,
    build_linear_span_gf2,
    build_nonexchange_pairs,
    build_quotient_system,
    build_trivial_acl_graph,
    fuzz_counterexamples,
    fuzzcase_from_dict,
    replay_finding,
    restrict_system,
)
from geoclose.pregeom import exchange_status
from geoclose.rank import rank_recursive
from geoclose.reports import canonical_bytes
from geoclose.sampling import Sampler

from conftest import CORPUS, CORPUS_NAMES


def test_all_builders_validate():
    systems = [
        build_equivalence_example(3, 3),
        build_identity_system(5),
        build_linear_span_gf2(3),
        build_nonexchange_pairs(),
        build_trivial_acl_graph([(0, 1)], {0: 0, 1: 0}),
    ]
    for system in systems:
        assert validate(system).ok, system.name


def test_corpus_matches_builders():
    # the shipped corpus is exactly what the generation script emits
    import subprocess, sys, tempfile, pathlib, shutil

    script = CORPUS.parents[2] / "scripts" / "make_corpus.py"
    with tempfile.TemporaryDirectory() as tmp:
        snapshot = pathlib.Path(tmp) / "corpus"
        shutil.copytree(CORPUS, snapshot)
        subprocess.run([sys.executable, str(script)],
                       check=True, capture_output=True)
        for name in CORPUS_NAMES:
            assert (CORPUS / name).read_bytes() == (snapshot / name).read_bytes(), name
        fn = "findings/nonexchange_replay.json"
        assert (CORPUS / fn).read_bytes() == (snapshot / fn).read_bytes()


def test_equivalence_example_bounds():
    with pytest.raises(ValueError):
        build_equivalence_example(1, 3)
    with pytest.raises(UniverseTooLarge):
        build_equivalence_example(10, 10)


def test_equivalence_example_golden_values():
    eq = build_equivalence_example(3, 3)
    assert rank_recursive(eq, {0}, set(), 1) == 2
    assert rank_recursive(eq, {0}, {1}, 0) == 1
    assert eq.acl_n({9}, 1) == {9}  # no real is algebraic over a class element


def test_quotient_equality_relation_mirrors_base(eqq):
    # every class element is interalgebraic with its point
    for p in range(6):
        assert eqq.cl({p}) == {p, p + 6}
        assert eqq.cl({p + 6}) == {p, p + 6}


def test_quotient_partition_reproduces_golden_ranks():
    from geoclose.closure import Element, LeveledClosureSystem, RulesClosure
    from geoclose.groups import PermGroup

    ident = list(range(9))
    gens = []
    for j in (0, 3, 6):
        s = ident.copy(); s[j], s[j + 1] = s[j + 1], s[j]; gens.append(s)
        c = ident.copy(); c[j], c[j + 1], c[j + 2] = j + 1, j + 2, j; gens.append(c)
    for j in (0, 3):
        s = ident.copy()
        for i in range(3):
            s[j + i], s[j + 3 + i] = j + 3 + i, j + i
        gens.append(s)
    base = LeveledClosureSystem([Element(i, 0, "abcdefghi"[i]) for i in range(9)],
                                0, RulesClosure([]), automorphisms=PermGroup(9, gens))
    rel = QuotientRelation.of(1, [[(0,), (1,), (2,)], [(3,), (4,), (5,)],
                                  [(6,), (7,), (8,)]], level=1)
    q = build_quotient_system(QuotientSpec((rel,)), base)
    assert validate(q).ok
    # same singleton closures as the rules-built example, same golden values
    eq = build_equivalence_example(3, 3)
    for i in range(12):
        assert q.cl({q.ids[i]}) == eq.cl({eq.ids[i]})
    assert rank_recursive(q, {0}, set(), 1) == 2
    assert rank_recursive(q, {0}, {1}, 1) == 1
    assert indep(q, {0}, {1}, set(), 0, certificates=False).independent
    assert not indep(q, {0}, {1}, set(), 1, certificates=False).independent
    # known finite-scale artifact: exhausting a class pins its last member,
    # so closures of larger sets exceed the idealized ones
    assert 2 in q.cl({0, 1})
    assert 2 not in eq.cl({0, 1})


def test_quotient_rejects_non_partition():
    base = build_identity_system(4)
    rel = QuotientRelation.of(1, [[(0,), (1,)]], level=1)  # misses (2,), (3,)
    with pytest.raises(NotEquivalence):
        build_quotient_system(QuotientSpec((rel,)), base)
    rel = QuotientRelation.of(1, [[(0,), (1,)], [(1,), (2,), (3,)]], level=1)
    with pytest.raises(NotEquivalence):
        build_quotient_system(QuotientSpec((rel,)), base)


def test_quotient_rejects_non_invariant_relation():
    base = build_identity_system(4)  # full S4
    rel = QuotientRelation.of(1, [[(0,), (1,)], [(2,), (3,)]], level=1)
    with pytest.raises(RelationNotInvariant):
        build_quotient_system(QuotientSpec((rel,)), base)


def test_quotient_with_trivial_group_is_degenerate():
    from geoclose.groups import PermGroup
    from geoclose.closure import Element, LeveledClosureSystem, RulesClosure

    base = LeveledClosureSystem([Element(i, 0) for i in range(4)], 0, RulesClosure([]),
                                automorphisms=PermGroup(4, []))
    rel = QuotientRelation.of(1, [[(i,)] for i in range(4)], level=1)
    q = build_quotient_system(QuotientSpec((rel,)), base)
    assert q.notes.get("degenerate_closure")
    assert q.close(0) == q.universe_mask  # everything is stabilizer-fixed
    report = validate(q)
    assert report.ok and report.warnings


def test_trivial_graph_structure(trivial):
    assert trivial.cl({0}) == {0, 1, 2}  # its component
    assert trivial.cl({5}) == {5}
    assert trivial.cl({0, 5}) == {0, 1, 2, 5}
    # notes are builder-side hints; JSON specs stay strict and drop them
    built = build_trivial_acl_graph(
        [(0, 1), (1, 2), (3, 4), (6, 7)],
        {i: (1 if i in (2, 7) else 0) for i in range(8)},
    )
    assert built.notes.get("trivial_closure") and built.notes.get("soft_ei")


def test_triviality_gives_exchange_at_all_levels(trivial):
    # closure generated by singletons: exchange must hold at every level
    for n in range(trivial.max_level + 1):
        passed, _ = exchange_status(trivial, n)
        assert passed


def test_triviality_gives_symmetry(trivial):
    sampler = Sampler(trivial, set_size=2, seed=0)
    for n in range(trivial.max_level + 1):
        assert suite_symmetry(trivial, sampler, n).outcome == "pass"


def test_trivial_graph_rejects_loops_and_unknown_ids():
    with pytest.raises(SpecFormatError):
        build_trivial_acl_graph([(0, 0)], {0: 0})
    with pytest.raises(SpecFormatError):
        build_trivial_acl_graph([(0, 9)], {0: 0, 1: 0})


def test_restrict_system_keeps_surviving_rules(nonex):
    sub = restrict_system(nonex, [0, 1, 4])
    assert set(sub.ids) == {0, 1, 4}
    assert sub.cl({0, 4}) == {0, 1, 4}  # the pair rule survives
    assert sub.cl({0, 1}) == {0, 1}     # quad rule's add-set shrinks to itself


# ---- fuzzer ------------------------------------------------------------------


def test_fuzz_deterministic_bytes():
    config = {"seed": 77, "trials": 3, "universeSize": 6}
    a = fuzz_counterexamples(config)
    b = fuzz_counterexamples(config)
    assert canonical_bytes(a.to_dict()) == canonical_bytes(b.to_dict())


def test_fuzz_identity_inject_empty_findings():
    idn = system_to_spec(build_identity_system(5))
    case = fuzz_counterexamples({"seed": 1, "trials": 0, "inject": [idn]})
    assert case.findings == []


def test_fuzz_rediscovers_injected_nonexchange_and_shrinks():
    spec = system_to_spec(build_nonexchange_pairs())
    case = fuzz_counterexamples({"seed": 5, "trials": 0, "inject": [spec]})
    kinds = {f.kind for f in case.findings}
    assert "exchange" in kinds and "symmetry" in kinds
    for f in case.findings:
        assert len(f.system["elements"]) <= 6  # shrunk to a small core
        system = system_from_spec(f.system)
        assert replay_finding(system, f.kind, f.witness)


def test_fuzz_findings_replay_from_file(tmp_path):
    data = json.loads((CORPUS / "findings" / "nonexchange_replay.json").read_text())
    case = fuzzcase_from_dict(data)
    assert case.findings, "shipped replay file must carry findings"
    assert any(f.kind == "symmetry" and f.injected for f in case.findings)
    for f in case.findings:
        assert replay_finding(system_from_spec(f.system), f.kind, f.witness)
    # regeneration from the embedded config is byte-identical
    assert fuzz_counterexamples(case.config).to_dict() == case.to_dict()


def test_fuzz_rejects_unknown_config_keys():
    with pytest.raises(SpecFormatError):
        fuzz_counterexamples({"seed": 1, "bogus": 2})
    with pytest.raises(SpecFormatError):
        fuzz_counterexamples({})
