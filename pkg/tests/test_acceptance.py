"""Acceptance criteria, one test per criterion.

Each test prints a single PASS line on success (run with -s to see them);
a failing criterion fails its test.  Bounds used here:

  * "corpus" = every structure spec shipped under geoclose/corpus (all
    have at most 12 elements),
  * criterion 2/3 bounds: all A, B of size <= 3, all levels,
  * symmetry scans bound the base C by size <= 1 (A, B keep size <= 3),
  * canonical-sequence checks run exhaustively at A <= 2, B <= 1.
"""

import json
import pathlib
import time

import pytest

from geoclose.bitset import submasks, subsets_upto
from geoclose.closure import system_from_spec
from geoclose.errors import NotSoftEI
from geoclose.forking import DefinableFamily, strong_dividing_implies_acl
from geoclose.indep import (
    indep,
    softei_collapse_check,
    suite_finite_character,
    suite_locality,
    suite_monotonicity,
    suite_symmetry,
    suite_transitivity,
)
from geoclose.lab import build_equivalence_example, fuzzcase_from_dict, replay_finding
from geoclose.pregeom import exchange_status
from geoclose.rank import (
    build_nccs,
    check_rank_laws,
    rank_by_sequences,
    rank_recursive,
    rank_value,
    transform_ncs_to_nccs,
)
from geoclose.sampling import Sampler

from conftest import CORPUS, corpus_path, load_spec

EXCHANGE_BOUNDS = {"c_size_max": 2, "k_max": 3}


def _exchange_passed_everywhere(system):
    return all(exchange_status(system, n, **EXCHANGE_BOUNDS)[0]
               for n in range(system.max_level + 1))


def _sets_upto(system, k):
    return [system.mask_to_ids(m) for m in subsets_upto(system.universe_mask, k)]


def report(line):
    print(f"\nACCEPTANCE {line}")


def test_criterion_1_golden_example_values():
    t0 = time.perf_counter()
    eq = build_equivalence_example(3, 3)
    a, b = 0, 1  # distinct reals, same class
    assert rank_recursive(eq, {a}, set(), 0) == 1
    assert rank_recursive(eq, {a}, set(), 1) == 2
    assert rank_recursive(eq, {a}, {b}, 0) == 1
    assert rank_recursive(eq, {a}, {b}, 1) == 1
    assert indep(eq, {a}, {b}, set(), 0, certificates=False).independent is True
    assert indep(eq, {a}, {b}, set(), 1, certificates=False).independent is False
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0, f"golden example took {elapsed:.2f}s"
    report(f"1: PASS golden example values exact ({elapsed * 1000:.0f} ms)")


def test_criterion_2_oracle_equivalence(corpus_systems):
    t0 = time.perf_counter()
    checked = 0
    for name, system in corpus_systems.items():
        sets3 = _sets_upto(system, 3)
        for n in range(system.max_level + 1):
            for A in sets3:
                for B in sets3:
                    checked += 1
                    lhs = rank_recursive(system, A, B, n)
                    rhs = rank_value(system, A, B, n)
                    assert lhs == rhs, (name, sorted(A), sorted(B), n, lhs, rhs)
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"oracle equivalence took {elapsed:.1f}s"
    report(f"2: PASS oracle equivalence, {checked} queries, zero mismatches "
           f"({elapsed:.1f} s)")


def test_criterion_3_rank_laws_and_locality(corpus_systems):
    t0 = time.perf_counter()
    total = 0
    for name, system in corpus_systems.items():
        sampler = Sampler(system, set_size=3, seed=0)
        law_report = check_rank_laws(system, sampler)
        assert law_report.ok, (name, law_report.to_dict())
        total += sum(entry["checked"] for entry in law_report.laws.values())
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"rank laws took {elapsed:.1f}s"
    report(f"3: PASS rank laws and locality, {total} checks, zero violations "
           f"({elapsed:.1f} s)")


def test_criterion_4_canonical_sequences(corpus_systems):
    t0 = time.perf_counter()
    systems = {name: s for name, s in corpus_systems.items()
               if _exchange_passed_everywhere(s)}
    assert len(systems) >= 5  # the corpus ships five exchange-valid systems
    lengths = uniqueness = 0
    for name, system in systems.items():
        sets2 = _sets_upto(system, 2)
        sets1 = _sets_upto(system, 1)
        for n in range(system.max_level + 1):
            for A in sets2:
                for B in sets1:
                    expected = rank_value(system, A, B, n)
                    asc = build_nccs(system, A, B, n, tiebreak="asc")
                    desc = build_nccs(system, A, B, n, tiebreak="desc")
                    moved = transform_ncs_to_nccs(
                        system, A, B, n, rank_by_sequences(system, A, B, n))
                    lengths += 3
                    for coord in (asc, desc, moved):
                        assert len(coord.elements) == expected, (name, A, B, n)
                    uniqueness += 1
                    assert asc.core_indices == desc.core_indices == moved.core_indices
                    for k in asc.core_indices:
                        closures = {
                            frozenset(system.cl(set(c.elements[:k]) | set(B)))
                            for c in (asc, desc, moved)
                        }
                        assert len(closures) == 1, (name, A, B, n, k)
    # modularity equality and chain decomposition
    modularity = chains = 0
    for name, system in systems.items():
        sets3 = [system.ids_to_mask(s) for s in _sets_upto(system, 3)]
        sets2m = [system.ids_to_mask(s) for s in _sets_upto(system, 2)]
        for n in range(system.max_level + 1):
            for a_mask in sets3:
                A = system.mask_to_ids(a_mask)
                for b_mask in submasks(a_mask):
                    B = system.mask_to_ids(b_mask)
                    for c_mask in sets2m:
                        C = system.mask_to_ids(c_mask)
                        modularity += 1
                        assert rank_value(system, A, C, n) == (
                            rank_value(system, B, C, n)
                            + rank_value(system, A, B | C, n)
                        ), (name, sorted(A), sorted(B), sorted(C), n)
        ids = list(system.ids)
        triples = [(x, y, z) for x in ids for y in ids for z in ids
                   if len({x, y, z}) == 3]
        for n in range(system.max_level + 1):
            for tup in triples[:200]:
                for C in _sets_upto(system, 1):
                    chains += 1
                    total = rank_value(system, set(tup), C, n)
                    parts = sum(rank_value(system, {tup[i]}, set(tup[:i]) | C, n)
                                for i in range(3))
                    assert total == parts, (name, tup, sorted(C), n)
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0, f"canonical-sequence checks took {elapsed:.1f}s"
    report(f"4: PASS canonical sequences on {len(systems)} exchange-valid systems "
           f"({lengths} lengths, {uniqueness} uniqueness, {modularity} modularity, "
           f"{chains} chain checks; {elapsed:.1f} s)")


def test_criterion_5_symmetry_and_nonexchange_finding(corpus_systems):
    t0 = time.perf_counter()
    checked = 0
    for name, system in corpus_systems.items():
        if not _exchange_passed_everywhere(system):
            continue
        sampler = Sampler(system, set_size=3, base_size=1, seed=0)
        for n in range(system.max_level + 1):
            rep = suite_symmetry(system, sampler, n, exchange_passed=True)
            assert rep.outcome == "pass", (name, n, rep.to_dict())
            checked += rep.checked
    # the shipped non-exchange system yields a recorded symmetry finding,
    # replayable from the fuzzer's archive file
    case = fuzzcase_from_dict(json.loads(
        (CORPUS / "findings" / "nonexchange_replay.json").read_text()))
    injected = [f for f in case.findings if f.injected and f.kind == "symmetry"]
    assert injected, "replay file must record a symmetry finding"
    for f in injected:
        assert replay_finding(system_from_spec(f.system), f.kind, f.witness)
    elapsed = time.perf_counter() - t0
    report(f"5: PASS symmetry clean on exchange-valid corpus ({checked} queries) "
           f"and non-exchange symmetry finding replays ({elapsed:.1f} s)")


def test_criterion_6_unconditional_axioms(corpus_systems):
    t0 = time.perf_counter()
    total = 0
    for name, system in corpus_systems.items():
        size = 3 if system.size <= 8 else 2
        sampler = Sampler(system, set_size=size, seed=0)
        for suite in (suite_monotonicity, suite_transitivity,
                      suite_finite_character, suite_locality):
            rep = suite(system, sampler)
            assert rep.outcome == "pass", (name, rep.to_dict())
            total += rep.checked
    elapsed = time.perf_counter() - t0
    report(f"6: PASS unconditional axioms on all corpus systems "
           f"({total} instances, zero violations; {elapsed:.1f} s)")


def test_criterion_7_soft_ei_collapse(eqq, eq33):
    rep = softei_collapse_check(eqq, Sampler(eqq, set_size=2, seed=0))
    assert rep.outcome == "pass" and rep.checked > 0
    with pytest.raises(NotSoftEI) as exc:
        softei_collapse_check(eq33, Sampler(eq33, set_size=1, seed=0))
    assert exc.value.element_id == 9
    report("7: PASS soft-elimination collapse on the equality quotient; "
           "equivalence example correctly flagged NotSoftEI")


def test_criterion_8_strong_dividing_acl_probe(eq33):
    fam = DefinableFamily.from_spec(eq33, load_spec("family_class_membership.json"))
    c_sets = [frozenset()] + [frozenset({i}) for i in eq33.ids]
    rep = strong_dividing_implies_acl(eq33, fam, c_sets, 2)
    assert rep.outcome == "pass" and rep.checked > 0
    report(f"8: PASS strong-dividing membership probe, {rep.checked} triples, "
           "zero disagreements")


def test_criterion_9_determinism(tmp_path):
    from geoclose.cli import main

    t0 = time.perf_counter()
    suite_outputs = []
    for i, workers in enumerate((1, 4, 1)):
        out = tmp_path / f"suite{i}.json"
        assert main(["suite", corpus_path("trivial_components_8.json"),
                     "--seed", "11", "--workers", str(workers),
                     "--format", "json", "-o", str(out)]) == 0
        suite_outputs.append(out.read_bytes())
    assert suite_outputs[0] == suite_outputs[1] == suite_outputs[2]

    fuzz_outputs = []
    for i in range(2):
        out = tmp_path / f"fuzz{i}.json"
        assert main(["fuzz", "--seed", "20240601", "--trials", "2",
                     "--universe-size", "7",
                     "--inject", corpus_path("nonexchange_pairs_5.json"),
                     "--format", "json", "-o", str(out)]) == 0
        fuzz_outputs.append(out.read_bytes())
    assert fuzz_outputs[0] == fuzz_outputs[1]
    elapsed = time.perf_counter() - t0
    report(f"9: PASS byte-identical suite and fuzz outputs across runs and "
           f"thread counts ({elapsed:.1f} s)")


def test_criterion_10_docs_state_scope():
    raw = (pathlib.Path(__file__).resolve().parents[1] / "README.md").read_text()
    readme = " ".join(raw.replace("*", "").split())
    assert "not reproducible at finite scale" in readme
    assert "criteria 4 and 5" in readme
    report("10: PASS docs state the infinite-theory results are out of "
           "executable scope and point to criteria 4-5 as finite shadows")
