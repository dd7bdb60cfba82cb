#!/usr/bin/env python3
"""Regenerate the shipped corpus (structure specs, family spec, replay file).

Run from the repository root:  python scripts/make_corpus.py
The outputs are committed; tests assert the builders still reproduce them.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from geoclose.closure import Element, LeveledClosureSystem, RulesClosure, system_to_spec
from geoclose.forking import class_membership_family
from geoclose.groups import PermGroup
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
)
from geoclose.reports import canonical_bytes

CORPUS = pathlib.Path(__file__).resolve().parents[1] / "src" / "geoclose" / "corpus"


def collapse_rules_system():
    """Frozen regression instance: the full-set rank equality over B holds
    while the subset {a,c} drops rank, separating the finite-subset
    independence verdict from the single-set shortcut (found by fuzzing,
    seed sequence [99, 192])."""
    elements = [
        Element(0, 0, "a"), Element(1, 1, "b"), Element(2, 0, "c"),
        Element(3, 1, "d"), Element(4, 1, "e"), Element(5, 1, "f"),
    ]
    rules = [
        ([1, 2], [3]),
        ([0, 3], [1, 2]),
        ([2, 3], [0, 1]),
        ([0, 5], [2]),
        ([2, 5], [1]),
        ([2, 5], [1, 4]),
    ]
    return LeveledClosureSystem(elements, 1, RulesClosure(rules), name="collapse-rules")


def write(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(canonical_bytes(obj))
    print("wrote", path)


def main():
    eq33 = build_equivalence_example(3, 3)
    write(CORPUS / "equivalence_3x3.json", system_to_spec(eq33))

    base = build_identity_system(6)
    rel = QuotientRelation.of(1, [[(i,)] for i in range(6)], level=1)
    write(CORPUS / "equality_quotient_6.json",
          system_to_spec(build_quotient_system(QuotientSpec((rel,)), base)))

    nonex = build_nonexchange_pairs()
    write(CORPUS / "nonexchange_pairs_5.json", system_to_spec(nonex))

    trivial = build_trivial_acl_graph(
        [(0, 1), (1, 2), (3, 4), (6, 7)],
        {i: (1 if i in (2, 7) else 0) for i in range(8)},
        labels={i: "pqrstuvw"[i] for i in range(8)},
        generators=[
            [1, 0, 2, 3, 4, 5, 6, 7],  # swap the two reals of the first component
            [0, 1, 2, 4, 3, 5, 6, 7],  # swap the pair component
        ],
    )
    write(CORPUS / "trivial_components_8.json", system_to_spec(trivial))

    write(CORPUS / "linear_gf2_7.json", system_to_spec(build_linear_span_gf2(3)))
    write(CORPUS / "identity_5.json", system_to_spec(build_identity_system(5)))
    write(CORPUS / "collapse_rules_6.json", system_to_spec(collapse_rules_system()))

    write(CORPUS / "family_class_membership.json",
          class_membership_family(eq33).to_spec())

    case = fuzz_counterexamples({
        "seed": 20240601,
        "trials": 2,
        "universeSize": 7,
        "inject": [system_to_spec(nonex)],
    })
    write(CORPUS / "findings" / "nonexchange_replay.json", case.to_dict())


if __name__ == "__main__":
    main()
