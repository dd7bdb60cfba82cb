"""Leveled closure systems.

The central object is a finite universe of elements tagged with levels
(level 0 = real elements, higher levels = imaginaries) together with a
validated closure operator standing in for algebraic closure.  Element
sets are bitmasks over universe positions; the closure evaluator is one of

    rules   generation rules on singletons/pairs, iterated to a fixpoint
    table   explicit entries (authoritative), generated fixpoint off-table
    orbit   orbit-threshold rule over the automorphism group

Systems are immutable after construction; every operation is pure, so
concurrent readers need no coordination (the memo dictionaries tolerate
benign duplicate writes of identical values).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .bitset import all_subsets, iter_bits, mask_of, popcount, subsets_upto
from .errors import SpecFormatError, UniverseTooLarge, UnknownElement
from .groups import PermGroup

DEFAULT_UNIVERSE_BOUND = 64
EXHAUSTIVE_VALIDATION_LIMIT = 20
TABLE_BITS_RULES = 16
TABLE_BITS_ORBIT = 13
SAMPLED_SUBSET_SIZE = 4
SAMPLED_RANDOM_SUBSETS = 10_000


@dataclass(frozen=True)
class Element:
    """One universe member: stable id, least level containing it, label."""

    id: int
    level: int
    label: Optional[str] = None


class ClosureOperator:
    """Base for the three evaluator kinds; subclasses bind to a system."""

    kind = None

    def payload(self, system):
        raise NotImplementedError


class RulesClosure(ClosureOperator):
    kind = "rules"

    def __init__(self, rules):
        """rules: iterable of (premise_positions, add_positions), arity <= 2."""
        seen = set()
        normalized = []
        for premise, add in rules:
            p = mask_of(premise)
            a = mask_of(add)
            if popcount(p) > 2:
                raise SpecFormatError("rule premises are limited to at most two elements")
            if (p, a) not in seen:
                seen.add((p, a))
                normalized.append((p, a))
        normalized.sort()
        self.rules = tuple(normalized)

    def payload(self, system):
        return {
            "kind": "rules",
            "rules": [
                {"if": system.mask_to_id_list(p), "add": system.mask_to_id_list(a)}
                for p, a in self.rules
            ],
        }


class TableClosure(ClosureOperator):
    kind = "table"

    def __init__(self, entries):
        """entries: mapping premise-position-mask -> closure-position-mask.

        Listed entries are authoritative (looked up verbatim, so a
        non-idempotent table stays visibly non-idempotent); sets without
        an entry close to the least fixpoint generated by the listed
        entries used as rules.
        """
        self.entries = dict(entries)

    def payload(self, system):
        items = sorted(self.entries.items())
        return {
            "kind": "table",
            "entries": [
                {"set": system.mask_to_id_list(k), "closure": system.mask_to_id_list(v)}
                for k, v in items
            ],
        }


class OrbitClosure(ClosureOperator):
    kind = "orbit"

    def __init__(self, threshold=1):
        if threshold < 1:
            raise SpecFormatError("orbit closure threshold must be >= 1")
        self.threshold = int(threshold)

    def payload(self, system):
        return {"kind": "orbit", "threshold": self.threshold}


@dataclass
class Violation:
    axiom: str
    witness: dict

    def to_dict(self):
        return {"axiom": self.axiom, "witness": self.witness}


@dataclass
class ValidationReport:
    mode: str
    checked: int
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    seed: Optional[int] = None

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return {
            "mode": self.mode,
            "checked": self.checked,
            "ok": self.ok,
            "violations": [v.to_dict() for v in self.violations],
            "warnings": list(self.warnings),
            "seed": self.seed,
        }


class LeveledClosureSystem:
    """Finite universe + levels + closure operator + optional automorphisms."""

    def __init__(self, elements, max_level, closure, automorphisms=None,
                 universe_bound=DEFAULT_UNIVERSE_BOUND, name=None, notes=None):
        elems = sorted(elements, key=lambda e: e.id)
        if len(elems) > universe_bound:
            raise UniverseTooLarge(f"universe has {len(elems)} elements, bound is {universe_bound}")
        ids = [e.id for e in elems]
        if len(set(ids)) != len(ids):
            raise SpecFormatError("element ids must be unique")
        for e in elems:
            if e.id < 0 or e.level < 0:
                raise SpecFormatError("ids and levels must be non-negative")
            if e.level > max_level:
                raise SpecFormatError(f"element {e.id} has level {e.level} > maxLevel {max_level}")
        self.elements = tuple(elems)
        self.max_level = int(max_level)
        self.closure = closure
        self.name = name
        self.notes = dict(notes or {})

        self.size = len(elems)
        self.ids = tuple(ids)
        self._pos_of = {eid: k for k, eid in enumerate(ids)}
        self.levels = tuple(e.level for e in elems)
        self.universe_mask = (1 << self.size) - 1
        self._level_masks = []
        for n in range(max_level + 1):
            self._level_masks.append(mask_of(k for k in range(self.size) if self.levels[k] <= n))

        self.automorphisms = automorphisms
        if closure.kind == "orbit" and automorphisms is None:
            raise SpecFormatError("orbit closure needs an automorphism group")

        self._cache = {}
        self._table = None
        self._table_py = None  # Python-int copy: scalar lookups beat numpy indexing
        self._table_tried = False
        self._scratch = {}  # cross-module memo home (rank contexts etc.)

    # -- id/mask plumbing -------------------------------------------------

    def pos(self, element_id):
        try:
            return self._pos_of[element_id]
        except KeyError:
            raise UnknownElement(f"unknown element id {element_id}") from None

    def id_at(self, position):
        return self.ids[position]

    def ids_to_mask(self, ids):
        m = 0
        for eid in ids:
            m |= 1 << self.pos(eid)
        return m

    def mask_to_ids(self, mask):
        return frozenset(self.ids[p] for p in iter_bits(mask))

    def mask_to_id_list(self, mask):
        return sorted(self.ids[p] for p in iter_bits(mask))

    def level_mask(self, n):
        if n < 0 or n > self.max_level:
            raise ValueError(f"level {n} outside 0..{self.max_level}")
        return self._level_masks[n]

    def element_by_id(self, eid):
        return self.elements[self.pos(eid)]

    def label_of(self, eid):
        e = self.element_by_id(eid)
        return e.label if e.label is not None else str(eid)

    # -- closure evaluation ------------------------------------------------

    def _rules_arrays(self):
        op = self.closure
        if op.kind == "rules":
            pairs = op.rules
        else:  # table fallback rules
            pairs = sorted(op.entries.items())
        premises = np.array([p for p, _ in pairs], dtype=np.uint64)
        adds = np.array([a for _, a in pairs], dtype=np.uint64)
        return premises, adds

    def _eval_batch(self, masks):
        """Evaluate the raw operator on a uint64 array of masks."""
        op = self.closure
        if op.kind in ("rules", "table"):
            premises, adds = self._rules_arrays()
            out = kernels.rules_close_batch(masks, premises, adds)
            if op.kind == "table":
                for i, m in enumerate(masks):
                    hit = op.entries.get(int(m))
                    if hit is not None:
                        out[i] = hit
            return out
        if op.kind == "orbit":
            images = self.automorphisms.elements_array()
            return kernels.orbit_close_batch(masks, images, op.threshold, self.size)
        raise SpecFormatError(f"unknown closure kind {op.kind!r}")

    def _table_limit(self):
        return TABLE_BITS_ORBIT if self.closure.kind == "orbit" else TABLE_BITS_RULES

    def closure_table(self):
        """Dense closure table for all 2^n subsets, or None above the size cap."""
        if not self._table_tried:
            self._table_tried = True
            if self.size <= self._table_limit():
                masks = np.arange(1 << self.size, dtype=np.uint64)
                self._table = self._eval_batch(masks)
                self._table.setflags(write=False)
                self._table_py = self._table.tolist()
        return self._table

    def close(self, mask):
        """Full closure of a position mask."""
        if self._table_py is None and not self._table_tried:
            self.closure_table()
        if self._table_py is not None:
            return self._table_py[mask]
        hit = self._cache.get(mask)
        if hit is None:
            hit = int(self._eval_batch(np.array([mask], dtype=np.uint64))[0])
            self._cache[mask] = hit
        return hit

    def close_many(self, masks):
        if self._table_py is None and not self._table_tried:
            self.closure_table()
        if self._table_py is not None:
            table = self._table_py
            return [table[m] for m in masks]
        out = []
        missing = []
        for m in masks:
            hit = self._cache.get(m)
            out.append(hit)
            if hit is None:
                missing.append(m)
        if missing:
            closed = self._eval_batch(np.array(missing, dtype=np.uint64))
            fixes = {}
            for m, c in zip(missing, closed):
                fixes[m] = self._cache[m] = int(c)
            out = [fixes[m] if v is None else v for m, v in zip(masks, out)]
        return out

    def acl_n_mask(self, mask, n):
        """Level-n algebraic closure of a mask: close then cut to levels <= n."""
        return self.close(mask) & self.level_mask(n)

    # -- public set-level operations ---------------------------------------

    def acl_n(self, A, n):
        """acl at level n of a set of element ids."""
        return self.mask_to_ids(self.acl_n_mask(self.ids_to_mask(A), n))

    def cl(self, A):
        """Full closure of a set of element ids."""
        return self.mask_to_ids(self.close(self.ids_to_mask(A)))


def acl_n(system, A, n):
    """Module-level alias of LeveledClosureSystem.acl_n."""
    return system.acl_n(A, n)


def level_monotone_check(system, A, m, n):
    """Check that level-m closure sits inside level-n closure and that they
    agree on elements of level <= m.  Always true for valid systems; used
    as a regression assertion."""
    if not (0 <= m < n <= system.max_level):
        raise ValueError("need 0 <= m < n <= maxLevel")
    mask = system.ids_to_mask(A)
    lo = system.acl_n_mask(mask, m)
    hi = system.acl_n_mask(mask, n)
    return (lo & ~hi) == 0 and (hi & system.level_mask(m)) == lo


# -- validation --------------------------------------------------------------


def _minimal_mask(masks):
    """Pick the witness minimal by (popcount, value)."""
    return min(masks, key=lambda m: (popcount(m), m))


def validate(system, exhaustive=None, subset_size_bound=SAMPLED_SUBSET_SIZE,
             random_samples=SAMPLED_RANDOM_SUBSETS, seed=0):
    """Check the closure axioms (and automorphism coherence) on a system.

    Exhaustive over every subset when the universe has at most 20 elements
    (the default), otherwise over all subsets of size <= subset_size_bound
    plus seeded random subsets.  The report carries one minimal witness per
    violated axiom; an empty report means all checks passed.
    """
    n = system.size
    if exhaustive is None:
        exhaustive = n <= EXHAUSTIVE_VALIDATION_LIMIT
    if exhaustive and n > EXHAUSTIVE_VALIDATION_LIMIT:
        raise UniverseTooLarge(
            f"exhaustive validation requested for {n} elements (limit {EXHAUSTIVE_VALIDATION_LIMIT})"
        )

    violations = []
    warnings = []

    def witness_set(mask):
        return system.mask_to_id_list(mask)

    if exhaustive:
        family = list(all_subsets(system.universe_mask))
        closures = system.close_many(family)
        cl_of = dict(zip(family, closures))
        checked = len(family)

        bad = [a for a, c in cl_of.items() if a & ~c]
        if bad:
            a = _minimal_mask(bad)
            violations.append(Violation("extensive", {"A": witness_set(a)}))

        bad = []
        for a, c in cl_of.items():
            if cl_of[c] != c:
                bad.append(a)
        if bad:
            a = _minimal_mask(bad)
            violations.append(Violation("idempotent", {"A": witness_set(a)}))

        bad = []
        for a in family:
            ca = cl_of[a]
            rest = system.universe_mask & ~a
            for x in iter_bits(rest):
                if ca & ~cl_of[a | (1 << x)]:
                    bad.append((a, a | (1 << x)))
        if bad:
            a, b = min(bad, key=lambda p: (popcount(p[1]), p[1], p[0]))
            violations.append(Violation("monotone", {"A": witness_set(a), "B": witness_set(b)}))

        mono_family = family
    else:
        rng = np.random.default_rng(seed)
        family = list(subsets_upto(system.universe_mask, subset_size_bound))
        extra = {int(x) & system.universe_mask for x in
                 rng.integers(0, 1 << n, size=random_samples, dtype=np.uint64)}
        family.extend(sorted(extra - set(family)))
        closures = system.close_many(family)
        cl_of = dict(zip(family, closures))
        second = system.close_many(closures)
        checked = len(family)

        bad = [a for a, c in cl_of.items() if a & ~c]
        if bad:
            violations.append(Violation("extensive", {"A": witness_set(_minimal_mask(bad))}))

        bad = [a for a, c, cc in zip(family, closures, second) if cc != c]
        if bad:
            violations.append(Violation("idempotent", {"A": witness_set(_minimal_mask(bad))}))

        bad = []
        for a in family:
            ca = cl_of[a]
            probes = list(iter_bits(system.universe_mask & ~a))[:8]
            pairs = [a | (1 << x) for x in probes]
            for b, cb in zip(pairs, system.close_many(pairs)):
                if ca & ~cb:
                    bad.append((a, b))
        if bad:
            a, b = min(bad, key=lambda p: (popcount(p[1]), p[1], p[0]))
            violations.append(Violation("monotone", {"A": witness_set(a), "B": witness_set(b)}))

        mono_family = family

    if system.close(0) == system.universe_mask and system.universe_mask:
        warnings.append("degenerate closure: cl(empty set) is the whole universe")

    group = system.automorphisms
    if group is not None:
        for gi, g in enumerate(group.generators):
            if any(system.levels[g[p]] != system.levels[p] for p in range(n)):
                violations.append(Violation("automorphism-level", {"generator": gi}))
                break
        commute_family = mono_family if len(mono_family) <= 4096 else mono_family[:4096]
        closed = system.close_many(commute_family)
        for gi, g in enumerate(group.generators):
            moved = [group.act_mask(g, a) for a in commute_family]
            moved_cl = system.close_many(moved)
            bad = [a for a, c, mc in zip(commute_family, closed, moved_cl)
                   if group.act_mask(g, c) != mc]
            if bad:
                a = _minimal_mask(bad)
                violations.append(
                    Violation("automorphism-commutes", {"generator": gi, "A": witness_set(a)})
                )
                break

    return ValidationReport(
        mode="exhaustive" if exhaustive else "sampled",
        checked=checked,
        violations=violations,
        warnings=warnings,
        seed=None if exhaustive else seed,
    )


# -- JSON structure specs -----------------------------------------------------

_TOP_KEYS = {"elements", "maxLevel", "closure", "automorphisms"}
_ELEMENT_KEYS = {"id", "level", "label"}


def _require_keys(obj, allowed, required, what):
    if not isinstance(obj, dict):
        raise SpecFormatError(f"{what} must be an object")
    extra = set(obj) - allowed
    if extra:
        raise SpecFormatError(f"{what} has unknown fields: {sorted(extra)}")
    missing = required - set(obj)
    if missing:
        raise SpecFormatError(f"{what} is missing fields: {sorted(missing)}")


def _id_list(value, what):
    if not isinstance(value, list) or not all(isinstance(x, int) for x in value):
        raise SpecFormatError(f"{what} must be a list of integer ids")
    return value


def system_from_spec(spec, universe_bound=DEFAULT_UNIVERSE_BOUND, name=None):
    """Parse a structure-spec dict (strict: unknown fields rejected)."""
    _require_keys(spec, _TOP_KEYS, {"elements", "maxLevel", "closure"}, "structure spec")
    raw_elements = spec["elements"]
    if not isinstance(raw_elements, list) or not raw_elements:
        raise SpecFormatError("elements must be a non-empty list")
    elements = []
    for entry in raw_elements:
        _require_keys(entry, _ELEMENT_KEYS, {"id", "level"}, "element")
        label = entry.get("label")
        if label is not None and not isinstance(label, str):
            raise SpecFormatError("element label must be a string")
        if not isinstance(entry["id"], int) or not isinstance(entry["level"], int):
            raise SpecFormatError("element id and level must be integers")
        elements.append(Element(entry["id"], entry["level"], label))
    max_level = spec["maxLevel"]
    if not isinstance(max_level, int) or max_level < 0:
        raise SpecFormatError("maxLevel must be a non-negative integer")

    ids_sorted = sorted(e.id for e in elements)
    pos_of = {eid: k for k, eid in enumerate(ids_sorted)}

    def to_positions(id_list, what):
        out = []
        for eid in _id_list(id_list, what):
            if eid not in pos_of:
                raise SpecFormatError(f"{what} references unknown id {eid}")
            out.append(pos_of[eid])
        return out

    group = None
    if "automorphisms" in spec:
        _require_keys(spec["automorphisms"], {"generators"}, {"generators"}, "automorphisms")
        gens = []
        for g in spec["automorphisms"]["generators"]:
            images = to_positions(g, "generator")
            gens.append(images)
        group = PermGroup(len(elements), gens)

    closure_spec = spec["closure"]
    if not isinstance(closure_spec, dict) or "kind" not in closure_spec:
        raise SpecFormatError("closure must be an object with a 'kind'")
    kind = closure_spec["kind"]
    if kind == "rules":
        _require_keys(closure_spec, {"kind", "rules"}, {"kind", "rules"}, "rules closure")
        rules = []
        for rule in closure_spec["rules"]:
            _require_keys(rule, {"if", "add"}, {"if", "add"}, "rule")
            rules.append((to_positions(rule["if"], "rule premise"),
                          to_positions(rule["add"], "rule add")))
        op = RulesClosure(rules)
    elif kind == "table":
        _require_keys(closure_spec, {"kind", "entries"}, {"kind", "entries"}, "table closure")
        entries = {}
        for entry in closure_spec["entries"]:
            _require_keys(entry, {"set", "closure"}, {"set", "closure"}, "table entry")
            key = mask_of(to_positions(entry["set"], "table set"))
            val = mask_of(to_positions(entry["closure"], "table closure value"))
            if key in entries:
                raise SpecFormatError("duplicate table entry")
            entries[key] = val
        op = TableClosure(entries)
    elif kind == "orbit":
        _require_keys(closure_spec, {"kind", "threshold"}, {"kind"}, "orbit closure")
        op = OrbitClosure(closure_spec.get("threshold", 1))
    else:
        raise SpecFormatError(f"unknown closure kind {kind!r}")

    return LeveledClosureSystem(elements, max_level, op, automorphisms=group,
                                universe_bound=universe_bound, name=name)


def system_to_spec(system):
    """Serialize back to the canonical structure-spec dict."""
    spec = {
        "elements": [
            {"id": e.id, "level": e.level, **({"label": e.label} if e.label is not None else {})}
            for e in system.elements
        ],
        "maxLevel": system.max_level,
        "closure": system.closure.payload(system),
    }
    if system.automorphisms is not None:
        spec["automorphisms"] = {
            "generators": [
                [system.ids[g[p]] for p in range(system.size)]
                for g in system.automorphisms.generators
            ]
        }
    return spec
