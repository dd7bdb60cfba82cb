"""Builders and generators for closure systems, plus the counterexample fuzzer.

The builders produce validated instances: the infinite-equivalence-classes
example, imaginary quotients driven by group-invariant equivalence
relations with orbit-threshold closure, component-trivial closure graphs,
identity baselines, a GF(2) linear-span matroid, and the hand-built
non-exchange instance the fuzzer and the symmetry suites replay.
"""

import string
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .closure import (
    Element,
    LeveledClosureSystem,
    OrbitClosure,
    RulesClosure,
    system_from_spec,
    system_to_spec,
    validate,
)
from .errors import (
    NoGroup,
    NotEquivalence,
    RelationNotInvariant,
    SpecFormatError,
    UniverseTooLarge,
)
from .groups import PermGroup
from .indep import indep
from .pregeom import ExchangeWitness, check_exchange, replay_exchange_witness
from .sampling import Sampler


def _letter_label(index):
    letters = string.ascii_lowercase
    label = ""
    index += 1
    while index:
        index, rem = divmod(index - 1, 26)
        label = letters[rem] + label
    return label


def build_equivalence_example(classes, class_size, universe_bound=64):
    """One equivalence relation, `classes` classes of `class_size` reals,
    plus one level-1 element per class.  Closure: each real adds its class
    element, class elements add nothing.  Automorphisms: within-class
    permutations and adjacent class swaps (wreath-style generators)."""
    if classes < 2 or class_size < 2:
        raise ValueError("need at least 2 classes of size at least 2")
    reals = classes * class_size
    total = reals + classes
    if total > universe_bound:
        raise UniverseTooLarge(f"{total} elements exceed the bound {universe_bound}")

    elements = [Element(i, 0, _letter_label(i)) for i in range(reals)]
    for j in range(classes):
        elements.append(Element(reals + j, 1, f"[{_letter_label(j * class_size)}]"))
    rules = [([r], [reals + r // class_size]) for r in range(reals)]

    gens = []
    ident = list(range(total))
    for j in range(classes):
        base = j * class_size
        swap = ident.copy()
        swap[base], swap[base + 1] = swap[base + 1], swap[base]
        gens.append(swap)
        if class_size > 2:
            cyc = ident.copy()
            for i in range(class_size):
                cyc[base + i] = base + (i + 1) % class_size
            gens.append(cyc)
    for j in range(classes - 1):
        swap = ident.copy()
        for i in range(class_size):
            swap[j * class_size + i] = (j + 1) * class_size + i
            swap[(j + 1) * class_size + i] = j * class_size + i
        swap[reals + j], swap[reals + j + 1] = reals + j + 1, reals + j
        gens.append(swap)

    return LeveledClosureSystem(
        elements, 1, RulesClosure(rules),
        automorphisms=PermGroup(total, gens),
        universe_bound=universe_bound,
        name=f"equivalence-{classes}x{class_size}",
        notes={"soft_ei": False},
    )


@dataclass(frozen=True)
class QuotientRelation:
    """An equivalence relation on k-tuples of base ids, given extensionally
    as its classes; new imaginary elements live at `level`."""

    arity: int
    classes: tuple
    level: int

    @classmethod
    def of(cls, arity, classes, level=None):
        frozen = tuple(tuple(tuple(t) for t in c) for c in classes)
        return cls(arity, frozen, arity if level is None else level)


@dataclass(frozen=True)
class QuotientSpec:
    relations: tuple
    threshold: int = 1


def build_quotient_system(spec: QuotientSpec, base: LeveledClosureSystem,
                          universe_bound=64):
    """Adjoin one element per relation class and switch to orbit closure.

    The base must be all real with an automorphism group; each relation
    must partition the full tuple space and be group-invariant.  The base
    generators extend to the classes, and closure becomes the
    orbit-threshold rule over the extended group (transitively re-closed).
    """
    if any(e.level != 0 for e in base.elements):
        raise SpecFormatError("quotient base must contain only level-0 elements")
    if base.automorphisms is None:
        raise NoGroup("quotient construction needs base automorphisms")

    base_ids = list(base.ids)
    elements = list(base.elements)
    next_id = max(base_ids) + 1
    max_level = 0
    class_index = {}  # (relation idx, tuple) -> element position
    new_specs = []

    for ridx, rel in enumerate(spec.relations):
        space = set(product(base_ids, repeat=rel.arity))
        seen = set()
        for cls_tuples in rel.classes:
            for t in cls_tuples:
                if len(t) != rel.arity:
                    raise NotEquivalence(f"tuple {t} has wrong arity for relation {ridx}")
                if t in seen:
                    raise NotEquivalence(f"tuple {t} appears in two classes")
                seen.add(t)
        if seen != space:
            raise NotEquivalence(f"relation {ridx} does not cover the tuple space")
        if rel.level < 1:
            raise SpecFormatError("quotient classes must live at level >= 1")
        max_level = max(max_level, rel.level)

        tuple_to_class = {}
        for cidx, cls_tuples in enumerate(rel.classes):
            for t in cls_tuples:
                tuple_to_class[t] = cidx
        for g in base.automorphisms.generators:
            for cidx, cls_tuples in enumerate(rel.classes):
                images = {tuple_to_class[tuple(base.id_at(g[base.pos(x)]) for x in t)]
                          for t in cls_tuples}
                if len(images) != 1:
                    raise RelationNotInvariant(
                        f"relation {ridx} class {cidx} is split by a base generator"
                    )
        for cidx, cls_tuples in enumerate(rel.classes):
            least = min(cls_tuples)
            label = "[" + ",".join(base.label_of(x) for x in least) + "]"
            if len(spec.relations) > 1:
                label += f"@{ridx}"
            elements.append(Element(next_id, rel.level, label))
            class_index[(ridx, cidx)] = len(elements) - 1
            new_specs.append((ridx, tuple_to_class, cidx))
            next_id += 1

    total = len(elements)
    if total > universe_bound:
        raise UniverseTooLarge(f"{total} elements exceed the bound {universe_bound}")

    gens = []
    for g in base.automorphisms.generators:
        images = [base.pos(base.id_at(g[p])) for p in range(base.size)]
        for (ridx, tuple_to_class, cidx) in new_specs:
            rel = spec.relations[ridx]
            sample = rel.classes[cidx][0]
            moved = tuple(base.id_at(g[base.pos(x)]) for x in sample)
            images.append(class_index[(ridx, tuple_to_class[moved])])
        gens.append(images)

    system = LeveledClosureSystem(
        elements, max(max_level, base.max_level), OrbitClosure(spec.threshold),
        automorphisms=PermGroup(total, gens),
        universe_bound=universe_bound,
        name=(base.name or "base") + "-quotient",
    )
    if base.automorphisms.order == 1:
        system.notes["degenerate_closure"] = True
    return system


def build_trivial_acl_graph(adjacency, levels, labels=None, generators=None,
                            universe_bound=64):
    """Component-style trivial closure: each singleton closes to everything
    reachable along the (symmetric, irreflexive) adjacency, and closures of
    sets are unions of singleton closures.  Optional generators (image
    arrays over ids in ascending order) must permute components and
    preserve levels; validation checks both."""
    levels = dict(levels)
    neighbors = {eid: set() for eid in levels}
    for (i, j) in adjacency:
        if i == j:
            raise SpecFormatError("adjacency must be irreflexive")
        if i not in levels or j not in levels:
            raise SpecFormatError(f"edge ({i},{j}) mentions an unknown id")
        neighbors[i].add(j)
        neighbors[j].add(i)
    labels = labels or {}
    elements = [Element(eid, lvl, labels.get(eid)) for eid, lvl in sorted(levels.items())]
    max_level = max(levels.values()) if levels else 0
    rules = [([eid], sorted(nbrs)) for eid, nbrs in sorted(neighbors.items()) if nbrs]
    ids_sorted = [e.id for e in elements]
    pos_of = {eid: k for k, eid in enumerate(ids_sorted)}
    group = None
    if generators:
        group = PermGroup(len(elements),
                          [[pos_of[i] for i in g] for g in generators])
    system = LeveledClosureSystem(
        elements, max_level, rules_from_ids(rules, elements),
        automorphisms=group,
        universe_bound=universe_bound, name="trivial-graph",
        notes={"trivial_closure": True},
    )
    # soft elimination holds when every component with an imaginary has a real
    comp_ok = True
    for e in elements:
        if e.level > 0:
            comp = system.close(1 << system.pos(e.id))
            if not any(system.levels[p] == 0 for p in _bits(comp)):
                comp_ok = False
                break
    system.notes["soft_ei"] = comp_ok
    return system


def _bits(mask):
    from .bitset import iter_bits

    return iter_bits(mask)


def rules_from_ids(rules_by_id, elements):
    """Rules given over ids rather than positions."""
    pos = {e.id: k for k, e in enumerate(sorted(elements, key=lambda e: e.id))}
    return RulesClosure(
        [([pos[i] for i in premise], [pos[j] for j in add]) for premise, add in rules_by_id]
    )


def build_identity_system(size, with_group=True, universe_bound=64):
    """Identity closure on `size` reals; full symmetric group when asked."""
    elements = [Element(i, 0, _letter_label(i)) for i in range(size)]
    group = None
    if with_group and size >= 2:
        swap = list(range(size))
        swap[0], swap[1] = 1, 0
        cyc = [(i + 1) % size for i in range(size)]
        group = PermGroup(size, [swap, cyc])
    return LeveledClosureSystem(elements, 0, RulesClosure([]), automorphisms=group,
                                universe_bound=universe_bound, name=f"identity-{size}",
                                notes={"trivial_closure": True, "soft_ei": True})


def build_linear_span_gf2(dim=3, universe_bound=64):
    """Nonzero vectors of GF(2)^dim with linear-span closure (ids are the
    vectors themselves, so ids are deliberately non-contiguous); the
    automorphism group is generated by a transvection and a basis cycle."""
    n_vec = (1 << dim) - 1
    if n_vec > universe_bound:
        raise UniverseTooLarge(f"{n_vec} elements exceed the bound {universe_bound}")
    ids = list(range(1, n_vec + 1))
    elements = [Element(v, 0, f"v{v}") for v in ids]
    rules = []
    for i in ids:
        for j in ids:
            if i < j:
                rules.append(([i, j], [i ^ j]))

    def mat_apply(mat, v):
        out = 0
        for row in range(dim):
            acc = 0
            for col in range(dim):
                acc ^= ((v >> col) & 1) & mat[row][col]
            out |= acc << row
        return out

    transvection = [[1 if r == c else 0 for c in range(dim)] for r in range(dim)]
    transvection[0][1] = 1
    cycle = [[1 if c == (r + 1) % dim else 0 for c in range(dim)] for r in range(dim)]
    gens = []
    for mat in (transvection, cycle):
        images = [mat_apply(mat, v) for v in ids]
        gens.append([images[k] - 1 for k in range(n_vec)])

    return LeveledClosureSystem(
        elements, 0, rules_from_ids(rules, elements),
        automorphisms=PermGroup(n_vec, gens),
        universe_bound=universe_bound, name=f"gf2-span-{dim}",
        notes={"soft_ei": True},
    )


def build_nonexchange_pairs(universe_bound=64):
    """Five reals u,v,w,z,x: any two of {u,v,w,z} close to all four, and x
    pairs with u or v to produce the other.  Exchange fails (x is spent
    producing v from u but is not recoverable), and symmetry of
    0-independence visibly breaks."""
    labels = "uvwzx"
    elements = [Element(i, 0, labels[i]) for i in range(5)]
    quad = [0, 1, 2, 3]
    rules = [([i, j], quad) for i in quad for j in quad if i < j]
    rules += [([4, 0], [1]), ([4, 1], [0])]
    return LeveledClosureSystem(elements, 0, RulesClosure(rules),
                                universe_bound=universe_bound,
                                name="nonexchange-pairs",
                                notes={"exchange_fails": True})


# ---- fuzzer -----------------------------------------------------------------

_FUZZ_CONFIG_KEYS = {"seed", "universeSize", "trials", "inject",
                     "cSizeMax", "kMax", "setSize", "maxFindingsPerTrial"}


@dataclass
class Finding:
    trial: int
    trial_seed: list
    injected: bool
    kind: str
    witness: dict
    system: dict

    def to_dict(self):
        return {
            "trial": self.trial,
            "trialSeed": self.trial_seed,
            "injected": self.injected,
            "kind": self.kind,
            "witness": self.witness,
            "system": self.system,
        }


@dataclass
class FuzzCase:
    seed: int
    config: dict
    trials: int
    findings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "seed": self.seed,
            "config": self.config,
            "trials": self.trials,
            "findings": [f.to_dict() for f in self.findings],
        }


def _normalize_fuzz_config(config):
    unknown = set(config) - _FUZZ_CONFIG_KEYS
    if unknown:
        raise SpecFormatError(f"unknown fuzz config fields: {sorted(unknown)}")
    if "seed" not in config:
        raise SpecFormatError("fuzz config needs a seed")
    out = {
        "seed": int(config["seed"]),
        "universeSize": int(config.get("universeSize", 8)),
        "trials": int(config.get("trials", 10)),
        "cSizeMax": int(config.get("cSizeMax", 1)),
        "kMax": int(config.get("kMax", 3)),
        "setSize": int(config.get("setSize", 2)),
        "maxFindingsPerTrial": int(config.get("maxFindingsPerTrial", 2)),
    }
    if "inject" in config:
        out["inject"] = list(config["inject"])
    return out


def _random_system(rng, universe_size):
    n = int(rng.integers(4, universe_size + 1))
    max_level = int(rng.integers(0, 2))
    levels = [0] + [int(rng.integers(0, max_level + 1)) for _ in range(n - 1)]
    elements = [Element(i, levels[i], _letter_label(i)) for i in range(n)]
    rules = []
    for i in range(n):
        if rng.random() < 0.35:
            k = int(rng.integers(1, 3))
            adds = sorted(set(int(x) for x in rng.choice(n, size=k, replace=False)) - {i})
            if adds:
                rules.append(([i], adds))
    for _ in range(int(rng.integers(1, n + 1))):
        pair = sorted(int(x) for x in rng.choice(n, size=2, replace=False))
        k = int(rng.integers(1, 3))
        adds = sorted(set(int(x) for x in rng.choice(n, size=k, replace=False)) - set(pair))
        if adds:
            rules.append((pair, adds))
    return LeveledClosureSystem(elements, max(levels), RulesClosure(rules))


def restrict_system(system, keep_ids):
    """Subsystem on kept ids: surviving generation rules only, no group."""
    keep = set(keep_ids)
    elements = [e for e in system.elements if e.id in keep]
    if not elements:
        raise SpecFormatError("cannot restrict to an empty universe")
    if system.closure.kind != "rules":
        raise SpecFormatError("only rules systems can be restricted")
    pos_keep = {system.pos(eid) for eid in keep}
    rules = []
    for premise, add in system.closure.rules:
        from .bitset import iter_bits

        p_bits = list(iter_bits(premise))
        if not set(p_bits) <= pos_keep:
            continue
        a_bits = [b for b in iter_bits(add) if b in pos_keep]
        if a_bits:
            rules.append(([system.id_at(b) for b in p_bits],
                          [system.id_at(b) for b in a_bits]))
    return LeveledClosureSystem(
        elements, system.max_level, rules_from_ids(rules, elements),
        name=(system.name or "system") + "-restricted",
    )


def _replay_symmetry(system, witness):
    try:
        fwd = indep(system, witness["A"], witness["B"], witness["C"], witness["n"],
                    certificates=False).independent
        bwd = indep(system, witness["B"], witness["A"], witness["C"], witness["n"],
                    certificates=False).independent
    except Exception:
        return False
    return (not fwd) and bwd


def replay_finding(system, kind, witness):
    """Re-check a recorded finding against a system."""
    if kind == "exchange":
        return replay_exchange_witness(system, ExchangeWitness.from_dict(witness))
    if kind == "symmetry":
        return _replay_symmetry(system, witness)
    raise SpecFormatError(f"unknown finding kind {kind!r}")


def _shrink(system, kind, witness):
    """Greedy witness shrinking: drop spectator elements (highest level,
    then highest id, first), then shrink the parameter set, then the tuple
    middle; every step must keep the finding replaying."""
    pinned_keys = ("C", "tuple") if kind == "exchange" else ("A", "B", "C")
    current = system
    wit = dict(witness)

    changed = True
    while changed:
        changed = False
        pinned = set()
        for key in pinned_keys:
            pinned.update(wit[key])
        order = sorted((e for e in current.elements if e.id not in pinned),
                       key=lambda e: (-e.level, -e.id))
        for e in order:
            keep = [x.id for x in current.elements if x.id != e.id]
            try:
                candidate = restrict_system(current, keep)
            except SpecFormatError:
                continue
            if replay_finding(candidate, kind, wit):
                current = candidate
                changed = True
        for key in (("C",) if kind == "exchange" else ("C", "A", "B")):
            for x in sorted(wit[key], reverse=True):
                trial = dict(wit)
                trial[key] = [y for y in wit[key] if y != x]
                if (kind == "symmetry" and not trial[key] and key in ("A", "B")):
                    continue
                if replay_finding(current, kind, trial):
                    wit = trial
                    changed = True
        if kind == "exchange" and len(wit["tuple"]) > 2:
            for x in wit["tuple"][1:-1]:
                trial = dict(wit)
                trial["tuple"] = [y for y in wit["tuple"] if y != x]
                if replay_finding(current, kind, trial):
                    wit = trial
                    changed = True
    return current, wit


def _analyze_trial(system, cfg):
    findings = []
    cap = cfg["maxFindingsPerTrial"]
    from .bitset import subsets_upto

    for n in range(system.max_level + 1):
        witness = None
        for c_mask in subsets_upto(system.universe_mask, cfg["cSizeMax"]):
            witness = check_exchange(system, system.mask_to_ids(c_mask), n,
                                     k_max=cfg["kMax"])
            if witness is not None:
                break
        if witness is not None:
            findings.append(("exchange", witness.to_dict()))
        if len(findings) >= cap:
            return findings
        sampler = Sampler(system, set_size=cfg["setSize"], levels=[n], seed=cfg["seed"])
        from .indep import suite_symmetry

        report = suite_symmetry(system, sampler, n, exchange_passed=False)
        for w in report.witnesses[:1]:
            findings.append(("symmetry", w))
            if len(findings) >= cap:
                return findings
    return findings


def fuzz_counterexamples(config) -> FuzzCase:
    """Generate random valid closure systems, hunt for exchange and
    symmetry failures, shrink each finding to a locally minimal witness,
    and package everything for archival replay.  Identical seed and
    config always reproduce identical bytes."""
    cfg = _normalize_fuzz_config(config)
    case = FuzzCase(cfg["seed"], dict(cfg), trials=cfg["trials"])

    jobs = []
    trial_no = 0
    for spec in cfg.get("inject", []):
        jobs.append((trial_no, None, system_from_spec(spec)))
        trial_no += 1
    for t in range(cfg["trials"]):
        seq = np.random.SeedSequence([cfg["seed"], t])
        rng = np.random.default_rng(seq)
        system = _random_system(rng, cfg["universeSize"])
        report = validate(system)
        if not report.ok:  # pragma: no cover - generated closures are always valid
            continue
        jobs.append((trial_no, [cfg["seed"], t], system))
        trial_no += 1

    for trial, trial_seed, system in jobs:
        for kind, witness in _analyze_trial(system, cfg):
            shrunk_system, shrunk_witness = _shrink(system, kind, witness)
            case.findings.append(Finding(
                trial=trial,
                trial_seed=trial_seed,
                injected=trial_seed is None,
                kind=kind,
                witness=shrunk_witness,
                system=system_to_spec(shrunk_system),
            ))
    return case


def fuzzcase_from_dict(data) -> FuzzCase:
    keys = {"seed", "config", "trials", "findings"}
    if not isinstance(data, dict) or set(data) != keys:
        raise SpecFormatError("malformed fuzz case")
    case = FuzzCase(int(data["seed"]), dict(data["config"]), int(data["trials"]))
    for f in data["findings"]:
        fkeys = {"trial", "trialSeed", "injected", "kind", "witness", "system"}
        if set(f) != fkeys:
            raise SpecFormatError("malformed fuzz finding")
        case.findings.append(Finding(f["trial"], f["trialSeed"], f["injected"],
                                     f["kind"], f["witness"], f["system"]))
    return case
