"""Finite-scale strong/thorn dividing probes.

A definable family stands in for a parametrized formula: a set of
parameter tuples closed under a stabilizer subgroup, plus the solution
set (fiber) of each parameter.  Strong dividing over C asks that the
parameter's orbit over C be large (a nonalgebraicity stand-in with an
explicit threshold) while any k fibers across the orbit have empty
intersection; thorn dividing allows extending C by a bounded tuple first.
"""

from itertools import combinations

from .bitset import subsets_upto
from .config import search_budget
from .errors import (
    NoGroup,
    ParameterUnknown,
    SearchBudgetExceeded,
    SpecFormatError,
    TheoremContradiction,
)
from .indep import AxiomReport, indep
from .pregeom import exchange_status


class DefinableFamily:
    """Parameter-indexed family of subsets with a group-equivariance contract."""

    def __init__(self, system, stabilizer_of, parameters, fibers):
        if system.automorphisms is None:
            raise NoGroup("definable families need an automorphism group")
        self.system = system
        self.stabilizer_of = frozenset(stabilizer_of)
        self.parameters = [tuple(p) for p in parameters]
        if len(set(self.parameters)) != len(self.parameters):
            raise SpecFormatError("duplicate parameter tuples")
        self.fibers = {tuple(k): frozenset(v) for k, v in fibers.items()}
        if set(self.fibers) != set(self.parameters):
            raise SpecFormatError("fibers must cover exactly the parameter tuples")
        self._validate_equivariance()

    def _validate_equivariance(self):
        system = self.system
        group = system.automorphisms
        stab = group.pointwise_stabilizer(system.ids_to_mask(self.stabilizer_of))
        params = set(self.parameters)
        for g in stab:
            for p in self.parameters:
                moved = tuple(system.id_at(g[system.pos(x)]) for x in p)
                if moved not in params:
                    raise SpecFormatError(
                        f"parameter orbit not closed: {p} maps outside the family"
                    )
                moved_fiber = frozenset(
                    system.id_at(g[system.pos(x)]) for x in self.fibers[p]
                )
                if moved_fiber != self.fibers[moved]:
                    raise SpecFormatError(
                        f"family is not equivariant at parameter {p}"
                    )

    def fiber(self, param):
        param = tuple(param)
        if param not in self.fibers:
            raise ParameterUnknown(f"unknown parameter tuple {param}")
        return self.fibers[param]

    def to_spec(self):
        return {
            "stabilizerOf": sorted(self.stabilizer_of),
            "parameters": [list(p) for p in self.parameters],
            "fibers": {",".join(map(str, k)): sorted(v) for k, v in self.fibers.items()},
        }

    @classmethod
    def from_spec(cls, system, spec):
        keys = {"stabilizerOf", "parameters", "fibers"}
        if not isinstance(spec, dict) or set(spec) != keys:
            raise SpecFormatError("family spec needs exactly stabilizerOf/parameters/fibers")
        fibers = {}
        for key, ids in spec["fibers"].items():
            parts = tuple(int(x) for x in key.split(",")) if key else ()
            fibers[parts] = ids
        return cls(system, spec["stabilizerOf"], [tuple(p) for p in spec["parameters"]],
                   fibers)


def _orbit_over(system, fam, param, C):
    group = system.automorphisms
    if group is None:
        raise NoGroup("strong dividing needs an automorphism group")
    param = tuple(param)
    if param not in fam.fibers:
        raise ParameterUnknown(f"unknown parameter tuple {param}")
    stab_mask = system.ids_to_mask(C)
    positions = tuple(system.pos(x) for x in param)
    orbit = group.orbit_of_tuple(positions, stab_mask)
    out = []
    for tup in orbit:
        ids = tuple(system.id_at(p) for p in tup)
        if ids not in fam.fibers:
            raise ParameterUnknown(
                f"orbit member {ids} has no fiber; the family does not support this base"
            )
        out.append(ids)
    return out


def strongly_divides(system, fam, a, C, k, non_alg_threshold=None, budget=None):
    """Large parameter orbit over C with k-wise empty fiber intersections.

    The nonalgebraicity stand-in is explicit: the orbit of the parameter
    under the pointwise stabilizer of C must exceed the threshold
    (default |C| + 1).  k-inconsistency is checked over all k-element
    subsets of the orbit's fibers.
    """
    C = frozenset(C)
    orbit = _orbit_over(system, fam, a, C)
    threshold = len(C) + 1 if non_alg_threshold is None else non_alg_threshold
    if len(orbit) <= threshold:
        return False
    if k > len(orbit):
        return True  # fewer than k formulas exist, so k-wise inconsistency is vacuous
    limit = search_budget(budget)
    ticks = 0
    for chunk in combinations(orbit, k):
        ticks += 1
        if ticks > limit:
            raise SearchBudgetExceeded("k-inconsistency scan budget exhausted", nodes=ticks)
        if frozenset.intersection(*(fam.fiber(p) for p in chunk)):
            return False
    return True


def thorn_divides_bounded(system, fam, a, C, k, witness_bound,
                          non_alg_threshold=None, budget=None):
    """Strong dividing over C extended by some tuple of length <= bound.

    Exhaustive over extension sets in (size, lex) order, so the empty
    extension (plain strong dividing) is tried first; monotone in the
    bound by construction.
    """
    C = frozenset(C)
    for extra in subsets_upto(system.universe_mask, witness_bound):
        base = C | system.mask_to_ids(extra)
        try:
            if strongly_divides(system, fam, a, base, k,
                                non_alg_threshold=non_alg_threshold, budget=budget):
                return True
        except ParameterUnknown:
            continue
    return False


def strong_dividing_implies_acl(system, fam, c_sets, k, non_alg_threshold=None,
                                seed=None) -> AxiomReport:
    """Every strongly-dividing (x, b, C) with x in fiber(b) must put b inside
    cl(x union C) but outside cl(C).  Disagreements signal that the closure
    operator and the group/threshold picture drifted apart; they are
    reported as data, never fatal."""
    report = AxiomReport("strong-dividing-acl", "pass", seed=seed)
    for C in c_sets:
        C = frozenset(C)
        closed_c = system.close(system.ids_to_mask(C))
        for b in fam.parameters:
            try:
                if not strongly_divides(system, fam, b, C, k,
                                        non_alg_threshold=non_alg_threshold):
                    continue
            except ParameterUnknown:
                continue
            b_mask = system.ids_to_mask(b)
            for x in sorted(fam.fiber(b)):
                report.checked += 1
                with_x = system.close((1 << system.pos(x)) | system.ids_to_mask(C))
                inside = b_mask & ~with_x == 0
                outside = bool(b_mask & ~closed_c)
                if not (inside and outside):
                    report.outcome = "fail"
                    report.witnesses.append({
                        "x": x, "b": list(b), "C": sorted(C), "k": k,
                        "inClosureWithX": inside, "outsideClosureOfC": outside,
                    })
    return report


def dependence_bridge_check(system, sampler, n, exchange_passed=None) -> AxiomReport:
    """On exchange-verified systems, algebraicity of b over (a, C) beyond C
    forces dependence of a on b over C; a failure contradicts the symmetry
    theorem and is fatal."""
    if exchange_passed is None:
        exchange_passed, _ = exchange_status(system, n)
    if not exchange_passed:
        raise ValueError("dependence bridge check requires an exchange-verified level")
    report = AxiomReport("dependence-bridge", "pass", seed=sampler.seed)
    lvl = system.level_mask(n)
    singles = [p for p in range(system.size) if (lvl >> p) & 1]
    for c_mask in sampler.set_masks():
        closed_c = system.close(c_mask)
        for a in singles:
            closed_ac = system.close(c_mask | (1 << a))
            for b in singles:
                if b == a:
                    continue
                if not ((closed_ac >> b) & 1) or ((closed_c >> b) & 1):
                    continue
                report.checked += 1
                res = indep(system, {system.id_at(a)}, {system.id_at(b)},
                            system.mask_to_ids(c_mask), n, certificates=False)
                if res.independent:
                    witness = {
                        "a": system.id_at(a), "b": system.id_at(b),
                        "C": system.mask_to_id_list(c_mask), "n": n,
                    }
                    raise TheoremContradiction(
                        witness, "algebraic dependence did not force rank dependence"
                    )
    return report


def class_membership_family(system, class_level=1) -> DefinableFamily:
    """The membership family of an equivalence-example-style system: one
    parameter per class element, fiber = the reals whose closure contains
    that class element."""
    params = []
    fibers = {}
    for e in system.elements:
        if e.level != class_level:
            continue
        params.append((e.id,))
        members = []
        for r in system.elements:
            if r.level == 0 and (system.close(1 << system.pos(r.id))
                                 >> system.pos(e.id)) & 1:
                members.append(r.id)
        fibers[(e.id,)] = members
    return DefinableFamily(system, frozenset(), params, fibers)
