"""n-independence and the axiom verification suites.

A is n-independent from B over C when every finite subset A' of A keeps
its level-n rank when B joins the base: rk^n(A'/BC) = rk^n(A'/C).  On
finite instances the subset quantifier is evaluated exactly (up to a
configurable size bound); on exchange-verified systems it provably
collapses to A itself and the suites use that fast path.

The suites check the independence-relation axioms.  Monotonicity,
transitivity, finite character and locality hold unconditionally on valid
systems, so any failure there is reported as a bug with a witness.
Symmetry is conditional: on exchange-verified systems a failure is a hard
error; on exchange-violating systems failures are collected as findings.
"""

from dataclasses import dataclass, field
from typing import Optional

from .bitset import mask_of, popcount, submasks, subsets_upto
from .config import search_budget
from .errors import NoGroup, NotSoftEI, TheoremContradiction
from .pregeom import exchange_status
from .rank import _engine, rank_by_sequences, rank_value


@dataclass(frozen=True)
class IndependenceQuery:
    A: frozenset
    B: frozenset
    C: frozenset
    n: int

    @classmethod
    def of(cls, A, B, C, n):
        return cls(frozenset(A), frozenset(B), frozenset(C), int(n))


@dataclass
class IndepResult:
    independent: bool
    value_over_base: int
    value_over_both: int
    cert_over_base: object = None
    cert_over_both: object = None
    collapse_witness: Optional[dict] = None

    def to_dict(self):
        out = {
            "independent": self.independent,
            "rankOverBase": self.value_over_base,
            "rankOverBoth": self.value_over_both,
        }
        if self.cert_over_base is not None:
            out["certificateOverBase"] = self.cert_over_base.to_dict()
            out["certificateOverBoth"] = self.cert_over_both.to_dict()
        if self.collapse_witness is not None:
            out["subsetCollapseViolation"] = self.collapse_witness
        return out


@dataclass
class AxiomReport:
    axiom: str
    outcome: str  # pass | fail | not-witnessed
    checked: int = 0
    witnesses: list = field(default_factory=list)
    seed: Optional[int] = None

    MAX_WITNESSES_IN_REPORT = 25

    def to_dict(self):
        cap = self.MAX_WITNESSES_IN_REPORT
        return {
            "axiom": self.axiom,
            "outcome": self.outcome,
            "checked": self.checked,
            "witnesses": self.witnesses[:cap],
            "witnessesTotal": len(self.witnesses),
            "seed": self.seed,
        }


# ---- core verdict -----------------------------------------------------------

SUBSET_EXACT_BOUND = 4


class _IndepEngine:
    """Mask-level verdicts with per-system flat rank memos shared by suites.

    Every verdict reduces to comparisons of chain ranks at closed base
    states, so the hot path is a dictionary of (level-n closure of A,
    closed state) -> rank.
    """

    def __init__(self, system):
        self.system = system
        self.rank_engine = _engine(system)
        self.flat = {}

    def rank_fn(self, n, limit):
        """Flat (acl_a, state) -> rank lookup bound to one level."""
        eng = self.rank_engine
        flat = self.flat.setdefault(n, {})
        seq_value = eng.seq_value

        def rv(acl_a, state):
            key = (acl_a, state)
            v = flat.get(key)
            if v is None:
                v = flat[key] = seq_value(acl_a, state, n, limit)
            return v

        return rv

    def acl_family(self, n, a_mask, subs):
        """Level-n closures of A and (when subs) of all its subsets."""
        system = self.system
        lvl = system.level_mask(n)
        if not subs:
            return (system.close(a_mask) & lvl,)
        return tuple(system.close(s) & lvl for s in submasks(a_mask))

    def atomic(self, n, acl_a, st_base, st_both, limit):
        rv = self.rank_fn(n, limit)
        return rv(acl_a, st_both) == rv(acl_a, st_base)

    def verdict(self, n, a_mask, b_mask, c_mask, limit, subsets=True):
        """Independence of A from B over C at level n (full subset quantifier
        when subsets=True, A-only fast path otherwise)."""
        system = self.system
        st_base = system.close(c_mask)
        st_both = system.close(b_mask | c_mask)
        if st_base == st_both:
            return True
        rv = self.rank_fn(n, limit)
        for acl_sub in self.acl_family(n, a_mask, subsets):
            if rv(acl_sub, st_both) != rv(acl_sub, st_base):
                return False
        return True


def _indep_engine(system) -> _IndepEngine:
    eng = system._scratch.get("indep")
    if eng is None:
        eng = system._scratch["indep"] = _IndepEngine(system)
    return eng


def indep(system, A, B, C, n, subset_bound=SUBSET_EXACT_BOUND, certificates=True,
          budget=None) -> IndepResult:
    """Evaluate A independent-from B over C at level n, with certificates.

    The verdict follows the finite-subset definition exactly whenever
    |A| <= subset_bound; beyond the bound only A itself is tested (the
    subsets are then implied on exchange-verified systems).  When the
    A-only rank equality holds but a proper subset drops rank, the
    returned result carries that subset as a collapse witness and the
    verdict is False.
    """
    A = frozenset(A)
    B = frozenset(B)
    C = frozenset(C)
    eng = _indep_engine(system)
    limit = [eng.rank_engine.nodes + search_budget(budget)]
    a_mask = system.ids_to_mask(A)
    b_mask = system.ids_to_mask(B)
    c_mask = system.ids_to_mask(C)
    value_base = rank_value(system, A, C, n, budget)
    value_both = rank_value(system, A, B | C, n, budget)
    atomic_ok = value_base == value_both

    collapse = None
    verdict = atomic_ok
    if popcount(a_mask) <= subset_bound:
        st_base = system.close(c_mask)
        st_both = system.close(b_mask | c_mask)
        lvl = system.level_mask(n)
        for sub in submasks(a_mask):
            if sub == a_mask:
                continue
            acl_sub = system.close(sub) & lvl
            if not eng.atomic(n, acl_sub, st_base, st_both, limit):
                verdict = False
                if atomic_ok and collapse is None:
                    collapse = {"subset": system.mask_to_id_list(sub)}
                break

    result = IndepResult(verdict, value_base, value_both, collapse_witness=collapse)
    if certificates:
        result.cert_over_base = rank_by_sequences(system, A, C, n, budget)
        result.cert_over_both = rank_by_sequences(system, A, B | C, n, budget)
    return result


# ---- suites -----------------------------------------------------------------


def _suite_context(system, sampler, need_subsets=None):
    eng = _indep_engine(system)
    limit = [eng.rank_engine.nodes + search_budget(None)]
    if need_subsets is None:
        need_subsets = {}
        for n in sampler.levels:
            passed, _ = exchange_status(system, n)
            need_subsets[n] = not passed
    return eng, limit, need_subsets


def _closure_chains(system, sampler):
    """Chains (B, C, D) deduplicated by their closure triple.

    Verdicts only depend on closed states, so one representative per
    closure class makes the scan exhaustive over the whole chain family.
    """
    close = system.close
    seen = set()
    out = []
    for (b, c, d) in sampler.chain_masks():
        key = (close(b), close(c), close(d))
        if key not in seen:
            seen.add(key)
            out.append((b, c, d) + key)
    return out


def suite_monotonicity(system, sampler) -> AxiomReport:
    """B <= C <= D and A indep of D over B force both intermediate verdicts."""
    eng, limit, need_subsets = _suite_context(system, sampler)
    report = AxiomReport("monotonicity", "pass", seed=sampler.seed)
    sets = sampler.set_masks()
    chains = _closure_chains(system, sampler)
    for n in sampler.levels:
        subs = need_subsets[n]
        rv = eng.rank_fn(n, limit)
        for a_mask in sets:
            acls = eng.acl_family(n, a_mask, subs)
            for (b, c, d, stb, stc, std) in chains:
                report.checked += 1
                if any(rv(a, stb) != rv(a, std) for a in acls):
                    continue
                if any(rv(a, stb) != rv(a, stc) or rv(a, stc) != rv(a, std)
                       for a in acls):
                    report.outcome = "fail"
                    report.witnesses.append({
                        "A": system.mask_to_id_list(a_mask),
                        "B": system.mask_to_id_list(b),
                        "C": system.mask_to_id_list(c),
                        "D": system.mask_to_id_list(d),
                        "n": n,
                    })
    return report


def suite_transitivity(system, sampler) -> AxiomReport:
    """A indep of D over B iff indep of C over B and of D over C (B<=C<=D)."""
    eng, limit, need_subsets = _suite_context(system, sampler)
    report = AxiomReport("transitivity", "pass", seed=sampler.seed)
    sets = sampler.set_masks()
    chains = _closure_chains(system, sampler)
    for n in sampler.levels:
        subs = need_subsets[n]
        rv = eng.rank_fn(n, limit)
        for a_mask in sets:
            acls = eng.acl_family(n, a_mask, subs)
            for (b, c, d, stb, stc, std) in chains:
                report.checked += 1
                whole = all(rv(a, stb) == rv(a, std) for a in acls)
                parts = (all(rv(a, stb) == rv(a, stc) for a in acls)
                         and all(rv(a, stc) == rv(a, std) for a in acls))
                if whole != parts:
                    report.outcome = "fail"
                    report.witnesses.append({
                        "A": system.mask_to_id_list(a_mask),
                        "B": system.mask_to_id_list(b),
                        "C": system.mask_to_id_list(c),
                        "D": system.mask_to_id_list(d),
                        "n": n,
                    })
    return report


def suite_finite_character(system, sampler) -> AxiomReport:
    """Dependence localizes to a finite (here: minimal) sub-side B'.

    Both directions are exercised: a failing verdict must persist on some
    minimal B' <= B, and a passing verdict must pass on every B' <= B.
    """
    eng, limit, need_subsets = _suite_context(system, sampler)
    report = AxiomReport("finite-character", "pass", seed=sampler.seed)
    sets = sampler.set_masks()
    close = system.close
    for n in sampler.levels:
        subs = need_subsets[n]
        rv = eng.rank_fn(n, limit)
        for a_mask in sets:
            acls = eng.acl_family(n, a_mask, subs)
            for c_mask in sampler.base_masks():
                st_c = close(c_mask)
                seen_sides = set()
                for b_mask in sets:
                    st_bc = close(b_mask | c_mask)
                    if st_bc in seen_sides:
                        continue
                    seen_sides.add(st_bc)
                    report.checked += 1
                    whole = all(rv(a, st_bc) == rv(a, st_c) for a in acls)
                    bad = None
                    for s in subsets_upto(b_mask, popcount(b_mask)):
                        st_sc = close(s | c_mask)
                        sub_ok = all(rv(a, st_sc) == rv(a, st_c) for a in acls)
                        if whole and not sub_ok:
                            bad = ("pass-not-hereditary", s)
                            break
                        if not whole and not sub_ok:
                            bad = None  # minimal failing B' found: the law holds
                            break
                    else:
                        if not whole:  # pragma: no cover - B itself fails
                            bad = ("no-finite-witness", b_mask)
                    if bad:
                        report.outcome = "fail"
                        report.witnesses.append({
                            "A": system.mask_to_id_list(a_mask),
                            "B": system.mask_to_id_list(b_mask),
                            "Bprime": system.mask_to_id_list(bad[1]),
                            "C": system.mask_to_id_list(c_mask),
                            "n": n, "kind": bad[0],
                        })
    return report


def suite_locality(system, sampler) -> AxiomReport:
    """For finite A there is a minimal C <= B with A indep of B over C."""
    eng, limit, need_subsets = _suite_context(system, sampler)
    report = AxiomReport("local-character", "pass", seed=sampler.seed)
    sets = sampler.set_masks()
    close = system.close
    for n in sampler.levels:
        subs = need_subsets[n]
        rv = eng.rank_fn(n, limit)
        for a_mask in sets:
            acls = eng.acl_family(n, a_mask, subs)
            for b_mask in sets:
                report.checked += 1
                st_b = close(b_mask)
                minimal = None
                for s in subsets_upto(b_mask, popcount(b_mask)):
                    st_s = close(s)
                    if all(rv(a, st_b) == rv(a, st_s) for a in acls):
                        minimal = s
                        break
                if minimal is None:  # pragma: no cover - C = B always works
                    report.outcome = "fail"
                    report.witnesses.append({
                        "A": system.mask_to_id_list(a_mask),
                        "B": system.mask_to_id_list(b_mask),
                        "n": n,
                    })
    return report


def suite_invariance(system, sampler) -> AxiomReport:
    """Verdicts are preserved by automorphisms (finite-scale elementary maps).

    Queries are sampled (deterministically, seed recorded): invariance is
    unconditional, so a spread sample over the triple space is a bug hunt,
    not a completeness claim.
    """
    group = system.automorphisms
    if group is None:
        raise NoGroup("invariance suite needs an automorphism group")
    eng, limit, need_subsets = _suite_context(system, sampler)
    report = AxiomReport("invariance", "pass", seed=sampler.seed)
    sets = sampler.set_masks()
    perms = sampler.automorphisms()
    total = len(sets) ** 3
    picks = _spread_indices(total, sampler.invariance_samples, sampler.seed)
    for n in sampler.levels:
        subs = need_subsets[n]
        for flat in picks:
            ij, k = divmod(flat, len(sets))
            i, j = divmod(ij, len(sets))
            a_mask, b_mask, c_mask = sets[i], sets[j], sets[k]
            base = eng.verdict(n, a_mask, b_mask, c_mask, limit, subs)
            for perm in perms:
                report.checked += 1
                moved = eng.verdict(
                    n,
                    group.act_mask(perm, a_mask),
                    group.act_mask(perm, b_mask),
                    group.act_mask(perm, c_mask),
                    limit, subs,
                )
                if moved != base:
                    report.outcome = "fail"
                    report.witnesses.append({
                        "A": system.mask_to_id_list(a_mask),
                        "B": system.mask_to_id_list(b_mask),
                        "C": system.mask_to_id_list(c_mask),
                        "n": n,
                    })
    return report


def _spread_indices(total, count, seed):
    if total <= count:
        return range(total)
    import numpy as np

    rng = np.random.default_rng(seed)
    start = int(rng.integers(0, total))
    step = total / count
    return sorted({(start + int(i * step)) % total for i in range(count)})


def suite_extension(system, sampler, tuple_length=1) -> AxiomReport:
    """Search the orbit of a tuple over B for a copy independent from C.

    Never fails: instances with no qualifying orbit member are recorded
    as not-witnessed (a finite-scale approximation gap, logged).
    """
    group = system.automorphisms
    if group is None:
        raise NoGroup("extension suite needs an automorphism group")
    eng, limit, need_subsets = _suite_context(system, sampler)
    report = AxiomReport("extension", "pass", seed=sampler.seed)
    sets = sampler.set_masks()
    extensions = sampler.small_masks(sampler.extension_size)
    unwitnessed = 0
    for n in sampler.levels:
        subs = need_subsets[n]
        pool = system.level_mask(n)
        tuples = sampler.tuples_from_pool(pool, tuple_length)
        for tup in tuples:
            for b_mask in sets:
                stab = group.pointwise_stabilizer(b_mask)
                for e_mask in extensions:
                    c_mask = b_mask | e_mask
                    report.checked += 1
                    found = False
                    orbit = sorted({tuple(int(g[p]) for p in tup) for g in stab})
                    for cand in orbit:
                        if eng.verdict(n, mask_of(cand), c_mask, b_mask, limit, subs):
                            found = True
                            break
                    if not found:
                        unwitnessed += 1
                        report.witnesses.append({
                            "tuple": [system.id_at(p) for p in tup],
                            "B": system.mask_to_id_list(b_mask),
                            "C": system.mask_to_id_list(c_mask),
                            "n": n, "kind": "not-witnessed",
                        })
    if unwitnessed:
        report.outcome = "not-witnessed"
    return report


def suite_symmetry(system, sampler, n, exchange_passed=None) -> AxiomReport:
    """Dependence of A on B (B inside level n) must reflect to B on A.

    On exchange-verified systems a failure contradicts a theorem and is
    raised as TheoremContradiction; on exchange-violating systems failures
    are legitimate findings and land in the report.
    """
    eng, limit, _ = _suite_context(system, sampler, need_subsets={})
    if exchange_passed is None:
        exchange_passed, _w = exchange_status(system, n)
    subs = not exchange_passed
    report = AxiomReport("symmetry", "pass", seed=sampler.seed)
    sets = sampler.set_masks()
    lvl = system.level_mask(n)
    close = system.close
    rv = eng.rank_fn(n, limit)
    side_sets = []
    seen = set()
    for b_raw in sets:
        b_mask = b_raw & lvl
        if b_mask not in seen:
            seen.add(b_mask)
            side_sets.append(b_mask)
    bases = sampler.base_masks()
    for a_mask in sets:
        acl_a_fam = eng.acl_family(n, a_mask, subs)
        for b_mask in side_sets:
            acl_b_fam = eng.acl_family(n, b_mask, subs)
            for c_mask in bases:
                report.checked += 1
                st_c = close(c_mask)
                st_bc = close(b_mask | c_mask)
                st_ac = close(a_mask | c_mask)
                forward = all(rv(a, st_bc) == rv(a, st_c) for a in acl_a_fam)
                if forward:
                    continue
                backward = all(rv(b, st_ac) == rv(b, st_c) for b in acl_b_fam)
                if backward:
                    witness = {
                        "A": system.mask_to_id_list(a_mask),
                        "B": system.mask_to_id_list(b_mask),
                        "C": system.mask_to_id_list(c_mask),
                        "n": n,
                    }
                    if exchange_passed:
                        raise TheoremContradiction(
                            witness, "symmetry failed on an exchange-verified system"
                        )
                    report.outcome = "fail"
                    report.witnesses.append(witness)
    return report


# ---- soft elimination of imaginaries ----------------------------------------


def verify_soft_ei(system, tuple_size_bound=3):
    """Exhaustively search, per element, a real tuple with the same closure.

    Returns (ok, witnesses, failing) where witnesses maps element ids to
    the witnessing real tuple and failing is the first element with none.
    """
    reals = system.level_mask(0)
    witnesses = {}
    for p in range(system.size):
        target = system.close(1 << p)
        found = None
        if system.levels[p] == 0:
            found = [system.id_at(p)]
        else:
            for cand in subsets_upto(reals, tuple_size_bound):
                if system.close(cand) == target:
                    found = system.mask_to_id_list(cand)
                    break
        if found is None:
            return False, witnesses, system.id_at(p)
        witnesses[system.id_at(p)] = found
    return True, witnesses, None


def softei_collapse_check(system, sampler, tuple_size_bound=3) -> AxiomReport:
    """On softly-imaginary-eliminating systems every level's independence
    verdict equals the level-0 verdict; raises NotSoftEI when the flag
    verification fails."""
    ok, _wit, failing = verify_soft_ei(system, tuple_size_bound)
    if not ok:
        raise NotSoftEI(failing)
    eng, limit, need_subsets = _suite_context(system, sampler)
    report = AxiomReport("soft-ei-collapse", "pass", seed=sampler.seed)
    sets = sampler.set_masks()
    for a_mask in sets:
        for b_mask in sets:
            for c_mask in sampler.base_masks():
                base = eng.verdict(0, a_mask, b_mask, c_mask, limit, need_subsets.get(0, True))
                for n in sampler.levels:
                    if n == 0:
                        continue
                    report.checked += 1
                    if eng.verdict(n, a_mask, b_mask, c_mask, limit,
                                   need_subsets.get(n, True)) != base:
                        report.outcome = "fail"
                        report.witnesses.append({
                            "A": system.mask_to_id_list(a_mask),
                            "B": system.mask_to_id_list(b_mask),
                            "C": system.mask_to_id_list(c_mask),
                            "n": n,
                        })
    return report
