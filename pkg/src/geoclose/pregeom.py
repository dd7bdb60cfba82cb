"""Rank-1 slices and the exchange property.

For a base set C and level n, the carrier X collects every element of
level <= n whose singleton rank over C is exactly 1; the slice closure of
Y inside X is acl^n(Y union C) intersected with X.  When the exchange
property holds for the slice, (X, cl) is a pregeometry and bases and
dimension are well defined; the checks here are exhaustive and produce
replayable witnesses when exchange fails.
"""

from dataclasses import dataclass

from .bitset import iter_bits, mask_of, popcount, subsets_upto
from .config import search_budget
from .errors import (
    ExchangeViolation,
    NotInCarrier,
    SearchBudgetExceeded,
    SpecFormatError,
)
from . import rank as _rank


@dataclass(frozen=True)
class ExchangeWitness:
    """A replayable exchange failure.

    All tuple members have rank 1 over C at the given level; the last one
    is algebraic over the others union C but not over the middle ones
    union C, while the first is not algebraic over the rest union C.
    """

    C: tuple
    tuple: tuple
    level: int
    violation_kind: str = "exchange-fail"

    def to_dict(self):
        return {
            "C": sorted(self.C),
            "tuple": list(self.tuple),
            "level": self.level,
            "violationKind": self.violation_kind,
        }

    @classmethod
    def from_dict(cls, data):
        keys = {"C", "tuple", "level", "violationKind"}
        if not isinstance(data, dict) or set(data) - keys:
            raise SpecFormatError("malformed exchange witness")
        missing = keys - set(data)
        if missing:
            raise SpecFormatError(f"exchange witness missing fields: {sorted(missing)}")
        return cls(tuple(data["C"]), tuple(data["tuple"]), int(data["level"]),
                   data["violationKind"])


class Rank1Slice:
    """Materialized rank-1 slice with a memoized slice closure."""

    def __init__(self, system, base_ids, n, carrier_mask):
        self.system = system
        self.base = frozenset(base_ids)
        self.level = n
        self.base_mask = system.ids_to_mask(base_ids)
        self.carrier_mask = carrier_mask
        self._cl_memo = {}

    @property
    def carrier(self):
        return self.system.mask_to_ids(self.carrier_mask)

    def contains(self, ids):
        return self.system.ids_to_mask(ids) & ~self.carrier_mask == 0

    def cl_mask(self, sub_mask):
        """Slice closure of a carrier sub-mask."""
        hit = self._cl_memo.get(sub_mask)
        if hit is None:
            closed = self.system.acl_n_mask(self.base_mask | sub_mask, self.level)
            hit = self._cl_memo[sub_mask] = closed & self.carrier_mask
        return hit

    def cl(self, S):
        return self.system.mask_to_ids(self.cl_mask(self.system.ids_to_mask(S)))


def rank1_slice(system, C, n, budget=None) -> Rank1Slice:
    """Compute the slice carrier by per-element rank queries."""
    base_mask = system.ids_to_mask(C)
    state = system.close(base_mask)
    carrier = 0
    for p in iter_bits(system.level_mask(n) & ~state):
        acl_s = system.acl_n_mask(1 << p, n)
        if _rank._rank_value_masks(system, acl_s, state, n, budget) == 1:
            carrier |= 1 << p
    return Rank1Slice(system, frozenset(C), n, carrier)


def is_independent(slc: Rank1Slice, S) -> bool:
    """No member of S lies in the slice closure of the others."""
    s_mask = slc.system.ids_to_mask(S)
    if s_mask & ~slc.carrier_mask:
        raise NotInCarrier("set contains elements outside the slice carrier")
    for b in iter_bits(s_mask):
        if (1 << b) & slc.cl_mask(s_mask & ~(1 << b)):
            return False
    return True


def _independence_witness(slc: Rank1Slice, s_mask):
    """Turn a dependent set into an exchange witness, if one sits inside it."""
    system = slc.system
    for b in iter_bits(s_mask):
        rest = s_mask & ~(1 << b)
        if not (1 << b) & slc.cl_mask(rest):
            continue
        support = rest
        for x in iter_bits(rest):
            trimmed = support & ~(1 << x)
            if (1 << b) & slc.cl_mask(trimmed):
                support = trimmed
        # support is inclusion-minimal with b in its slice closure
        for c in iter_bits(support):
            middle = support & ~(1 << c)
            if not (1 << c) & slc.cl_mask(middle | (1 << b)):
                tup = (system.id_at(c),
                       *(system.id_at(p) for p in iter_bits(middle)),
                       system.id_at(b))
                return ExchangeWitness(tuple(sorted(slc.base)), tup, slc.level)
    return None


def find_basis(slc: Rank1Slice, A, tiebreak="asc"):
    """Greedy basis of A inside the slice.

    Post-verified: the result must span A, be independent, and agree in
    size with the reverse-order greedy basis; any failure downgrades the
    slice to non-exchange and raises ExchangeViolation with a witness.
    """
    a_mask = slc.system.ids_to_mask(A)
    if a_mask & ~slc.carrier_mask:
        raise NotInCarrier("basis requested for a set outside the slice carrier")

    def greedy(order):
        chosen = 0
        for p in order:
            if not (1 << p) & slc.cl_mask(chosen):
                chosen |= 1 << p
        return chosen

    order = list(iter_bits(a_mask))
    if tiebreak == "desc":
        order = order[::-1]
    basis = greedy(order)
    spans = a_mask & ~slc.cl_mask(basis) == 0
    reverse = greedy(order[::-1])
    independent = is_independent(slc, slc.system.mask_to_ids(basis))
    if not spans or not independent or popcount(reverse) != popcount(basis):
        witness = _independence_witness(slc, basis if not independent else reverse)
        if witness is None:
            witness = _slice_exchange_witness(slc)
        if witness is None:  # pragma: no cover - dependence implies a violation
            raise SearchBudgetExceeded("could not localize the exchange failure")
        raise ExchangeViolation(witness)
    return slc.system.mask_to_ids(basis)


def dimension(slc: Rank1Slice, A) -> int:
    return len(find_basis(slc, A))


def find_basis_oracle(slc: Rank1Slice, pool, candidate) -> bool:
    """Is `candidate` a basis of `pool` in the slice?  (Direct definition.)"""
    cand_mask = slc.system.ids_to_mask(candidate)
    pool_mask = slc.system.ids_to_mask(pool)
    if cand_mask & ~pool_mask:
        return False
    if pool_mask & ~slc.cl_mask(cand_mask):
        return False
    return is_independent(slc, candidate)


def _slice_exchange_witness(slc: Rank1Slice, max_support=None, budget=None):
    """Exhaustive exchange-axiom scan over one slice, smallest support first."""
    carrier = list(iter_bits(slc.carrier_mask))
    if max_support is None:
        max_support = max(len(carrier) - 2, 0)
    limit = search_budget(budget)
    ticks = 0
    for support_mask in subsets_upto(slc.carrier_mask, max_support):
        rest = slc.carrier_mask & ~support_mask
        closed_support = slc.cl_mask(support_mask)
        for c in iter_bits(rest):
            with_c = slc.cl_mask(support_mask | (1 << c))
            for b in iter_bits(rest & ~(1 << c)):
                ticks += 1
                if ticks > limit:
                    raise SearchBudgetExceeded("exchange scan budget exhausted", nodes=ticks)
                if (with_c >> b) & 1 and not (closed_support >> b) & 1:
                    if not (slc.cl_mask(support_mask | (1 << b)) >> c) & 1:
                        system = slc.system
                        tup = (system.id_at(c),
                               *(system.id_at(p) for p in iter_bits(support_mask)),
                               system.id_at(b))
                        return ExchangeWitness(tuple(sorted(slc.base)), tup, slc.level)
    return None


def check_exchange(system, C, n, k_max=4, budget=None):
    """Exhaustive exchange test over tuples of slice members up to length k_max.

    Returns None when the property holds (Passed) and the first violation
    in deterministic order otherwise.
    """
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    slc = rank1_slice(system, C, n, budget=budget)
    return _slice_exchange_witness(slc, max_support=k_max - 2, budget=budget)


def search_exchange_witness(system, C, n, budget=None):
    """Unbounded-support witness search over the slice of C (budgeted)."""
    slc = rank1_slice(system, C, n, budget=budget)
    return _slice_exchange_witness(slc, budget=budget)


def replay_exchange_witness(system, witness: ExchangeWitness) -> bool:
    """Re-check every condition of a recorded witness on a system."""
    n = witness.level
    if n > system.max_level:
        return False
    try:
        c_mask = system.ids_to_mask(witness.C)
        members = [system.pos(e) for e in witness.tuple]
    except Exception:
        return False
    if len(members) < 2 or len(set(members)) != len(members):
        return False
    state = system.close(c_mask)
    level_mask = system.level_mask(n)
    for p in members:
        if not (level_mask >> p) & 1:
            return False
        acl_s = system.acl_n_mask(1 << p, n)
        if _rank._rank_value_masks(system, acl_s, state, n) != 1:
            return False
    first, *middle, last = members
    mid_mask = mask_of(middle)
    head = system.close(c_mask | mid_mask | (1 << first))
    mid_only = system.close(c_mask | mid_mask)
    tail = system.close(c_mask | mid_mask | (1 << last))
    return bool((head >> last) & 1) and not ((mid_only >> last) & 1) \
        and not ((tail >> first) & 1)


def exchange_status(system, n, c_size_max=2, k_max=4, budget=None):
    """Scan all bases C up to c_size_max; cached per system and bounds.

    Returns (passed, witness): passed is True when every scanned slice
    satisfies exchange, otherwise the first witness is attached.
    """
    key = ("exchange", n, c_size_max, k_max)
    hit = system._scratch.get(key)
    if hit is None:
        witness = None
        for c_mask in subsets_upto(system.universe_mask, c_size_max):
            witness = check_exchange(system, system.mask_to_ids(c_mask), n,
                                     k_max=k_max, budget=budget)
            if witness is not None:
                break
        hit = system._scratch[key] = (witness is None, witness)
    return hit
