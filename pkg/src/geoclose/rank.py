"""Level-n rank computation.

Two independent routes compute rk^n(A/B):

* ``rank_by_sequences`` is the ground-truth oracle: an exhaustive,
  budgeted, memoized search for a longest sequence a_1..a_k inside the
  level-n closure of A such that each a_k lies outside the level-n closure
  of {a_1..a_{k-1}} union B.  It returns a replayable certificate.
* ``rank_recursive`` is the implementation under test: it follows the
  inductive shape of the rank definition, deciding "rank >= alpha" by a
  memoized ladder and returning the greatest alpha that holds.

Both recursions only ever consult closures of (B union prefix) sets, so
memo keys are (closure-of-A-at-level-n, full-closure-of-base) pairs; rank
provably depends on nothing else.  Sequence construction tie-breaks on
ascending element id so outputs are deterministic.
"""

from dataclasses import dataclass
from typing import Optional

from .bitset import iter_bits, mask_of, popcount
from .config import search_budget
from .errors import (
    ExchangeViolation,
    InvalidCertificate,
    NoGroup,
    SearchBudgetExceeded,
    TheoremContradiction,
)


@dataclass(frozen=True)
class RankQuery:
    """A rank question rk^n(A/B) over a system's universe."""

    A: frozenset
    B: frozenset
    n: int

    @classmethod
    def of(cls, A, B, n):
        return cls(frozenset(A), frozenset(B), int(n))


@dataclass(frozen=True)
class RankCertificate:
    """A rank value together with a witnessing independence chain.

    The witness a_1..a_value lives in the level-n closure of A and each
    a_k avoids the level-n closure of its predecessors union B, so the
    certificate replays as a proof of "rank >= value".
    """

    value: int
    witness: tuple

    def to_dict(self):
        return {"value": self.value, "witness": list(self.witness)}


@dataclass(frozen=True)
class CoordSequence:
    """A canonical coordinatization sequence with its core index sequence.

    Between consecutive core indices the elements form a basis of the
    rank-1 slice over everything before them; core indices always start
    at 0 and end at the sequence length.
    """

    elements: tuple
    core_indices: tuple

    def to_dict(self):
        return {
            "value": len(self.elements),
            "witness": list(self.elements),
            "coreIndices": list(self.core_indices),
        }


class _RankEngine:
    """Per-system memo home for both rank recursions."""

    def __init__(self, system):
        self.system = system
        self.seq_memo = {}     # (n, aclA) -> {state: longest chain length}
        self.ladder_memo = {}  # (n, aclA) -> {(state, alpha): bool}
        self.nodes = 0

    def _tick(self, limit):
        self.nodes += 1
        if self.nodes > limit[0]:
            raise SearchBudgetExceeded("rank search budget exhausted", nodes=self.nodes)

    # ---- sequence oracle -------------------------------------------------

    def seq_value(self, acl_a, state, n, limit):
        memo = self.seq_memo.setdefault((n, acl_a), {})
        return self._seq_value(acl_a, state, memo, limit)

    def _seq_value(self, acl_a, state, memo, limit):
        hit = memo.get(state)
        if hit is not None:
            return hit
        self._tick(limit)
        close = self.system.close
        best = 0
        for a in iter_bits(acl_a & ~state):
            value = 1 + self._seq_value(acl_a, close(state | (1 << a)), memo, limit)
            if value > best:
                best = value
        memo[state] = best
        return best

    def seq_witness(self, acl_a, state, n):
        """Rebuild the ascending-id longest chain from a filled memo."""
        memo = self.seq_memo[(n, acl_a)]
        close = self.system.close
        value = memo[state]
        chain = []
        while value > 0:
            for a in iter_bits(acl_a & ~state):
                nxt = close(state | (1 << a))
                if memo.get(nxt) == value - 1:
                    chain.append(a)
                    state = nxt
                    value -= 1
                    break
            else:  # pragma: no cover - memo is filled along all branches
                raise AssertionError("memo lost a branch")
        return chain

    # ---- definition ladder -----------------------------------------------

    def ladder_value(self, acl_a, state, n, limit):
        memo = self.ladder_memo.setdefault((n, acl_a), {})
        bound = popcount(acl_a)
        alpha = 0
        while alpha < bound and self._reaches(acl_a, state, alpha + 1, memo, limit):
            alpha += 1
        return alpha

    def _reaches(self, acl_a, state, alpha, memo, limit):
        if alpha <= 0:
            return True
        key = (state, alpha)
        hit = memo.get(key)
        if hit is not None:
            return hit
        self._tick(limit)
        close = self.system.close
        out = False
        for a in iter_bits(acl_a & ~state):
            if self._reaches(acl_a, close(state | (1 << a)), alpha - 1, memo, limit):
                out = True
                break
        memo[key] = out
        return out


def _engine(system) -> _RankEngine:
    eng = system._scratch.get("rank")
    if eng is None:
        eng = system._scratch["rank"] = _RankEngine(system)
    return eng


def _query_masks(system, A, B, n):
    mask_a = system.ids_to_mask(A)
    mask_b = system.ids_to_mask(B)
    acl_a = system.acl_n_mask(mask_a, n)
    state = system.close(mask_b)
    return acl_a, state


def rank_value(system, A, B, n, budget=None):
    """Oracle rank value (no certificate); memoized across calls."""
    acl_a, state = _query_masks(system, A, B, n)
    eng = _engine(system)
    return eng.seq_value(acl_a, state, n, [eng.nodes + search_budget(budget)])


def _rank_value_masks(system, acl_a, state, n, budget=None):
    eng = _engine(system)
    return eng.seq_value(acl_a, state, n, [eng.nodes + search_budget(budget)])


def rank_by_sequences(system, A, B, n, budget=None) -> RankCertificate:
    """Ground-truth rank with a longest-chain certificate."""
    acl_a, state = _query_masks(system, A, B, n)
    eng = _engine(system)
    value = eng.seq_value(acl_a, state, n, [eng.nodes + search_budget(budget)])
    witness = tuple(system.id_at(p) for p in eng.seq_witness(acl_a, state, n))
    return RankCertificate(value, witness)


def rank_recursive(system, A, B, n, budget=None) -> int:
    """Rank by the inductive definition (greatest alpha with rank >= alpha)."""
    acl_a, state = _query_masks(system, A, B, n)
    eng = _engine(system)
    return eng.ladder_value(acl_a, state, n, [eng.nodes + search_budget(budget)])


def greedy_rank(system, A, B, n, tiebreak="asc", budget=None) -> RankCertificate:
    """Greedy maximal chain, preferring candidates of least singleton rank
    over the current base (rank-1 picks shave exactly one off the remaining
    rank, so under the exchange property the greedy value equals the true
    rank).  Without exchange the chain is merely maximal: its value can
    undershoot rank_by_sequences, which is how such systems get flagged."""
    acl_a, state = _query_masks(system, A, B, n)
    eng = _engine(system)
    limit = [eng.nodes + search_budget(budget)]
    chain = []
    while True:
        cands = list(iter_bits(acl_a & ~state))
        if not cands:
            break
        if tiebreak == "desc":
            cands = cands[::-1]
        pick = min(
            cands,
            key=lambda p: eng.seq_value(system.acl_n_mask(1 << p, n), state, n, limit),
        )
        chain.append(pick)
        state = system.close(state | (1 << pick))
    return RankCertificate(len(chain), tuple(system.id_at(p) for p in chain))


def check_chain(system, A, B, n, witness) -> bool:
    """Do the witness elements form an independence chain for A over B?"""
    mask_a = system.ids_to_mask(A)
    acl_a = system.acl_n_mask(mask_a, n)
    state = system.close(system.ids_to_mask(B))
    seen = 0
    for eid in witness:
        p = system.pos(eid)
        b = 1 << p
        if (acl_a & b) == 0 or (state & b) or (seen & b):
            return False
        seen |= b
        state = system.close(state | b)
    return True


def is_ncs(system, A, B, n, witness) -> bool:
    """A coordinatization sequence: a chain whose length is exactly the rank."""
    return check_chain(system, A, B, n, witness) and len(witness) == rank_value(system, A, B, n)


def find_rank1_element(system, A, B, n, budget=None):
    """Some element of acl^n(A) \\ acl^n(B) of rank exactly 1 over B.

    Follows the descent argument: starting from the least eligible
    element, repeatedly step to an element of its own closure whose rank
    over B is strictly smaller but still positive.  Returns None when
    acl^n(A) is contained in acl^n(B).
    """
    acl_a, state = _query_masks(system, A, B, n)
    cands = acl_a & ~state
    if not cands:
        return None
    eng = _engine(system)
    limit = [eng.nodes + search_budget(budget)]

    def singleton_rank(pos):
        acl_s = system.acl_n_mask(1 << pos, n)
        return eng.seq_value(acl_s, state, n, limit)

    current = next(iter_bits(cands))
    rank = singleton_rank(current)
    while rank > 1:
        inner = system.acl_n_mask(1 << current, n) & ~state
        for b in iter_bits(inner):
            if b == current:
                continue
            r = singleton_rank(b)
            if 1 <= r < rank:
                current, rank = b, r
                break
        else:  # pragma: no cover - the descent step always exists
            raise TheoremContradiction(
                {"element": system.id_at(current), "rank": rank},
                "rank-1 descent found no smaller-rank element",
            )
    return system.id_at(current)


def build_ncs(system, A, B, n, budget=None) -> RankCertificate:
    """A coordinatization sequence of length exactly rk^n(A/B).

    Recomputes, on the returned witness, the three prefix laws every
    maximal chain must satisfy (prefix ranks k, tail ranks alpha-k, step
    ranks 1); a failure is an engine bug, not data.
    """
    cert = rank_by_sequences(system, A, B, n, budget=budget)
    alpha = cert.value
    base = frozenset(B)
    witness = cert.witness
    for k in range(1, alpha + 1):
        prefix = frozenset(witness[:k])
        step_base = base | frozenset(witness[: k - 1])
        checks = (
            rank_value(system, prefix, base, n, budget) == k,
            rank_value(system, A, base | prefix, n, budget) == alpha - k,
            rank_value(system, frozenset({witness[k - 1]}), step_base, n, budget) == 1,
        )
        if not all(checks):
            raise TheoremContradiction(
                {"A": sorted(A), "B": sorted(base), "n": n, "witness": list(witness), "k": k},
                "chain prefix laws failed on a maximal chain",
            )
    return cert


def build_nccs(system, A, B, n, tiebreak="asc", budget=None) -> CoordSequence:
    """Canonical coordinatization sequence built slice by slice.

    Repeatedly takes the rank-1 slice of acl^n(A) over (prefix union B),
    extracts a basis of it (greedy in the given tie-break order), appends
    the basis, and records a core index, until the level-n closure of A is
    covered.  Raises ExchangeViolation when a slice fails the pregeometry
    axioms during basis extraction.
    """
    from .pregeom import find_basis, rank1_slice

    mask_a = system.ids_to_mask(A)
    mask_b = system.ids_to_mask(B)
    acl_a = system.acl_n_mask(mask_a, n)
    base_ids = frozenset(B)

    elements = []
    cores = [0]
    guard = popcount(acl_a) + 1
    for _ in range(guard + 1):
        prefix_ids = frozenset(system.id_at(p) for p in elements)
        state = system.close(mask_b | mask_of(elements))
        if acl_a & ~state == 0:
            return CoordSequence(
                tuple(system.id_at(p) for p in elements), tuple(cores)
            )
        slc = rank1_slice(system, base_ids | prefix_ids, n, budget=budget)
        slice_pool = slc.carrier_mask & acl_a
        if slice_pool == 0:  # pragma: no cover - contradicts the rank-1 descent lemma
            raise TheoremContradiction(
                {"A": sorted(A), "B": sorted(base_ids), "n": n, "prefix": sorted(prefix_ids)},
                "uncovered closure but empty rank-1 slice",
            )
        basis = find_basis(slc, system.mask_to_ids(slice_pool), tiebreak=tiebreak)
        ordered = sorted(basis, reverse=(tiebreak == "desc"))
        elements.extend(system.pos(eid) for eid in ordered)
        cores.append(len(elements))
    raise TheoremContradiction(  # pragma: no cover - guarded loop
        {"A": sorted(A), "B": sorted(base_ids), "n": n},
        "coordinatization loop failed to terminate",
    )


def transform_ncs_to_nccs(system, A, B, n, ncs, budget=None) -> CoordSequence:
    """Rearrange a coordinatization sequence into a canonical one.

    Executes the constructive steps: extend the current slice block by an
    independent element d, locate the least displacement index whose
    prefix closure captures d, substitute d there, and rotate it to the
    block end; every intermediate sequence is asserted to remain a
    coordinatization sequence.  The output has the same length.
    """
    from .pregeom import is_independent, rank1_slice, search_exchange_witness

    witness = tuple(ncs.witness if isinstance(ncs, RankCertificate) else ncs)
    if not is_ncs(system, A, B, n, witness):
        raise InvalidCertificate("input is not a coordinatization sequence for the query")

    mask_b = system.ids_to_mask(B)
    acl_a = system.acl_n_mask(system.ids_to_mask(A), n)
    base_ids = frozenset(B)
    seq = [system.pos(eid) for eid in witness]
    alpha = len(seq)
    cores = [0]

    def ids_of(positions):
        return tuple(system.id_at(p) for p in positions)

    def assert_still_ncs(slice_base):
        if not check_chain(system, A, B, n, ids_of(seq)):
            w = search_exchange_witness(system, slice_base, n, budget=budget)
            if w is None:  # pragma: no cover - violation exists but eluded the bounded scan
                raise SearchBudgetExceeded("could not localize the exchange failure")
            raise ExchangeViolation(w)

    while cores[-1] < alpha:
        k_m = cores[-1]
        slice_base = base_ids | frozenset(ids_of(seq[:k_m]))
        slc = rank1_slice(system, slice_base, n, budget=budget)
        pool = slc.carrier_mask & acl_a
        j = k_m + 1
        while True:
            block = mask_of(seq[k_m:j])
            spanned = slc.cl_mask(block)
            cands = pool & ~spanned
            if cands == 0:
                break
            d = next(iter_bits(cands))
            displaced = None
            for l in range(j, alpha):
                if (1 << d) & system.close(mask_b | mask_of(seq[: l + 1])):
                    displaced = l
                    break
            if displaced is None:
                w = search_exchange_witness(system, slice_base, n, budget=budget)
                if w is None:  # pragma: no cover
                    raise SearchBudgetExceeded("could not localize the exchange failure")
                raise ExchangeViolation(w)
            seq[displaced] = d
            assert_still_ncs(slice_base)
            seq.insert(j, seq.pop(displaced))
            assert_still_ncs(slice_base)
            j += 1
        block_ids = frozenset(ids_of(seq[k_m:j]))
        if not is_independent(slc, block_ids):
            w = search_exchange_witness(system, slice_base, n, budget=budget)
            if w is None:  # pragma: no cover
                raise SearchBudgetExceeded("could not localize the exchange failure")
            raise ExchangeViolation(w)
        cores.append(j)
    return CoordSequence(ids_of(seq), tuple(cores))


def is_nccs(system, A, B, n, coord: CoordSequence, budget=None) -> bool:
    """Check the two canonical-sequence conditions directly."""
    from .pregeom import find_basis_oracle, rank1_slice

    elements = coord.elements
    cores = coord.core_indices
    if not cores or cores[0] != 0 or cores[-1] != len(elements):
        return False
    if list(cores) != sorted(set(cores)):
        return False
    mask_b = system.ids_to_mask(B)
    acl_a = system.acl_n_mask(system.ids_to_mask(A), n)
    full = system.close(mask_b | mask_of(system.pos(e) for e in elements))
    if acl_a & ~full:
        return False
    base_ids = frozenset(B)
    for j in range(len(cores) - 1):
        prefix = frozenset(elements[: cores[j]])
        block = frozenset(elements[cores[j]: cores[j + 1]])
        slc = rank1_slice(system, base_ids | prefix, n, budget=budget)
        pool = system.mask_to_ids(slc.carrier_mask & acl_a)
        if not find_basis_oracle(slc, pool, block):
            return False
    return True


# ---- rank laws ---------------------------------------------------------------


@dataclass
class LawReport:
    laws: dict
    seed: Optional[int] = None

    @property
    def ok(self):
        return all(not entry["violations"] for entry in self.laws.values())

    def to_dict(self):
        return {"laws": self.laws, "ok": self.ok, "seed": self.seed}


def check_rank_laws(system, sampler) -> LawReport:
    """Verify the rank laws on the sampler's (A, B, C, D, n) tuples.

    Checked: rank of A over itself is zero; monotonicity in the numerator
    (over subsets B of A) and in the base (C against supersets D);
    superadditivity through an intermediate subset; locality (a minimal
    sub-base with the same rank is exhibited); and, when an automorphism
    group is present, invariance of rank under its elements.  Violations
    are data, reported with witnesses.
    """
    from .bitset import submasks, subsets_upto

    laws = {
        name: {"checked": 0, "violations": []}
        for name in ("self-rank-zero", "numerator-monotone", "base-monotone",
                     "superadditive", "locality", "type-determined")
    }

    def note(name, **witness):
        laws[name]["violations"].append(witness)

    def ids(mask):
        return system.mask_to_id_list(mask)

    eng = _engine(system)
    limit = [eng.nodes + search_budget(None)]
    sets = sampler.set_masks()
    extensions = sampler.small_masks(sampler.extension_size)
    group = system.automorphisms
    perms = sampler.automorphisms() if group is not None else []

    for n in sampler.levels:
        lvl = system.level_mask(n)
        closed = dict(zip(sets, system.close_many(sets)))
        acl = {m: c & lvl for m, c in closed.items()}

        def rv(acl_a, state):
            return eng.seq_value(acl_a, state, n, limit)

        for a_mask in sets:
            acl_a = acl[a_mask]
            st_a = closed[a_mask]
            laws["self-rank-zero"]["checked"] += 1
            if rv(acl_a, st_a) != 0:
                note("self-rank-zero", A=ids(a_mask), n=n)

        for a_mask in sets:
            acl_a = acl[a_mask]
            for b_mask in submasks(a_mask):
                acl_b = system.close(b_mask) & lvl
                for c_mask in sets:
                    st_c = closed[c_mask]
                    r_ac = rv(acl_a, st_c)
                    r_bc = rv(acl_b, st_c)
                    laws["numerator-monotone"]["checked"] += 1
                    if r_ac < r_bc:
                        note("numerator-monotone", A=ids(a_mask), B=ids(b_mask),
                             C=ids(c_mask), n=n)
                    laws["superadditive"]["checked"] += 1
                    if r_ac < r_bc + rv(acl_a, system.close(b_mask | c_mask)):
                        note("superadditive", A=ids(a_mask), B=ids(b_mask),
                             C=ids(c_mask), n=n)

        for a_mask in sets:
            acl_a = acl[a_mask]
            for c_mask in sets:
                r_ac = rv(acl_a, closed[c_mask])
                for e_mask in extensions:
                    d_mask = c_mask | e_mask
                    laws["base-monotone"]["checked"] += 1
                    if r_ac < rv(acl_a, system.close(d_mask)):
                        note("base-monotone", A=ids(a_mask), C=ids(c_mask),
                             D=ids(d_mask), n=n)

        for a_mask in sets:
            acl_a = acl[a_mask]
            for b_mask in sets:
                laws["locality"]["checked"] += 1
                target = rv(acl_a, closed[b_mask])
                minimal = None
                for sub_b in subsets_upto(b_mask, popcount(b_mask)):
                    if rv(acl_a, system.close(sub_b)) == target:
                        minimal = sub_b
                        break
                if minimal is None:  # pragma: no cover - B itself always qualifies
                    note("locality", A=ids(a_mask), B=ids(b_mask), n=n)

        if perms:
            for a_mask in sets:
                for b_mask in sets:
                    base = rv(acl[a_mask], closed[b_mask])
                    for perm in perms:
                        laws["type-determined"]["checked"] += 1
                        im_a = group.act_mask(perm, a_mask)
                        im_b = group.act_mask(perm, b_mask)
                        if rv(system.close(im_a) & lvl, system.close(im_b)) != base:
                            note("type-determined", A=ids(a_mask), B=ids(b_mask), n=n)

    return LawReport(laws, seed=sampler.seed)


def rank_extension_search(system, d_tuple, B, C, n, budget=None):
    """Search the orbit of d_tuple (over B) for a copy keeping its rank over C.

    Types at finite scale are orbits under the pointwise stabilizer, so
    the search enumerates the orbit of the tuple; None means the extension
    is not witnessed at this scale (an approximation failure, not a
    violation).
    """
    if system.automorphisms is None:
        raise NoGroup("rank extension search needs an automorphism group")
    B = frozenset(B)
    C = frozenset(C)
    if not B <= C:
        raise ValueError("need B to be a subset of C")
    d_tuple = tuple(d_tuple)
    target = rank_value(system, frozenset(d_tuple), B, n, budget)
    group = system.automorphisms
    stab_mask = system.ids_to_mask(B)
    positions = tuple(system.pos(e) for e in d_tuple)
    orbit = group.orbit_of_tuple(positions, stab_mask)
    ordered = [positions] + [t for t in orbit if t != positions]
    for cand in ordered:
        ids = tuple(system.id_at(p) for p in cand)
        if rank_value(system, frozenset(ids), C, n, budget) == target:
            return ids
    return None


def nonalgebraic_extension(system, a, B, C):
    """Finite analog of nonalgebraic-type extension: a copy of `a` over B
    that escapes the closure of C (B subset of C).  None when the whole
    orbit is trapped inside cl(C)."""
    if system.automorphisms is None:
        raise NoGroup("extension search needs an automorphism group")
    B = frozenset(B)
    C = frozenset(C)
    if not B <= C:
        raise ValueError("need B to be a subset of C")
    closed_c = system.close(system.ids_to_mask(C))
    stab_mask = system.ids_to_mask(B)
    for p in system.automorphisms.orbit_of_point(system.pos(a), stab_mask):
        if not (closed_c >> p) & 1:
            return system.id_at(p)
    return None
