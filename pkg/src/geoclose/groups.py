"""Generator-presented permutation groups on universe positions.

Groups here are small (wreath-style symmetry groups of desk-scale
structures), so the whole group is enumerated once by breadth-first
closure of the generators and cached as a dense image table.  That table
feeds the orbit-threshold closure kernel and every orbit/stabilizer query.
"""

import numpy as np

from .bitset import iter_bits
from .errors import SearchBudgetExceeded, SpecFormatError

DEFAULT_ENUMERATION_BOUND = 200_000


def _check_perm(perm, degree):
    if len(perm) != degree or sorted(perm) != list(range(degree)):
        raise SpecFormatError(f"not a permutation of 0..{degree - 1}: {perm}")


class PermGroup:
    """A finite permutation group of the universe positions 0..degree-1."""

    def __init__(self, degree, generators, enumeration_bound=DEFAULT_ENUMERATION_BOUND):
        self.degree = int(degree)
        gens = [tuple(int(x) for x in g) for g in generators]
        for g in gens:
            _check_perm(g, self.degree)
        self.generators = tuple(gens)
        self.enumeration_bound = enumeration_bound
        self._elements = None
        self._stab_cache = {}

    def __repr__(self):
        return f"PermGroup(degree={self.degree}, generators={len(self.generators)})"

    # -- enumeration ----------------------------------------------------

    def elements_array(self):
        """All group elements as a lexicographically sorted uint8 image table."""
        if self._elements is None:
            ident = tuple(range(self.degree))
            seen = {ident}
            frontier = [ident]
            while frontier:
                nxt = []
                for g in frontier:
                    for h in self.generators:
                        prod = tuple(h[g[i]] for i in range(self.degree))
                        if prod not in seen:
                            seen.add(prod)
                            nxt.append(prod)
                            if len(seen) > self.enumeration_bound:
                                raise SearchBudgetExceeded(
                                    f"group enumeration exceeded {self.enumeration_bound} elements",
                                    nodes=len(seen),
                                )
                frontier = nxt
            table = np.array(sorted(seen), dtype=np.uint8)
            table.setflags(write=False)
            self._elements = table
        return self._elements

    @property
    def order(self):
        return self.elements_array().shape[0]

    # -- actions ---------------------------------------------------------

    def act_mask(self, perm, mask):
        out = 0
        for p in iter_bits(mask):
            out |= 1 << int(perm[p])
        return out

    def act_tuple(self, perm, tup):
        return tuple(int(perm[p]) for p in tup)

    def pointwise_stabilizer(self, fixed_mask):
        """Image rows of all elements fixing every position of fixed_mask."""
        cached = self._stab_cache.get(fixed_mask)
        if cached is not None:
            return cached
        table = self.elements_array()
        sel = np.ones(table.shape[0], dtype=bool)
        for p in iter_bits(fixed_mask):
            sel &= table[:, p] == p
        rows = table[sel]
        rows.setflags(write=False)
        self._stab_cache[fixed_mask] = rows
        return rows

    def orbit_of_point(self, point, fixed_mask=0):
        rows = self.pointwise_stabilizer(fixed_mask)
        return sorted({int(g[point]) for g in rows})

    def orbit_of_tuple(self, tup, fixed_mask=0):
        """Sorted orbit of an ordered tuple under the pointwise stabilizer."""
        rows = self.pointwise_stabilizer(fixed_mask)
        return sorted({self.act_tuple(g, tup) for g in rows})

    def orbit_partition(self, fixed_mask=0):
        """Position -> orbit representative under the pointwise stabilizer."""
        rows = self.pointwise_stabilizer(fixed_mask)
        labels = np.arange(self.degree)
        changed = True
        while changed:
            changed = False
            for g in rows:
                pulled = np.minimum(labels, labels[g])
                if not np.array_equal(pulled, labels):
                    labels = pulled
                    changed = True
        return labels
