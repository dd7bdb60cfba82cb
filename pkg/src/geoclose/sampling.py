"""Deterministic query sources for the verification suites.

A Sampler fixes a system, a subset-size bound, the levels to visit, and a
seed.  Families are exhaustive whenever they fit the configured limit and
seeded-random otherwise; the seed lands in every report so any run can be
replayed exactly.
"""

import numpy as np

from .bitset import iter_bits, subsets_upto

EXHAUSTIVE_LIMIT = 250_000


class Sampler:
    def __init__(self, system, set_size=2, levels=None, seed=0,
                 exhaustive_limit=EXHAUSTIVE_LIMIT, random_count=2000,
                 extension_size=1, automorphism_count=6, invariance_samples=1500,
                 base_size=None):
        self.system = system
        self.set_size = set_size
        self.base_size = set_size if base_size is None else base_size
        self.seed = seed
        self.exhaustive_limit = exhaustive_limit
        self.random_count = random_count
        self.extension_size = extension_size
        self.automorphism_count = automorphism_count
        self.invariance_samples = invariance_samples
        self.levels = list(range(system.max_level + 1) if levels is None else levels)
        self._set_masks = None
        self._base_masks = None
        self.exhaustive = True

    # ---- base families ----------------------------------------------------

    def set_masks(self):
        """Subsets of the universe up to the size bound, as masks."""
        if self._set_masks is None:
            masks = list(subsets_upto(self.system.universe_mask, self.set_size))
            if len(masks) > self.exhaustive_limit:
                rng = np.random.default_rng(self.seed)
                idx = rng.choice(len(masks), size=self.random_count, replace=False)
                masks = [masks[i] for i in sorted(idx)]
                self.exhaustive = False
            self._set_masks = masks
        return self._set_masks

    def base_masks(self):
        """Base-set family (the C of a query), possibly smaller than set_masks."""
        if self._base_masks is None:
            if self.base_size == self.set_size:
                self._base_masks = self.set_masks()
            else:
                self._base_masks = list(
                    subsets_upto(self.system.universe_mask, self.base_size)
                )
        return self._base_masks

    def id_sets(self):
        return [frozenset(self.system.mask_to_ids(m)) for m in self.set_masks()]

    def small_masks(self, size):
        return list(subsets_upto(self.system.universe_mask, size))

    def subsets_of(self, ids):
        """Subsets of an id set in (size, lex) order, smallest first."""
        mask = self.system.ids_to_mask(ids)
        return [frozenset(self.system.mask_to_ids(m))
                for m in subsets_upto(mask, len(list(iter_bits(mask))))]

    def chain_masks(self):
        """(B, C, D) mask chains with B <= C <= D, grown by small extensions."""
        singles = self.small_masks(self.extension_size)
        out = []
        for b in self.set_masks():
            for x in singles:
                c = b | x
                for y in singles:
                    out.append((b, c, c | y))
        return out

    def automorphisms(self):
        """A deterministic sample of group elements (generators first)."""
        group = self.system.automorphisms
        if group is None:
            return []
        table = group.elements_array()
        rows = [tuple(g) for g in group.generators]
        step = max(1, table.shape[0] // max(1, self.automorphism_count))
        for i in range(0, table.shape[0], step):
            rows.append(tuple(int(x) for x in table[i]))
            if len(rows) >= self.automorphism_count + len(group.generators):
                break
        seen = []
        for r in rows:
            if r not in seen:
                seen.append(r)
        return seen

    def tuples_from_pool(self, pool_mask, length):
        """Ordered tuples (distinct entries) from a pool, lexicographic."""
        pool = list(iter_bits(pool_mask))
        if length == 0:
            return [()]
        out = []

        def grow(prefix):
            if len(prefix) == length:
                out.append(tuple(prefix))
                return
            for p in pool:
                if p not in prefix:
                    grow(prefix + [p])

        grow([])
        return out

    def describe(self):
        return {
            "setSize": self.set_size,
            "levels": list(self.levels),
            "seed": self.seed,
            "exhaustive": self.exhaustive,
            "extensionSize": self.extension_size,
        }


def pick_spread(items, count, seed):
    """Deterministic spread sample: all of items when they fit, otherwise
    evenly spaced picks after a seeded rotation."""
    items = list(items)
    if len(items) <= count:
        return items
    rng = np.random.default_rng(seed)
    start = int(rng.integers(0, len(items)))
    step = len(items) / count
    return [items[(start + int(i * step)) % len(items)] for i in range(count)]
