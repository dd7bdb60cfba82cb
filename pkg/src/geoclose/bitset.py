"""Bitset helpers.

Every element set is a Python int whose bit k stands for the element at
universe position k (positions are ids sorted ascending).  All enumeration
helpers yield masks in a deterministic order so downstream reports are
reproducible byte for byte.
"""

from itertools import combinations


def bit(pos: int) -> int:
    return 1 << pos


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def iter_bits(mask: int):
    """Yield set bit positions in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(positions) -> int:
    m = 0
    for p in positions:
        m |= 1 << p
    return m


def subsets_upto(pool_mask: int, max_size: int):
    """All subsets of pool_mask with at most max_size bits.

    Ordered by (size, then lexicographic over ascending positions), so the
    empty set comes first and singletons precede pairs.
    """
    pool = list(iter_bits(pool_mask))
    for size in range(min(max_size, len(pool)) + 1):
        for combo in combinations(pool, size):
            yield mask_of(combo)


def all_subsets(pool_mask: int):
    """All subsets of pool_mask ordered by (popcount, value)."""
    pool = list(iter_bits(pool_mask))
    for size in range(len(pool) + 1):
        for combo in combinations(pool, size):
            yield mask_of(combo)


def submasks(mask: int):
    """All submasks of mask in ascending numeric order (includes 0 and mask)."""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        sub = (sub - mask) & mask
