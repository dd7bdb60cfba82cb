"""Pure numpy fallback kernels.

Semantically identical to the numba backend; used when numba is not
importable or when GEOCLOSE_KERNELS=python is set.
"""

import numpy as np


def rules_close_batch(masks, premises, adds):
    """Close each mask under generation rules (premise -> add).

    masks, premises, adds are uint64 arrays; a rule fires on a set S when
    premise & S == premise, contributing its add-mask.  Iterates to the
    least fixpoint, which is extensive, monotone and idempotent for any
    rule list.
    """
    out = np.array(masks, dtype=np.uint64, copy=True)
    if len(premises) == 0 or len(out) == 0:
        return out
    while True:
        changed = False
        for r in range(len(premises)):
            p = premises[r]
            a = adds[r]
            fire = (out & p) == p
            grow = fire & ((out & a) != a)
            if grow.any():
                out[grow] |= a
                changed = True
        if not changed:
            return out


def _orbit_labels(stab, deg):
    """Minimum-label propagation along e -> g(e) for all stabilizer elements."""
    labels = np.arange(deg)
    while True:
        changed = False
        for g in stab:
            pulled = np.minimum(labels, labels[g])
            if not np.array_equal(pulled, labels):
                labels = pulled
                changed = True
        if not changed:
            return labels


def _orbit_close_one(mask, images, threshold, deg):
    cur = int(mask)
    n_elems = images.shape[0]
    while True:
        if cur:
            sel = np.ones(n_elems, dtype=bool)
            for p in range(deg):
                if (cur >> p) & 1:
                    sel &= images[:, p] == p
            stab = images[sel]
        else:
            stab = images
        labels = _orbit_labels(stab, deg)
        counts = np.bincount(labels, minlength=deg)
        nxt = cur
        for e in range(deg):
            if counts[labels[e]] <= threshold:
                nxt |= 1 << e
        if nxt == cur:
            return cur
        cur = nxt


def orbit_close_batch(masks, images, threshold, deg):
    """Close each mask under the orbit-threshold rule.

    An element joins the closure of S when its orbit under the pointwise
    stabilizer of S (within the fully enumerated group `images`) has size
    at most `threshold`; the rule is iterated to a fixpoint so the result
    is idempotent.
    """
    out = np.empty(len(masks), dtype=np.uint64)
    for i in range(len(masks)):
        out[i] = _orbit_close_one(int(masks[i]), images, threshold, deg)
    return out
