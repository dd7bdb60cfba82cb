"""numba-compiled kernels (hot path).

Mirrors _python exactly; the parity test suite runs both backends on the
same inputs.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def rules_close_batch(masks, premises, adds):
    out = masks.copy()
    n_rules = premises.shape[0]
    for i in range(out.shape[0]):
        m = out[i]
        changed = True
        while changed:
            changed = False
            for r in range(n_rules):
                p = premises[r]
                if (m & p) == p:
                    a = adds[r]
                    if (m & a) != a:
                        m |= a
                        changed = True
        out[i] = m
    return out


@njit(cache=True)
def _orbit_close_one(mask, images, threshold, deg):
    one = np.uint64(1)
    cur = mask
    n_elems = images.shape[0]
    stab_idx = np.empty(n_elems, dtype=np.int64)
    labels = np.empty(deg, dtype=np.int64)
    counts = np.empty(deg, dtype=np.int64)
    while True:
        n_stab = 0
        for g in range(n_elems):
            ok = True
            for p in range(deg):
                if (cur >> np.uint64(p)) & one:
                    if images[g, p] != p:
                        ok = False
                        break
            if ok:
                stab_idx[n_stab] = g
                n_stab += 1
        for e in range(deg):
            labels[e] = e
        changed = True
        while changed:
            changed = False
            for s in range(n_stab):
                g = stab_idx[s]
                for e in range(deg):
                    le = labels[images[g, e]]
                    if le < labels[e]:
                        labels[e] = le
                        changed = True
        for e in range(deg):
            counts[e] = 0
        for e in range(deg):
            counts[labels[e]] += 1
        nxt = cur
        for e in range(deg):
            if counts[labels[e]] <= threshold:
                nxt |= one << np.uint64(e)
        if nxt == cur:
            return cur
        cur = nxt


@njit(cache=True)
def orbit_close_batch(masks, images, threshold, deg):
    out = np.empty(masks.shape[0], dtype=np.uint64)
    for i in range(masks.shape[0]):
        out[i] = _orbit_close_one(masks[i], images, threshold, deg)
    return out
