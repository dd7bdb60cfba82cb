"""Backend parity: the numba kernels and the numpy fallbacks must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from geoclose import kernels


def _random_rules(rng, n, count):
    premises = []
    adds = []
    for _ in range(count):
        k = int(rng.integers(1, 3))
        pre = 0
        for p in rng.choice(n, size=k, replace=False):
            pre |= 1 << int(p)
        add = 0
        for p in rng.choice(n, size=int(rng.integers(1, 3)), replace=False):
            add |= 1 << int(p)
        premises.append(pre)
        adds.append(add)
    return (np.array(premises, dtype=np.uint64), np.array(adds, dtype=np.uint64))


@pytest.mark.parametrize("n", [5, 11, 16])
def test_rules_close_parity(n):
    rng = np.random.default_rng(n)
    premises, adds = _random_rules(rng, n, 3 * n)
    masks = rng.integers(0, 1 << n, size=500, dtype=np.uint64)
    py = kernels.get_impl("python").rules_close_batch(masks, premises, adds)
    nb = kernels.get_impl("numba").rules_close_batch(masks, premises, adds)
    assert np.array_equal(py, nb)


def test_rules_close_is_extensive_and_idempotent():
    rng = np.random.default_rng(3)
    premises, adds = _random_rules(rng, 10, 25)
    masks = np.arange(1 << 10, dtype=np.uint64)
    out = kernels.rules_close_batch(masks, premises, adds)
    assert np.all(out & masks == masks)
    again = kernels.rules_close_batch(out.copy(), premises, adds)
    assert np.array_equal(out, again)


def test_orbit_close_parity():
    # S3 x S3 acting on 6 points plus a 2-cycle of blocks
    import itertools

    perms = []
    for p in itertools.permutations(range(3)):
        for q in itertools.permutations(range(3)):
            perms.append([*p, *(3 + i for i in q)])
            perms.append([*(3 + i for i in q), *p])
    images = np.array(sorted(perms), dtype=np.uint8)
    masks = np.arange(1 << 6, dtype=np.uint64)
    py = kernels.get_impl("python").orbit_close_batch(masks, images, 1, 6)
    nb = kernels.get_impl("numba").orbit_close_batch(masks, images, 1, 6)
    assert np.array_equal(py, nb)


def test_env_flag_selects_python_backend():
    env = dict(os.environ, GEOCLOSE_KERNELS="python")
    out = subprocess.run(
        [sys.executable, "-c", "import geoclose.kernels as k; print(k.backend_name())"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_env_flag_rejects_garbage():
    env = dict(os.environ, GEOCLOSE_KERNELS="banana")
    out = subprocess.run(
        [sys.executable, "-c", "import geoclose.kernels"],
        env=env, capture_output=True, text=True,
    )
    assert out.returncode != 0
