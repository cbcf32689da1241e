"""Backend equivalence: compiled extension vs pure-Python fallback."""

import os
import subprocess
import sys

import numpy as np
import pytest

from scanwait.kernels import backend, pure
from scanwait.patterns import enumerate_patterns

try:
    from scanwait.kernels import _ckernels
except ImportError:
    _ckernels = None

needs_compiled = pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")


def brute_force_structure(pattern_set):
    """Direct O(N^2 w^2) re-derivation without the candidate-position shortcut."""
    rows, cols, jlens, ones = [], [], [], []
    pats = [p.bits for p in pattern_set]
    for a, x in enumerate(pats):
        for b, y in enumerate(pats):
            for jl in range(2, min(len(x), len(y)) + 1):
                if x[:jl] == y[len(y) - jl:]:
                    rows.append(a)
                    cols.append(b)
                    jlens.append(jl)
                    ones.append(sum(x[:jl]))
    return rows, cols, jlens, ones


@pytest.mark.parametrize("w,s", [(5, 5), (6, 2), (6, 3), (8, 3), (9, 4)])
def test_pure_structure_matches_brute_force(w, s):
    ps = enumerate_patterns(w, s)
    flat, offsets = ps.packed
    got = pure.overlap_structure(flat, offsets)
    want = brute_force_structure(ps)
    got_set = sorted(zip(*[a.tolist() for a in got]))
    want_set = sorted(zip(*want))
    assert got_set == want_set


@needs_compiled
@pytest.mark.parametrize("w,s", [(5, 5), (6, 2), (6, 3), (10, 3), (9, 4), (12, 4)])
def test_backends_agree_on_structure(w, s):
    ps = enumerate_patterns(w, s)
    flat, offsets = ps.packed
    a = pure.overlap_structure(flat, offsets)
    b = _ckernels.overlap_structure(flat, offsets)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


@needs_compiled
@pytest.mark.parametrize("w,s,p", [(6, 2, 0.2), (8, 3, 0.4), (10, 4, 0.5), (3, 3, 0.9)])
def test_backends_agree_on_simulation_bit_for_bit(w, s, p):
    taus_a, ages_a = pure.simulate_batch(w, s, p, 400, 777)
    taus_b, ages_b = _ckernels.simulate_batch(w, s, p, 400, 777)
    assert np.array_equal(taus_a, taus_b)
    assert np.array_equal(ages_a, ages_b)


def test_env_var_forces_pure_backend():
    env = dict(os.environ, SCANWAIT_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", "import scanwait.kernels as k; print(k.backend())"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "pure"


def test_backend_reports_a_known_name():
    assert backend() in ("compiled", "pure")
