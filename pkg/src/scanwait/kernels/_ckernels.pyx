# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: pattern-overlap structure scan and the simulation loop.

Contracts mirror ``scanwait.kernels.pure``; both backends must return
identical results for identical inputs (the simulator consumes one uniform
per time step from PCG64(SeedSequence(seed, spawn_key=(r,))) in both).
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t

from scanwait.errors import IterationCapError

cnp.import_array()


def overlap_structure(flat, offsets):
    """See scanwait.kernels.pure.overlap_structure."""
    cdef cnp.uint8_t[::1] data = np.ascontiguousarray(flat, dtype=np.uint8)
    cdef cnp.int64_t[::1] offs = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef Py_ssize_t n = offs.shape[0] - 1
    cdef Py_ssize_t a, b, oa, ob, la, lb, lim, pos, jl, i, shift, ones, ci, ncand
    cdef bint ok

    rows, cols, jlens, onecounts = [], [], [], []
    cdef cnp.int64_t[::1] cand = np.empty(int(offs[n]), dtype=np.int64)

    for a in range(n):
        oa = offs[a]
        la = offs[a + 1] - oa
        ncand = 0
        for i in range(la):
            if data[oa + i]:
                cand[ncand] = i
                ncand += 1
        for b in range(n):
            ob = offs[b]
            lb = offs[b + 1] - ob
            lim = la if la < lb else lb
            for ci in range(ncand):
                jl = cand[ci] + 1
                if jl < 2 or jl > lim:
                    continue
                shift = ob + lb - jl
                if data[shift] != data[oa]:
                    continue
                ok = True
                ones = data[oa]
                for i in range(1, jl):
                    if data[oa + i] != data[shift + i]:
                        ok = False
                        break
                    ones += data[oa + i]
                if ok:
                    rows.append(a)
                    cols.append(b)
                    jlens.append(jl)
                    onecounts.append(ones)
    return (
        np.asarray(rows, dtype=np.int32),
        np.asarray(cols, dtype=np.int32),
        np.asarray(jlens, dtype=np.int32),
        np.asarray(onecounts, dtype=np.int32),
    )


def simulate_batch(w, s, p, runs, seed, step_cap=10**9):
    """See scanwait.kernels.pure.simulate_batch."""
    cdef int cw = int(w)
    cdef int cs = int(s)
    cdef double cp = float(p)
    cdef Py_ssize_t nruns = int(runs)
    cdef long long cap = int(step_cap)

    from numpy.random import PCG64, SeedSequence

    taus = np.empty(nruns, dtype=np.int64)
    ages = np.empty((nruns, cs), dtype=np.int64)
    cdef cnp.int64_t[::1] taus_v = taus
    cdef cnp.int64_t[:, ::1] ages_v = ages
    ring_arr = np.zeros(cw, dtype=np.uint8)
    cdef cnp.uint8_t[::1] ring = ring_arr

    cdef bitgen_t *rng
    cdef Py_ssize_t r
    cdef long long t
    cdef int pos, count, hit, k, idx, i, slot

    for r in range(nruns):
        bg = PCG64(SeedSequence(seed, spawn_key=(r,)))
        capsule = bg.capsule
        rng = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
        for i in range(cw):
            ring[i] = 0
        count = 0
        t = 0
        with nogil:
            while True:
                t += 1
                if t > cap:
                    break
                pos = <int> (t % cw)
                count -= ring[pos]
                hit = 1 if rng.next_double(rng.state) < cp else 0
                ring[pos] = <cnp.uint8_t> hit
                count += hit
                if count == cs:
                    k = 0
                    idx = cs - 1
                    while idx >= 0:
                        slot = pos - k
                        if slot < 0:
                            slot += cw
                        if ring[slot]:
                            ages_v[r, idx] = k
                            idx -= 1
                        k += 1
                    taus_v[r] = t
                    break
        if t > cap:
            raise IterationCapError(
                f"replication {r} exceeded {step_cap} steps (w={w}, s={s}, p={p})"
            )
    return taus, ages
