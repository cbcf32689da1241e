"""Pure-Python kernel implementations.

Same contracts as the compiled extension in ``_ckernels``; used when the
extension is unavailable or when ``SCANWAIT_PURE=1`` forces the fallback.
See ``scanwait.kernels`` for the selection logic and the contract notes.
"""

from __future__ import annotations

import numpy as np

from ..errors import IterationCapError


def overlap_structure(flat, offsets):
    """Index every tail/head overlap of length >= 2 between pattern pairs.

    ``flat``/``offsets`` pack N binary patterns CSR-style.  Returns four
    aligned int32 arrays (rows, cols, lengths, ones): for each entry, the
    length-``lengths`` prefix of pattern ``rows`` equals the same-length
    suffix of pattern ``cols`` and contains ``ones`` one-symbols.  Length-1
    overlaps are omitted: for ending patterns (first and last symbol 1) they
    always match and carry exactly one success.

    Precondition: every pattern starts and ends with a 1 (the candidate
    enumeration relies on it); pattern families always satisfy this.
    """
    flat = np.ascontiguousarray(flat, dtype=np.uint8)
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    n = len(offsets) - 1
    data = flat.tobytes()
    starts = [int(offsets[i]) for i in range(n)]
    lengths = [int(offsets[i + 1] - offsets[i]) for i in range(n)]
    # Candidate overlap lengths for row a: the last aligned symbol pair is
    # (a[len-1], col's final 1), so len-1 must be a one-position of a.
    one_positions = [
        [i for i in range(lengths[a]) if data[starts[a] + i]] for a in range(n)
    ]
    prefix_ones = []
    for a in range(n):
        acc, cum = 0, [0]
        for i in range(lengths[a]):
            acc += data[starts[a] + i]
            cum.append(acc)
        prefix_ones.append(cum)

    rows: list[int] = []
    cols: list[int] = []
    jlens: list[int] = []
    ones: list[int] = []
    for a in range(n):
        oa = starts[a]
        la = lengths[a]
        cand = one_positions[a]
        cum_a = prefix_ones[a]
        for b in range(n):
            ob = starts[b]
            lb = lengths[b]
            lim = la if la < lb else lb
            for pos in cand:
                jl = pos + 1
                if jl < 2 or jl > lim:
                    continue
                shift = ob + lb - jl
                if data[shift] != data[oa]:  # first aligned pair must agree
                    continue
                for i in range(1, jl):
                    if data[oa + i] != data[shift + i]:
                        break
                else:
                    rows.append(a)
                    cols.append(b)
                    jlens.append(jl)
                    ones.append(cum_a[jl])
    return (
        np.asarray(rows, dtype=np.int32),
        np.asarray(cols, dtype=np.int32),
        np.asarray(jlens, dtype=np.int32),
        np.asarray(ones, dtype=np.int32),
    )


def simulate_batch(w, s, p, runs, seed, step_cap=10**9):
    """Replicate the windowed success process ``runs`` times.

    Replication ``r`` consumes one uniform per time step from the stream
    PCG64(SeedSequence(seed, spawn_key=(r,))), so output is fully determined
    by ``seed`` and identical across kernel backends.  Returns
    (taus int64[runs], ages int64[runs, s]) with ages oldest-first.
    """
    w = int(w)
    s = int(s)
    p = float(p)
    taus = np.empty(runs, dtype=np.int64)
    ages = np.empty((runs, s), dtype=np.int64)
    for r in range(runs):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(r,))))
        ring = bytearray(w)
        count = 0
        t = 0
        block = rng.random(64)
        bi = 0
        nb = 64
        while True:
            if bi == nb:
                nb = min(4096, nb * 2)
                block = rng.random(nb)
                bi = 0
            t += 1
            if t > step_cap:
                raise IterationCapError(
                    f"replication {r} exceeded {step_cap} steps (w={w}, s={s}, p={p})"
                )
            pos = t % w
            count -= ring[pos]
            hit = 1 if block[bi] < p else 0
            bi += 1
            ring[pos] = hit
            count += hit
            if count == s:
                k = 0
                idx = s - 1
                while idx >= 0:
                    if ring[(pos - k) % w]:
                        ages[r, idx] = k
                        idx -= 1
                    k += 1
                taus[r] = t
                break
    return taus, ages
