"""Monte Carlo oracle for the windowed success process.

``run_one`` steps a single replication with an O(1)-per-step sliding window
(success count plus a ring of the last w outcomes) and is the reference
implementation; ``run_batch`` runs many replications through the kernel
backend, which consumes random numbers identically, so a batch reproduces
``run_one`` bit for bit, replication by replication.

Replication r draws from PCG64 seeded with SeedSequence(seed, spawn_key=(r,)),
one uniform per time step, which makes every replication independent of the
others and the whole batch a pure function of the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import kernels
from .errors import InvalidParameterError, IterationCapError
from .patterns import EndingPattern, PatternSet, enumerate_patterns

#: Hard per-replication step limit; hitting it raises IterationCapError.
STEP_CAP = 10**9


@dataclass(frozen=True)
class SimConfig:
    """Batch description: process parameters, replication count, and seed."""

    w: int
    s: int
    p: float
    runs: int
    seed: int

    def __post_init__(self) -> None:
        if self.s < 1 or self.w < self.s:
            raise InvalidParameterError(f"need 1 <= s <= w, got w={self.w}, s={self.s}")
        if not 0.0 < self.p <= 1.0:
            raise InvalidParameterError(f"need 0 < p <= 1, got p={self.p}")
        if self.runs < 1:
            raise InvalidParameterError(f"need runs >= 1, got {self.runs}")
        if not isinstance(self.seed, (int, np.integer)):
            raise InvalidParameterError("seed must be an integer")


@dataclass
class SimResult:
    """Aggregated batch output.

    ``taus`` and ``pattern_indices`` are per-replication arrays (indices into
    ``pattern_set``); the summary fields carry the usual estimators with
    their standard errors.
    """

    config: SimConfig
    pattern_set: PatternSet
    taus: np.ndarray
    pattern_indices: np.ndarray
    mean: float
    variance: float
    mean_std_error: float
    frequencies: np.ndarray
    frequency_std_errors: np.ndarray

    def samples(self) -> Iterator[tuple[int, EndingPattern]]:
        for t, i in zip(self.taus, self.pattern_indices):
            yield int(t), self.pattern_set[int(i)]

    def to_dict(self) -> dict:
        return {
            "w": self.config.w,
            "s": self.config.s,
            "p": float(self.config.p),
            "runs": self.config.runs,
            "seed": int(self.config.seed),
            "mean": float(self.mean),
            "variance": float(self.variance),
            "mean_std_error": float(self.mean_std_error),
            "distribution": [
                {
                    "pattern": str(pat),
                    "prob": float(f),
                    "std_error": float(se),
                    "count": int(round(f * self.config.runs)),
                }
                for pat, f, se in zip(
                    self.pattern_set, self.frequencies, self.frequency_std_errors
                )
            ],
        }


def _ages_to_bits(ages: np.ndarray) -> tuple[int, ...]:
    length = int(ages[0]) + 1
    bits = [0] * length
    for a in ages:
        bits[length - 1 - int(a)] = 1
    return tuple(bits)


def run_one(
    w: int,
    s: int,
    p: float,
    rng: np.random.Generator,
    *,
    step_cap: int = STEP_CAP,
    debug: bool = False,
) -> tuple[int, EndingPattern]:
    """One replication; returns (tau, realised ending pattern).

    ``p`` may be 1.0 (deterministic process).  With ``debug=True`` the full
    outcome sequence is kept and the window invariant is re-verified by an
    exhaustive scan: no w-wide window before tau may hold s successes.
    """
    if s < 1 or w < s:
        raise InvalidParameterError(f"need 1 <= s <= w, got w={w}, s={s}")
    if not 0.0 < p <= 1.0:
        raise InvalidParameterError(f"need 0 < p <= 1, got p={p}")
    ring = bytearray(w)
    count = 0
    t = 0
    outcomes: list[int] = []
    while True:
        t += 1
        if t > step_cap:
            raise IterationCapError(f"replication exceeded {step_cap} steps")
        pos = t % w
        count -= ring[pos]
        hit = 1 if rng.random() < p else 0
        ring[pos] = hit
        count += hit
        if debug:
            outcomes.append(hit)
        if count == s:
            ages = sorted(
                (k for k in range(min(t, w)) if ring[(pos - k) % w]), reverse=True
            )
            assert len(ages) == s
            pattern = EndingPattern(_ages_to_bits(np.asarray(ages)))
            break
    if debug:
        for t_end in range(1, t):
            window = outcomes[max(0, t_end - w) : t_end]
            if sum(window) >= s:
                raise AssertionError(
                    f"window invariant violated at step {t_end} before tau={t}"
                )
        assert sum(outcomes[max(0, t - w) : t]) == s
    return t, pattern


def run_batch(config: SimConfig, *, step_cap: int = STEP_CAP) -> SimResult:
    """Run the configured replications through the active kernel backend."""
    ps = enumerate_patterns(config.w, config.s)
    taus, ages = kernels.simulate_batch(
        config.w, config.s, config.p, config.runs, config.seed, step_cap
    )
    index = {pat.bits: i for i, pat in enumerate(ps)}
    idxs = np.empty(config.runs, dtype=np.int32)
    for r in range(config.runs):
        idxs[r] = index[_ages_to_bits(ages[r])]

    n = config.runs
    mean = float(taus.mean())
    variance = float(taus.var(ddof=1)) if n > 1 else 0.0
    mean_se = math.sqrt(variance / n) if n > 1 else 0.0
    counts = np.bincount(idxs, minlength=len(ps)).astype(np.float64)
    freqs = counts / n
    freq_se = np.sqrt(freqs * (1.0 - freqs) / n)
    return SimResult(
        config=config,
        pattern_set=ps,
        taus=taus,
        pattern_indices=idxs,
        mean=mean,
        variance=variance,
        mean_std_error=mean_se,
        frequencies=freqs,
        frequency_std_errors=freq_se,
    )
