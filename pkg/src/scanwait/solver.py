"""Dense solves for the waiting-time moments and the ending-pattern law.

First moment and distribution.  With the N patterns in canonical order, the
vector v = (E(tau), P(x1), ..., P(xN)) solves A v = e1 where

    A = [[ 0, 1, ..., 1 ],
         [-1,     W      ]]

and W[i, j] is the overlap score between the head of pattern i and the tail
of pattern j: the expected-time reduction pattern j grants a bettor waiting
for pattern i.  Equivalently W[i, j] = star(x_j, x_i) in the convention of
``scanwait.algebra.star``.  A is nonsingular because no pattern is a
trailing substring of another, so the solution exists and is unique.

Second moment.  Two N-dimensional systems share the same W:

    W u = 1      and      D u + W v = 1   (componentwise ones),

with D[i, j] the (1-j)-weighted overlap score, and then

    E(tau^2) = (1 + (1 - sum v - sum u / 2) E(tau)) / (sum u / 2).

Numerics.  Systems are row-equilibrated and solved by LU with partial
pivoting; the reported condition estimate refers to the system as posed
(equilibrated estimate times the row-scale spread) and a warning is issued
above ``condition_warn``.  Entries of W blow up like p^-s, so for p below
``small_p_threshold`` the first moment is routed to the small-p asymptotics
instead of the solver.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.linalg import lapack

from . import kernels
from .algebra import ProbLike, as_probability
from .errors import (
    DimensionCapError,
    IllConditionedWarning,
    InvalidParameterError,
    MissingVarianceError,
    NegativeVarianceError,
    SingularMatrixError,
)
from .patterns import DEFAULT_ENUMERATION_CAP, PatternSet, enumerate_patterns

#: Below this success probability the solver defers to the small-p asymptotics.
SMALL_P_THRESHOLD = 1e-4

#: Estimated condition numbers above this trigger IllConditionedWarning.
CONDITION_WARN = 1e12

#: Dense systems larger than this are refused outright.
MAX_DIMENSION = 6000


@dataclass
class WindowStats:
    """Solved statistics of one (w, s, p) configuration.

    ``distribution`` follows the canonical order of ``pattern_set``.
    ``method`` records how the numbers were obtained ("lu" or
    "small-p-asymptotic").
    """

    w: int
    s: int
    p: float
    expectation: float
    distribution: Optional[np.ndarray] = None
    pattern_set: Optional[PatternSet] = None
    second_moment: Optional[float] = None
    variance: Optional[float] = None
    condition_estimate: Optional[float] = None
    method: str = "lu"

    def to_dict(self) -> dict:
        out: dict = {
            "w": int(self.w),
            "s": int(self.s),
            "p": float(self.p),
            "expectation": float(self.expectation),
        }
        if self.second_moment is not None:
            out["second_moment"] = float(self.second_moment)
        if self.variance is not None:
            out["variance"] = float(self.variance)
        if self.distribution is not None and self.pattern_set is not None:
            out["distribution"] = [
                {"pattern": str(pat), "prob": float(pr)}
                for pat, pr in zip(self.pattern_set, self.distribution)
            ]
        return out


@lru_cache(maxsize=16)
def _pattern_structure(w: int, s: int, cap: Optional[int]):
    ps = enumerate_patterns(w, s, cap=cap)
    flat, offsets = ps.packed
    rows, cols, jlens, ones = kernels.overlap_structure(flat, offsets)
    return ps, (rows, cols, jlens, ones)


def star_matrix(w: int, s: int, prob: ProbLike, *, cap: Optional[int] = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """W with W[i, j] = overlap score of pattern i's head against pattern j's tail."""
    tp = as_probability(prob)
    ps, (rows, cols, jlens, ones) = _pattern_structure(int(w), int(s), cap)
    n = len(ps)
    w_mat = np.full((n, n), 1.0 / tp.p)
    if len(rows):
        vals = (1.0 / tp.p) ** ones * (1.0 / tp.q) ** (jlens - ones)
        np.add.at(w_mat, (rows, cols), vals)
    return w_mat


def dagger_matrix(w: int, s: int, prob: ProbLike, *, cap: Optional[int] = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """D with D[i, j] = (1-j)-weighted overlap score (length-1 terms vanish)."""
    tp = as_probability(prob)
    ps, (rows, cols, jlens, ones) = _pattern_structure(int(w), int(s), cap)
    n = len(ps)
    d_mat = np.zeros((n, n))
    if len(rows):
        vals = (1.0 - jlens) * (1.0 / tp.p) ** ones * (1.0 / tp.q) ** (jlens - ones)
        np.add.at(d_mat, (rows, cols), vals)
    return d_mat


def _equilibrated_lu(a: np.ndarray):
    """Row-equilibrate, LU-factor, and estimate the condition of the raw system."""
    scale = np.abs(a).max(axis=1)
    if not np.all(np.isfinite(scale)) or np.any(scale == 0.0):
        raise SingularMatrixError("system has an empty or non-finite row")
    a_eq = a / scale[:, None]
    anorm = np.abs(a_eq).sum(axis=0).max()  # 1-norm
    lu, piv, info = lapack.dgetrf(a_eq)
    if info != 0:
        raise SingularMatrixError(f"LU factorisation failed (info={info})")
    rcond, info = lapack.dgecon(lu, anorm, norm="1")
    if info != 0 or rcond == 0.0:
        raise SingularMatrixError("condition estimation failed; system is singular")
    cond = (1.0 / rcond) * (scale.max() / scale.min())
    return lu, piv, scale, cond


def _lu_solve(lu, piv, scale, b: np.ndarray) -> np.ndarray:
    x, info = lapack.dgetrs(lu, piv, b / scale)
    if info != 0:
        raise SingularMatrixError(f"triangular solve failed (info={info})")
    return x


def _validate_inputs(w: int, s: int) -> None:
    if not isinstance(w, (int, np.integer)) or not isinstance(s, (int, np.integer)):
        raise InvalidParameterError("w and s must be finite integers")
    if s < 1 or w < s:
        raise InvalidParameterError(f"need 1 <= s <= w, got w={w}, s={s}")


def solve_first_moment(
    w: int,
    s: int,
    prob: ProbLike,
    *,
    cap: Optional[int] = DEFAULT_ENUMERATION_CAP,
    small_p_threshold: float = SMALL_P_THRESHOLD,
    condition_warn: float = CONDITION_WARN,
    max_dimension: int = MAX_DIMENSION,
) -> WindowStats:
    """E(tau) and the ending-pattern distribution for finite (w, s, p)."""
    _validate_inputs(w, s)
    tp = as_probability(prob)

    if tp.p < small_p_threshold:
        # The system is hopelessly ill-conditioned down here and the small-p
        # limit is accurate: E(tau) ~ 1/(N p^s), distribution ~ uniform.
        from .approx import asymptotic_distribution, asymptotic_expectation

        ps = enumerate_patterns(w, s, cap=cap)
        return WindowStats(
            w=int(w),
            s=int(s),
            p=tp.p,
            expectation=asymptotic_expectation(w, s, tp),
            distribution=asymptotic_distribution(w, s, cap=cap),
            pattern_set=ps,
            method="small-p-asymptotic",
        )

    ps, _ = _pattern_structure(int(w), int(s), cap)
    n = len(ps)
    if n + 1 > max_dimension:
        raise DimensionCapError(
            f"dense system of size {n + 1} exceeds the limit {max_dimension}"
        )
    w_mat = star_matrix(w, s, tp, cap=cap)
    a = np.zeros((n + 1, n + 1))
    a[0, 1:] = 1.0
    a[1:, 0] = -1.0
    a[1:, 1:] = w_mat

    lu, piv, scale, cond = _equilibrated_lu(a)
    if cond > condition_warn:
        warnings.warn(
            f"waiting-time system at (w={w}, s={s}, p={tp.p}) has estimated "
            f"condition {cond:.2e}; results may lose accuracy",
            IllConditionedWarning,
            stacklevel=2,
        )
    e1 = np.zeros(n + 1)
    e1[0] = 1.0
    v = _lu_solve(lu, piv, scale, e1)

    expectation = float(v[0])
    dist = v[1:].copy()
    # Round-off can leave harmless negative dust; anything sizeable is real trouble.
    floor = -1e-9 * max(1.0, float(np.abs(dist).max()))
    if dist.min() < floor:
        raise SingularMatrixError(
            f"distribution came out negative ({dist.min():.3e}) at (w={w}, s={s}, p={tp.p})"
        )
    np.clip(dist, 0.0, None, out=dist)

    return WindowStats(
        w=int(w),
        s=int(s),
        p=tp.p,
        expectation=expectation,
        distribution=dist,
        pattern_set=ps,
        condition_estimate=cond,
        method="lu",
    )


def solve_second_moment(
    w: int,
    s: int,
    prob: ProbLike,
    *,
    cap: Optional[int] = DEFAULT_ENUMERATION_CAP,
    small_p_threshold: float = SMALL_P_THRESHOLD,
    condition_warn: float = CONDITION_WARN,
    max_dimension: int = MAX_DIMENSION,
    variance_tolerance: float = 1e-6,
) -> WindowStats:
    """First two moments of tau plus the ending-pattern distribution."""
    _validate_inputs(w, s)
    tp = as_probability(prob)
    if tp.p < small_p_threshold:
        raise InvalidParameterError(
            f"p={tp.p} sits below the solver threshold {small_p_threshold} and no "
            "small-p second-moment asymptotic is available"
        )

    stats = solve_first_moment(
        w,
        s,
        tp,
        cap=cap,
        small_p_threshold=small_p_threshold,
        condition_warn=condition_warn,
        max_dimension=max_dimension,
    )
    n = len(stats.pattern_set)
    if n > max_dimension:
        raise DimensionCapError(f"dense system of size {n} exceeds the limit {max_dimension}")

    w_mat = star_matrix(w, s, tp, cap=cap)
    d_mat = dagger_matrix(w, s, tp, cap=cap)

    lu, piv, scale, cond = _equilibrated_lu(w_mat)
    if cond > condition_warn:
        warnings.warn(
            f"second-moment system at (w={w}, s={s}, p={tp.p}) has estimated "
            f"condition {cond:.2e}; results may lose accuracy",
            IllConditionedWarning,
            stacklevel=2,
        )
    ones_vec = np.ones(n)
    u = _lu_solve(lu, piv, scale, ones_vec)
    v = _lu_solve(lu, piv, scale, ones_vec - d_mat @ u)

    su = float(u.sum())
    sv = float(v.sum())
    e_tau = stats.expectation
    second = (1.0 + (1.0 - sv - su / 2.0) * e_tau) / (su / 2.0)
    variance = second - e_tau * e_tau
    if variance < -variance_tolerance * abs(second):
        raise NegativeVarianceError(
            f"variance {variance:.6e} is negative beyond round-off at (w={w}, s={s}, p={tp.p})"
        )
    variance = max(variance, 0.0)

    stats.second_moment = second
    stats.variance = variance
    stats.condition_estimate = max(cond, stats.condition_estimate or 0.0)
    return stats


def std_dev(stats: WindowStats) -> float:
    """Standard deviation of tau from a stats object carrying a variance."""
    if stats.variance is None:
        raise MissingVarianceError("stats carries no variance; run solve_second_moment")
    return math.sqrt(stats.variance)
