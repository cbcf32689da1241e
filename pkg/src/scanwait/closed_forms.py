"""Exact closed forms for the unlimited-window case and for s = 2.

These serve both as fast paths (no linear system) and as independent
oracles for the dense solver.

Unlimited window: the waiting time is a sum of s i.i.d. geometric variables
(a negative binomial), so

    P(tau = n)   = C(n-1, s-1) (1-p)^(n-s) p^s
    E(tau)       = s / p
    Var(tau)     = s (1-p) / p^2
    P(pattern x) = (1-p)^(l-s) p^(s-1)      for a length-l pattern.

s = 2, window w: completion decomposes into M attempts at a "first" success
(each geometric), a forfeited stretch of w-1 steps per failed attempt, and
the final gap L <= w-1 between the two successes:

    tau = T_1 + ... + T_M + (M-1)(w-1) + L,
    P(L = n) = (1-p)^(n-1) p / (1 - (1-p)^(w-1)),    n in {1, ..., w-1},
    E(tau)   = 1/p + 1 / (p (1 - (1-p)^(w-1))).

The variance follows from the independence of M, the T_j and L; the second
factorial moment of L is evaluated through the closed second derivative of
(1 - q^w)/(1 - q) in q = 1-p (no numerical differentiation: this function
is an oracle at 1e-8 tolerances).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .algebra import ProbLike, as_probability
from .errors import InvalidParameterError
from .patterns import BitsLike, EndingPattern, coerce_bits


def _qpow(q: float, n: int) -> float:
    """q**n, evaluated on the log scale for large n to dodge pow() quirks."""
    if n == 0:
        return 1.0
    if n > 1000:
        return math.exp(n * math.log(q))
    return q**n


@dataclass(frozen=True)
class InfiniteWindowStats:
    """Moments of the unlimited-window waiting time."""

    s: int
    p: float
    expectation: float
    variance: float


def expectation_infinite(s: int, prob: ProbLike) -> float:
    """E(tau) with no window limit: s/p."""
    if s < 1:
        raise InvalidParameterError(f"s must be >= 1, got {s}")
    return s / as_probability(prob).p


def variance_infinite(s: int, prob: ProbLike) -> float:
    """Var(tau) with no window limit: s(1-p)/p^2."""
    if s < 1:
        raise InvalidParameterError(f"s must be >= 1, got {s}")
    tp = as_probability(prob)
    return s * tp.q / (tp.p * tp.p)


def infinite_stats(s: int, prob: ProbLike) -> InfiniteWindowStats:
    tp = as_probability(prob)
    return InfiniteWindowStats(
        s=int(s),
        p=tp.p,
        expectation=expectation_infinite(s, tp),
        variance=variance_infinite(s, tp),
    )


def pmf_infinite(n: int, s: int, prob: ProbLike) -> float:
    """P(tau = n) with no window limit (negative binomial)."""
    if s < 1:
        raise InvalidParameterError(f"s must be >= 1, got {s}")
    if n < s:
        raise InvalidParameterError(f"n must be >= s, got n={n}, s={s}")
    tp = as_probability(prob)
    if n > 1000:  # keep huge binomials and tiny powers on the log scale
        return math.exp(
            math.lgamma(n) - math.lgamma(s) - math.lgamma(n - s + 1)
            + (n - s) * math.log(tp.q)
            + s * math.log(tp.p)
        )
    return comb(n - 1, s - 1) * _qpow(tp.q, n - s) * tp.p**s


def pattern_prob_infinite(pattern: BitsLike, prob: ProbLike) -> float:
    """Probability of one ending pattern when no state is ever discarded.

    Depends only on the pattern length l: (1-p)^(l-s) p^(s-1).
    """
    bits = coerce_bits(pattern)
    pat = pattern if isinstance(pattern, EndingPattern) else EndingPattern(bits)
    tp = as_probability(prob)
    return _qpow(tp.q, pat.length - pat.ones) * tp.p ** (pat.ones - 1)


def _check_w2(w: int) -> None:
    if w < 2:
        raise InvalidParameterError(f"w must be >= 2 for the s=2 closed forms, got {w}")


def expectation_s2(w: int, prob: ProbLike) -> float:
    """E(tau) for s = 2 and window w."""
    _check_w2(w)
    tp = as_probability(prob)
    ok = 1.0 - _qpow(tp.q, w - 1)  # second success lands within the window
    return 1.0 / tp.p + 1.0 / (tp.p * ok)


def _gap_mean(w: int, p: float, q: float, ok: float) -> float:
    """E(L): mean gap between the two successes, conditioned on success."""
    return (1.0 - _qpow(q, w) - w * p * _qpow(q, w - 1)) / (p * ok)


def variance_s2(w: int, prob: ProbLike) -> float:
    """Var(tau) for s = 2 and window w."""
    _check_w2(w)
    tp = as_probability(prob)
    p, q = tp.p, tp.q
    ok = 1.0 - _qpow(q, w - 1)

    mean_t = 1.0 / p
    var_t = q / (p * p)
    mean_m = 1.0 / ok
    var_m = _qpow(q, w - 1) / (ok * ok)

    mean_l = _gap_mean(w, p, q, ok)
    # d^2/dq^2 [(1 - q^w)/(1 - q)], written out once; zero for w = 2.
    d2 = (
        -w * (w - 1) * _qpow(q, w - 2) / p
        - 2.0 * w * _qpow(q, w - 1) / (p * p)
        + 2.0 * (1.0 - _qpow(q, w)) / (p * p * p)
    )
    mean_l2 = mean_l + (p * q / ok) * d2
    var_l = mean_l2 - mean_l * mean_l

    return (
        mean_m * var_t
        + var_m * mean_t * mean_t
        + 2.0 * (w - 1) * var_m * mean_t
        + (w - 1) ** 2 * var_m
        + var_l
    )


def pattern_dist_s2(w: int, prob: ProbLike) -> np.ndarray:
    """Ending-pattern distribution for s = 2 over the gap n in {1, ..., w-1}.

    Entry n-1 is the probability of the pattern of length n+1 (a success, n-1
    failures, a success), which is also position n-1 in the canonical pattern
    order for (w, 2).
    """
    _check_w2(w)
    tp = as_probability(prob)
    p, q = tp.p, tp.q
    ok = 1.0 - _qpow(q, w - 1)
    gaps = np.arange(1, w)
    return q ** (gaps - 1.0) * p / ok
