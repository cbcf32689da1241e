"""Unlimited-window approximation error and small-p asymptotics.

``epsilon(w, s, p)`` is the probability that fewer than s successes occur in
w trials, i.e. that the process is still running after w steps.  It controls
how well the unlimited-window closed forms approximate the finite-window
quantities:

    (E(tau_w) - s/p) / E(tau_w)          <  epsilon
    L1(pattern laws, finite vs infinite) <  2 epsilon

From these come the cheap thresholds

    w_star = min{ w : epsilon(w, s, p) < delta }
    p_star = the unique p with epsilon(w, s, p) = delta

which upper-bound the exact thresholds ``true_w_star``/``true_p_star``
defined directly on the relative expectation gap (those need the dense
solver and are correspondingly slower).

In the opposite regime p -> 0, the expectation scales like 1/(N p^s) with
N = C(w-1, s-1), and the ending-pattern law tends to uniform over the N
patterns.  The convergence rate is not quantified here, only the limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb
from typing import Optional, Union

import numpy as np

from .algebra import ProbLike, as_probability
from .closed_forms import expectation_infinite
from .errors import InvalidParameterError, NoRootError
from .patterns import DEFAULT_ENUMERATION_CAP, pattern_count

#: Bracket and tolerance for the p_star bisection.
_P_BRACKET = (1e-12, 1.0 - 1e-12)
_P_TOL = 1e-12


def epsilon(w: int, s: int, prob: ProbLike) -> float:
    """P(fewer than s successes in w trials) = sum_{i<s} C(w,i) p^i (1-p)^(w-i)."""
    if s < 1 or w < s:
        raise InvalidParameterError(f"need 1 <= s <= w, got w={w}, s={s}")
    tp = as_probability(prob)
    log_p, log_q = math.log(tp.p), math.log(tp.q)
    total = 0.0
    for i in range(s):
        if w > 1000:
            log_c = math.lgamma(w + 1) - math.lgamma(i + 1) - math.lgamma(w - i + 1)
            total += math.exp(log_c + i * log_p + (w - i) * log_q)
        else:
            total += comb(w, i) * tp.p**i * tp.q ** (w - i)
    return min(total, 1.0)


def infinite_tail_mass(w: int, s: int, prob: ProbLike) -> float:
    """Total unlimited-window probability on patterns longer than w.

    A pattern of length l > w arises iff the last s successes span more than
    w steps; summing the per-length masses telescopes to the epsilon of a
    one-smaller target in a one-smaller window.  Zero for s = 1 (all
    patterns have length 1).
    """
    if s == 1:
        return 0.0
    return epsilon(w - 1, s - 1, prob)


def w_star(s: int, prob: ProbLike, delta: float) -> int:
    """Smallest w with epsilon(w, s, p) < delta (scan upward from w = s)."""
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    tp = as_probability(prob)
    w = s
    while epsilon(w, s, tp) >= delta:
        w += 1
    return w


def p_star(w: int, s: int, delta: float) -> float:
    """The p at which epsilon(w, s, p) crosses delta, by bisection.

    epsilon is strictly decreasing in p at fixed w >= s; returns the upper
    endpoint of the final bracket, i.e. the smallest p certified to satisfy
    epsilon < delta.  Raises NoRootError when even p -> 1 cannot reach delta
    (e.g. w = s with delta <= 1 - p^s at the bracket edge).
    """
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    if s < 1 or w < s:
        raise InvalidParameterError(f"need 1 <= s <= w, got w={w}, s={s}")
    lo, hi = _P_BRACKET
    if epsilon(w, s, hi) >= delta:
        raise NoRootError(
            f"epsilon(w={w}, s={s}, p) stays >= delta={delta} across the whole bracket"
        )
    if epsilon(w, s, lo) < delta:
        return lo
    while hi - lo > _P_TOL:
        mid = 0.5 * (lo + hi)
        if epsilon(w, s, mid) < delta:
            hi = mid
        else:
            lo = mid
    return hi


def _relative_gap(w: int, s: int, prob: ProbLike, **solver_kwargs) -> float:
    from .solver import solve_first_moment

    tp = as_probability(prob)
    if tp.p >= 1.0 - 1e-6:
        # Degenerate limit: E(tau) -> s, so the gap is 1 - 1/p (~ 0 from
        # below); the dense system would overflow in (1/q)-powers here.
        return (s - expectation_infinite(s, tp)) / s
    e_w = solve_first_moment(w, s, tp, **solver_kwargs).expectation
    return (e_w - expectation_infinite(s, tp)) / e_w


def true_w_star(s: int, prob: ProbLike, delta: float, **solver_kwargs) -> int:
    """Smallest w whose exact relative expectation gap drops below delta.

    Uses the dense solver for E(tau); the gap is non-increasing in w, so an
    upward scan terminates at the first hit.  Always <= w_star.
    """
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    tp = as_probability(prob)
    w = s
    while _relative_gap(w, s, tp, **solver_kwargs) >= delta:
        w += 1
    return w


def true_p_star(w: int, s: int, delta: float, *, tol: float = 1e-9, **solver_kwargs) -> float:
    """The p at which the exact relative expectation gap crosses delta.

    Bisection on the gap, which decreases from ~1 (p -> 0) to 0 (p -> 1);
    returns the upper endpoint of the final bracket.  Always <= p_star's
    analogue in the sense that the certified region is larger.
    """
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    if s < 1 or w < s:
        raise InvalidParameterError(f"need 1 <= s <= w, got w={w}, s={s}")
    lo, hi = 1e-9, 1.0 - 1e-9
    if _relative_gap(w, s, hi, **solver_kwargs) >= delta:
        raise NoRootError(f"relative gap stays >= delta={delta} across the whole bracket")
    if _relative_gap(w, s, lo, **solver_kwargs) < delta:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _relative_gap(w, s, mid, **solver_kwargs) < delta:
            hi = mid
        else:
            lo = mid
    return hi


def asymptotic_expectation(w: int, s: int, prob: ProbLike) -> float:
    """Small-p limit of E(tau): 1 / (C(w-1, s-1) p^s)."""
    if s < 1 or w < s:
        raise InvalidParameterError(f"need 1 <= s <= w, got w={w}, s={s}")
    tp = as_probability(prob)
    return 1.0 / (pattern_count(w, s) * tp.p**s)


def asymptotic_distribution(w: int, s: int, *, cap: Optional[int] = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Small-p limit of the ending-pattern law: uniform over the family."""
    if s < 1 or w < s:
        raise InvalidParameterError(f"need 1 <= s <= w, got w={w}, s={s}")
    n = pattern_count(w, s)
    if cap is not None and n > cap:
        from .errors import EnumerationCapError

        raise EnumerationCapError(f"family size {n} exceeds the cap {cap}")
    return np.full(n, 1.0 / n)


@dataclass(frozen=True)
class ApproxReport:
    """Threshold-search outcome destined for serialisation.

    ``epsilon`` is evaluated at the returned threshold; the L1 bound on the
    pattern laws is twice that.
    """

    kind: str
    threshold: Union[int, float]
    delta: float
    epsilon: float
    bound_kind: str = "expectation-relative"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "threshold": self.threshold if isinstance(self.threshold, int) else float(self.threshold),
            "delta": float(self.delta),
            "epsilon": float(self.epsilon),
            "bound_kind": self.bound_kind,
            "distribution_l1_bound": 2.0 * float(self.epsilon),
        }
