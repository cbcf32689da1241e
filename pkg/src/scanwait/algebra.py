"""Overlap products on binary strings.

Two scalar products populate the waiting-time linear systems:

* ``star(x, y)`` sums, over every way the tail of ``x`` can exactly overlap
  the head of ``y``, the product of reciprocal symbol probabilities of the
  matched symbols.  It measures how strongly one string's ending feeds the
  other's beginning.
* ``dagger(x, y)`` is the same sum with each overlap of length ``j``
  weighted by ``(1 - j)``; the length-1 overlap therefore never contributes.

Both accept arbitrary non-empty binary strings, not just ending patterns,
because the second-moment systems and the tests want free-form inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import InvalidParameterError
from .patterns import BitsLike, coerce_bits


@dataclass(frozen=True)
class TrialProbability:
    """Per-trial success probability, strictly inside (0, 1)."""

    p: float

    def __post_init__(self) -> None:
        p = float(self.p)
        object.__setattr__(self, "p", p)
        if not 0.0 < p < 1.0:
            raise InvalidParameterError(f"success probability must satisfy 0 < p < 1, got {p}")

    @property
    def q(self) -> float:
        return 1.0 - self.p


ProbLike = Union[TrialProbability, float]


def as_probability(prob: ProbLike) -> TrialProbability:
    if isinstance(prob, TrialProbability):
        return prob
    return TrialProbability(float(prob))


def delta(a: int, b: int, prob: ProbLike) -> float:
    """Reciprocal-probability weight of a symbol match: 1/p, 1/(1-p), or 0."""
    if a not in (0, 1) or b not in (0, 1):
        raise InvalidParameterError(f"delta arguments must be bits, got ({a}, {b})")
    if a != b:
        return 0.0
    tp = as_probability(prob)
    return 1.0 / tp.p if a == 1 else 1.0 / tp.q


def _overlap_terms(x: tuple[int, ...], y: tuple[int, ...], prob: TrialProbability):
    """Yield (j, weight) for every exact overlap of x's length-j tail with y's head."""
    k, m = len(x), len(y)
    inv_p = 1.0 / prob.p
    inv_q = 1.0 / prob.q
    for j in range(1, min(k, m) + 1):
        w = 1.0
        start = k - j
        for i in range(j):
            a = x[start + i]
            if a != y[i]:
                w = 0.0
                break
            w *= inv_p if a else inv_q
        if w:
            yield j, w


def star(x: BitsLike, y: BitsLike, prob: ProbLike) -> float:
    """Weighted tail-of-x / head-of-y overlap score."""
    xb, yb = coerce_bits(x), coerce_bits(y)
    tp = as_probability(prob)
    return sum(w for _, w in _overlap_terms(xb, yb, tp))


def dagger(x: BitsLike, y: BitsLike, prob: ProbLike) -> float:
    """Overlap score with each length-j term weighted by (1 - j)."""
    xb, yb = coerce_bits(x), coerce_bits(y)
    tp = as_probability(prob)
    return sum((1 - j) * w for j, w in _overlap_terms(xb, yb, tp))
