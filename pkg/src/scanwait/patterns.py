"""Enumeration of ending patterns for the s-successes-within-a-window process.

An ending pattern is the binary string recording when each of the required
successes occurred within the final stretch of trials at the moment the
process completes.  Its first and last symbols are always successes and it
never spans more than the window.  For window size ``w`` and target count
``s`` there are ``C(w-1, s-1)`` such patterns: the last success is pinned to
the final position, and the remaining ``s-1`` successes are distributed over
the preceding ``w-1`` slots.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations
from math import comb
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import EnumerationCapError, InvalidParameterError

#: Refuse to enumerate families larger than this unless the caller overrides.
DEFAULT_ENUMERATION_CAP = 5_000_000

_PATTERN_TEXT = re.compile(r"[01]+")

BitsLike = Union["EndingPattern", Sequence[int], str]


def coerce_bits(value: BitsLike) -> tuple[int, ...]:
    """Normalise a pattern-like value ('101', (1,0,1), EndingPattern) to a bit tuple."""
    if isinstance(value, EndingPattern):
        return value.bits
    if isinstance(value, str):
        if not _PATTERN_TEXT.fullmatch(value):
            raise InvalidParameterError(f"not a binary string: {value!r}")
        return tuple(1 if c == "1" else 0 for c in value)
    bits = tuple(int(b) for b in value)
    if not bits:
        raise InvalidParameterError("empty bit sequence")
    if any(b not in (0, 1) for b in bits):
        raise InvalidParameterError(f"bits must be 0 or 1, got {bits}")
    return bits


def bits_to_string(bits: Sequence[int]) -> str:
    return "".join("1" if b else "0" for b in bits)


@dataclass(frozen=True)
class EndingPattern:
    """A binary string whose first and last symbols are successes."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        bits = tuple(int(b) for b in self.bits)
        object.__setattr__(self, "bits", bits)
        if not bits:
            raise InvalidParameterError("pattern must be non-empty")
        if any(b not in (0, 1) for b in bits):
            raise InvalidParameterError("pattern symbols must be 0 or 1")
        if bits[0] != 1 or bits[-1] != 1:
            raise InvalidParameterError(
                f"pattern must start and end with a success: {bits_to_string(bits)}"
            )

    @classmethod
    def from_string(cls, text: str) -> "EndingPattern":
        return cls(coerce_bits(text))

    @property
    def length(self) -> int:
        return len(self.bits)

    @property
    def ones(self) -> int:
        return sum(self.bits)

    def ages(self) -> list[int]:
        """Ages of the successes, oldest first; the final success has age 0.

        A success at (1-indexed) position ``i`` of a length-``l`` pattern
        happened ``l - i`` steps before the pattern completed.
        """
        l = len(self.bits)
        return [l - i for i, b in enumerate(self.bits, start=1) if b]

    def __str__(self) -> str:
        return bits_to_string(self.bits)

    def __len__(self) -> int:
        return len(self.bits)


def ages_from_pattern(pattern: BitsLike) -> list[int]:
    """Ages encoded by a pattern, oldest first (see EndingPattern.ages)."""
    if not isinstance(pattern, EndingPattern):
        pattern = EndingPattern(coerce_bits(pattern))
    return pattern.ages()


@dataclass(frozen=True)
class PatternSet:
    """All ending patterns for ``(w, s)`` in canonical order.

    Canonical order: length ascending, ties broken by the bit string read as
    a binary number, ascending.  The order is what makes solver matrices and
    probability vectors reproducible across runs.
    """

    w: int
    s: int
    patterns: tuple[EndingPattern, ...]

    def __len__(self) -> int:
        return len(self.patterns)

    def __iter__(self) -> Iterator[EndingPattern]:
        return iter(self.patterns)

    def __getitem__(self, i: int) -> EndingPattern:
        return self.patterns[i]

    @cached_property
    def _index(self) -> dict[tuple[int, ...], int]:
        return {pat.bits: i for i, pat in enumerate(self.patterns)}

    def index_of(self, pattern: BitsLike) -> int:
        bits = coerce_bits(pattern)
        try:
            return self._index[bits]
        except KeyError:
            raise InvalidParameterError(
                f"pattern {bits_to_string(bits)} is not in the (w={self.w}, s={self.s}) family"
            ) from None

    def strings(self) -> list[str]:
        return [str(p) for p in self.patterns]

    @cached_property
    def packed(self) -> tuple[np.ndarray, np.ndarray]:
        """Flat uint8 symbol array plus int64 offsets (CSR-style), for kernels."""
        offsets = np.zeros(len(self.patterns) + 1, dtype=np.int64)
        for i, pat in enumerate(self.patterns):
            offsets[i + 1] = offsets[i] + len(pat.bits)
        flat = np.empty(int(offsets[-1]), dtype=np.uint8)
        for i, pat in enumerate(self.patterns):
            flat[offsets[i] : offsets[i + 1]] = pat.bits
        return flat, offsets

    @cached_property
    def ages_matrix(self) -> np.ndarray:
        """(N, s) int64 matrix of success ages per pattern, oldest first."""
        out = np.empty((len(self.patterns), self.s), dtype=np.int64)
        for i, pat in enumerate(self.patterns):
            out[i] = pat.ages()
        return out


def pattern_count(w: int, s: int) -> int:
    return comb(w - 1, s - 1)


def _validate_ws(w: int, s: int) -> None:
    if not isinstance(s, (int, np.integer)) or not isinstance(w, (int, np.integer)):
        raise InvalidParameterError("w and s must be integers")
    if s < 1:
        raise InvalidParameterError(f"s must be >= 1, got {s}")
    if w < s:
        raise InvalidParameterError(f"w must be >= s, got w={w}, s={s}")


@lru_cache(maxsize=64)
def _enumerate_cached(w: int, s: int) -> PatternSet:
    if s == 1:
        # Single success: the only pattern is the lone success itself.
        return PatternSet(w, s, (EndingPattern((1,)),))
    pats: list[EndingPattern] = []
    for l in range(s, w + 1):
        # First and last symbols fixed; choose the middle ones.  Reversing the
        # lexicographic combination order yields ascending binary value.
        for mids in reversed(list(combinations(range(1, l - 1), s - 2))):
            bits = [0] * l
            bits[0] = 1
            bits[-1] = 1
            for m in mids:
                bits[m] = 1
            pats.append(EndingPattern(tuple(bits)))
    expected = pattern_count(w, s)
    assert len(pats) == expected, (len(pats), expected)
    return PatternSet(int(w), int(s), tuple(pats))


def enumerate_patterns(w: int, s: int, *, cap: int | None = DEFAULT_ENUMERATION_CAP) -> PatternSet:
    """Enumerate the ending-pattern family for ``(w, s)`` in canonical order.

    Raises EnumerationCapError when the family size C(w-1, s-1) exceeds
    ``cap`` (pass ``cap=None`` to disable the guard).  The family size scales
    like w**(s-1), so the guard protects against accidental memory blow-up.
    """
    _validate_ws(w, s)
    count = pattern_count(w, s)
    if cap is not None and count > cap:
        raise EnumerationCapError(
            f"pattern family for (w={w}, s={s}) has {count} members, above the cap {cap}"
        )
    return _enumerate_cached(int(w), int(s))
