"""Verified-delegated-computation application layer.

A client drives a measurement-based computation on a graph G whose qubits
are shipped to a server one per successful entanglement attempt and kept at
most w time steps.  Test rounds check trap qubits against their noiseless
outcomes; a round fails if any trap disagrees.  The failure probability of
a round with per-qubit fidelities F is a polynomial determined by G and the
chosen vertex colouring:

    Q_j(F) = sum over dummy-flip strings y of
             prod_{d in W_j} F_d^(y_d) * prod_{v in V_j} F_v^(parity_v(y))

for trap colour class V_j with neighbourhood W_j, where F^(0) = F,
F^(1) = 1 - F, and parity_v(y) is the mod-2 sum of y over v's neighbours
(a trap flips to the orthogonal state once per neighbouring dummy flip).
The round error averages 1 - Q_j over the colour choice and over the cyclic
rotation of the send order that models the random starting qubit.

Per-qubit fidelities come from the resource ages: a qubit established with
fidelity 1 - lam*p decays towards 1/2 as exp(-t/T) over t stored steps.
Averaging the round error over the ending-pattern law gives the mean test
failure probability p_av, and the protocol is feasible while

    p_av < (2*gamma - 1) / (k * (2*gamma - 2))      (= 1/(2k) at gamma = 0).

``w_max`` / ``p_max`` find the feasibility boundary in one parameter with
the other fixed, and ``optimize_rate`` sweeps a grid, reporting for every
point the boundary partner and the expected round time E(tau).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable, Optional, Sequence

import numpy as np

from .algebra import ProbLike, as_probability
from .errors import (
    InvalidParameterError,
    MonotonicityViolationError,
    NeighbourhoodBlowupError,
    ScenarioFormatError,
)
from .patterns import BitsLike, EndingPattern, coerce_bits
from .solver import WindowStats, solve_first_moment

#: 2**|W_j| terms are enumerated per trap colour; refuse beyond this.
NEIGHBOURHOOD_GUARD = 24

#: Default ceiling for the w_max upward scan.
DEFAULT_W_CAP = 24


@dataclass(frozen=True)
class ColoredGraph:
    """Simple undirected graph with a validated vertex colouring."""

    vertex_count: int
    edges: frozenset[tuple[int, int]]
    coloring: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        n = self.vertex_count
        if n < 1:
            raise InvalidParameterError("graph needs at least one vertex")
        edges = set()
        for e in self.edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise InvalidParameterError(f"self-loop on vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidParameterError(f"edge ({u}, {v}) outside vertex range")
            edges.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(edges))
        classes = tuple(tuple(sorted(int(v) for v in cls)) for cls in self.coloring)
        object.__setattr__(self, "coloring", classes)
        seen: set[int] = set()
        for cls in classes:
            for v in cls:
                if v in seen:
                    raise InvalidParameterError(f"vertex {v} appears in two colour classes")
                if not 0 <= v < n:
                    raise InvalidParameterError(f"coloured vertex {v} outside range")
                seen.add(v)
        if seen != set(range(n)):
            raise InvalidParameterError("colouring must cover every vertex exactly once")
        members = {v: i for i, cls in enumerate(classes) for v in cls}
        for u, v in edges:
            if members[u] == members[v]:
                raise InvalidParameterError(
                    f"edge ({u}, {v}) joins two vertices of colour {members[u]}"
                )

    @property
    def k(self) -> int:
        return len(self.coloring)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return tuple(sorted(b if a == v else a for a, b in self.edges if v in (a, b)))

    def trap_neighbourhood(self, color: int) -> tuple[int, ...]:
        """W_j: every vertex sharing an edge with the colour-``color`` class."""
        cls = set(self.coloring[color])
        out = set()
        for u, v in self.edges:
            if u in cls:
                out.add(v)
            if v in cls:
                out.add(u)
        return tuple(sorted(out))


def colored_graph(
    vertex_count: int,
    edges: Iterable[Sequence[int]],
    coloring: Iterable[Sequence[int]],
) -> ColoredGraph:
    return ColoredGraph(
        vertex_count=int(vertex_count),
        edges=frozenset(tuple(int(x) for x in e) for e in edges),
        coloring=tuple(tuple(int(v) for v in cls) for cls in coloring),
    )


def square_graph() -> ColoredGraph:
    """The 4-cycle with its 2-colouring; the worked example throughout."""
    return colored_graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)], [(0, 2), (1, 3)])


@dataclass(frozen=True)
class NoiseModel:
    """Rate-fidelity trade-off slope, memory lifetime, and inherent error."""

    lam: float
    memory_lifetime: float
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise InvalidParameterError(f"lam must be >= 0, got {self.lam}")
        if not self.memory_lifetime > 0:
            raise InvalidParameterError(
                f"memory lifetime must be positive, got {self.memory_lifetime}"
            )
        if not 0.0 <= self.gamma < 0.5:
            raise InvalidParameterError(f"gamma must lie in [0, 1/2), got {self.gamma}")

    def established_fidelity(self, p: float) -> float:
        """Fidelity right after transmission: 1 - lam * p."""
        if self.lam * p > 1.0 + 1e-15:
            raise InvalidParameterError(
                f"lam * p = {self.lam * p} > 1 leaves no valid fidelity"
            )
        return 1.0 - self.lam * p

    def decayed_fidelity(self, p: float, age: float) -> float:
        """Stored-qubit fidelity after ``age`` steps: decays towards 1/2."""
        f0 = self.established_fidelity(p)
        return (f0 - 0.5) * math.exp(-age / self.memory_lifetime) + 0.5


def feasibility_threshold(k: int, gamma: float = 0.0) -> float:
    """Upper bound on p_av for verifiability: (2g-1)/(k(2g-2)); 1/(2k) at g=0."""
    if k < 1:
        raise InvalidParameterError(f"k must be >= 1, got {k}")
    if not 0.0 <= gamma < 0.5:
        raise InvalidParameterError(f"gamma must lie in [0, 1/2), got {gamma}")
    return (2.0 * gamma - 1.0) / (k * (2.0 * gamma - 2.0))


def fidelity_vector(pattern: BitsLike, prob: ProbLike, noise: NoiseModel) -> np.ndarray:
    """Per-qubit fidelities for one ending pattern, oldest qubit first."""
    pat = pattern if isinstance(pattern, EndingPattern) else EndingPattern(coerce_bits(pattern))
    tp = as_probability(prob)
    return np.array([noise.decayed_fidelity(tp.p, a) for a in pat.ages()])


@lru_cache(maxsize=32)
def _flip_plan(graph: ColoredGraph, color: int):
    """Per-colour flip table: one row per dummy-flip string y.

    Row layout: columns ``w_cols`` carry the dummy flips y, columns
    ``t_cols`` carry each trap's neighbour parity under y.
    """
    w_cols = graph.trap_neighbourhood(color)
    t_cols = graph.coloring[color]
    if len(w_cols) > NEIGHBOURHOOD_GUARD:
        raise NeighbourhoodBlowupError(
            f"colour {color} has a {len(w_cols)}-vertex neighbourhood; "
            f"2**{len(w_cols)} terms exceed the guard 2**{NEIGHBOURHOOD_GUARD}"
        )
    neigh = {v: graph.neighbors(v) for v in t_cols}
    w_index = {v: i for i, v in enumerate(w_cols)}
    rows = []
    for y in product((0, 1), repeat=len(w_cols)):
        parities = tuple(sum(y[w_index[u]] for u in neigh[v]) % 2 for v in t_cols)
        rows.append(y + parities)
    table = np.array(rows, dtype=np.uint8).reshape(len(rows), len(w_cols) + len(t_cols))
    return w_cols, t_cols, table


def _success_prob_batch(graph: ColoredGraph, color: int, fid: np.ndarray) -> np.ndarray:
    """Q_color for a batch of fidelity assignments (rows of ``fid``)."""
    w_cols, t_cols, table = _flip_plan(graph, color)
    cols = list(w_cols) + list(t_cols)
    total = np.zeros(fid.shape[0])
    for row in table:
        term = np.ones(fid.shape[0])
        for c, flip in zip(cols, row):
            term = term * (1.0 - fid[:, c] if flip else fid[:, c])
        total += term
    return total


def test_round_success(graph: ColoredGraph, trap_color: int, fidelities) -> float:
    """Q_{V_j}: probability every trap measurement agrees with the noiseless one."""
    fid = np.asarray(fidelities, dtype=float)
    if fid.shape != (graph.vertex_count,):
        raise InvalidParameterError(
            f"need one fidelity per vertex ({graph.vertex_count}), got shape {fid.shape}"
        )
    if np.any(fid < -1e-12) or np.any(fid > 1.0 + 1e-12):
        raise InvalidParameterError("fidelities must lie in [0, 1]")
    if not 0 <= trap_color < graph.k:
        raise InvalidParameterError(f"trap colour {trap_color} out of range")
    return float(_success_prob_batch(graph, trap_color, fid[None, :])[0])


def _round_error_batch(graph: ColoredGraph, fid: np.ndarray) -> np.ndarray:
    """Round error for a batch, averaged over trap colour and send rotation."""
    n = graph.vertex_count
    acc = np.zeros(fid.shape[0])
    for shift in range(n):
        rolled = fid[:, (np.arange(n) + shift) % n]
        for color in range(graph.k):
            acc += _success_prob_batch(graph, color, rolled)
    return 1.0 - acc / (n * graph.k)


def round_error(graph: ColoredGraph, fidelities) -> float:
    """P_G: test-round failure probability for one fidelity assignment.

    ``fidelities`` is ordered oldest qubit first and is assigned to vertices
    in the fixed send order starting at vertex 0; the uniformly random
    starting qubit enters through cyclic rotation, averaged here.
    """
    fid = np.asarray(fidelities, dtype=float)
    if fid.shape != (graph.vertex_count,):
        raise InvalidParameterError(
            f"need one fidelity per vertex ({graph.vertex_count}), got shape {fid.shape}"
        )
    if np.any(fid < -1e-12) or np.any(fid > 1.0 + 1e-12):
        raise InvalidParameterError("fidelities must lie in [0, 1]")
    return float(_round_error_batch(graph, fid[None, :])[0])


@dataclass(frozen=True)
class BqcScenario:
    """Graph, noise, and (optionally) the architecture parameters p and w."""

    graph: ColoredGraph
    noise: NoiseModel
    p: Optional[float] = None
    w: Optional[int] = None

    def __post_init__(self) -> None:
        if self.w is not None and self.w < self.graph.vertex_count:
            raise InvalidParameterError(
                f"w={self.w} is below the qubit count s={self.graph.vertex_count}"
            )

    @classmethod
    def from_dict(cls, data: dict) -> "BqcScenario":
        try:
            graph = colored_graph(data["vertices"], data["edges"], data["coloring"])
            noise = NoiseModel(
                lam=float(data["lambda"]),
                memory_lifetime=float(data["T"]),
                gamma=float(data.get("gamma", 0.0)),
            )
        except (KeyError, TypeError, ValueError, InvalidParameterError) as exc:
            raise ScenarioFormatError(f"bad scenario: {exc}") from exc
        p = data.get("p")
        w = data.get("w")
        return cls(
            graph=graph,
            noise=noise,
            p=None if p is None else float(p),
            w=None if w is None else int(w),
        )


def _pattern_round_errors(
    graph: ColoredGraph, noise: NoiseModel, prob, stats: WindowStats
) -> np.ndarray:
    """P_G evaluated for every pattern of ``stats.pattern_set``."""
    tp = as_probability(prob)
    ages = stats.pattern_set.ages_matrix
    f0 = noise.established_fidelity(tp.p)
    fid = (f0 - 0.5) * np.exp(-ages / noise.memory_lifetime) + 0.5
    return _round_error_batch(graph, fid)


def average_error(
    graph: ColoredGraph,
    noise: NoiseModel,
    w: int,
    prob: ProbLike,
    *,
    stats: Optional[WindowStats] = None,
    **solver_kwargs,
) -> float:
    """p_av: round error averaged over the ending-pattern law at (w, s=|V|, p)."""
    tp = as_probability(prob)
    s = graph.vertex_count
    if stats is None:
        stats = solve_first_moment(w, s, tp, **solver_kwargs)
    errors = _pattern_round_errors(graph, noise, tp, stats)
    return float(stats.distribution @ errors)


@dataclass(frozen=True)
class FeasibilityResult:
    """Boundary-search outcome; ``value`` is None when status is 'infeasible'.

    status: 'found' (boundary located), 'cap_reached' (feasible up to the
    scan cap), or 'infeasible' (no parameter qualifies).
    """

    value: Optional[float]
    status: str
    p_av: Optional[float] = None
    expectation: Optional[float] = None

    @property
    def feasible(self) -> bool:
        return self.status in ("found", "cap_reached")


#: Above this p the probe uses the degenerate limit instead of a dense solve.
_P_DEGENERATE = 1.0 - 1e-6


def _feasibility_probe(graph, noise, w, p, threshold, solver_kwargs):
    tp = as_probability(p)
    if tp.p >= _P_DEGENERATE:
        # The pattern law concentrates on the all-ones pattern (mass 1 - O(q))
        # and E(tau) -> s; the dense system would overflow in q-powers here.
        run = EndingPattern((1,) * graph.vertex_count)
        pav = round_error(graph, fidelity_vector(run, tp, noise))
        return pav < threshold, pav, float(graph.vertex_count)
    stats = solve_first_moment(w, graph.vertex_count, tp, **solver_kwargs)
    pav = float(stats.distribution @ _pattern_round_errors(graph, noise, tp, stats))
    return pav < threshold, pav, stats.expectation


def w_max(
    graph: ColoredGraph,
    noise: NoiseModel,
    p: ProbLike,
    *,
    w_cap: int = DEFAULT_W_CAP,
    hint: Optional[int] = None,
    **solver_kwargs,
) -> FeasibilityResult:
    """Largest w <= w_cap keeping p_av under the threshold, assuming p_av
    grows with w (older resources decay more).  Starts from ``hint`` when
    given (warm start for sweeps) and climbs or descends locally.
    """
    tp = as_probability(p)
    s = graph.vertex_count
    if w_cap < s:
        raise InvalidParameterError(f"w_cap={w_cap} is below s={s}")
    threshold = feasibility_threshold(graph.k, noise.gamma)

    w = min(max(hint if hint is not None else s, s), w_cap)
    ok, pav, expec = _feasibility_probe(graph, noise, w, tp, threshold, solver_kwargs)
    if ok:
        while w < w_cap:
            ok_next, pav_next, exp_next = _feasibility_probe(
                graph, noise, w + 1, tp, threshold, solver_kwargs
            )
            if not ok_next:
                return FeasibilityResult(w, "found", pav, expec)
            w, pav, expec = w + 1, pav_next, exp_next
        return FeasibilityResult(w, "cap_reached", pav, expec)
    while w > s:
        w -= 1
        ok, pav, expec = _feasibility_probe(graph, noise, w, tp, threshold, solver_kwargs)
        if ok:
            return FeasibilityResult(w, "found", pav, expec)
    return FeasibilityResult(None, "infeasible")


def p_max(
    graph: ColoredGraph,
    noise: NoiseModel,
    w: int,
    *,
    tol: float = 1e-6,
    p_floor: float = 1e-6,
    **solver_kwargs,
) -> FeasibilityResult:
    """Largest feasible p at fixed w, by bisection on the feasibility boundary.

    Assumes p_av grows with p over the bracket (fidelity loss dominates the
    younger ages); the bracket itself is verified and a violation at the
    endpoints raises MonotonicityViolationError.  The supremum is treated as
    approached: the returned value is the last feasible probe.
    """
    s = graph.vertex_count
    if w < s:
        raise InvalidParameterError(f"w={w} is below s={s}")
    threshold = feasibility_threshold(graph.k, noise.gamma)
    p_cap = 1.0 - 1e-9 if noise.lam == 0 else min(1.0 - 1e-9, 1.0 / noise.lam)

    ok_hi, pav_hi, exp_hi = _feasibility_probe(graph, noise, w, p_cap, threshold, solver_kwargs)
    if ok_hi:
        return FeasibilityResult(p_cap, "cap_reached", pav_hi, exp_hi)
    ok_lo, pav_lo, exp_lo = _feasibility_probe(graph, noise, w, p_floor, threshold, solver_kwargs)
    if not ok_lo:
        return FeasibilityResult(None, "infeasible")
    if pav_lo > pav_hi:
        raise MonotonicityViolationError(
            f"p_av is not increasing across the bracket ({pav_lo} at p={p_floor}, "
            f"{pav_hi} at p={p_cap}); refusing to bisect"
        )
    lo, hi = p_floor, p_cap
    pav, expec = pav_lo, exp_lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        ok, pav_mid, exp_mid = _feasibility_probe(graph, noise, w, mid, threshold, solver_kwargs)
        if ok:
            lo, pav, expec = mid, pav_mid, exp_mid
        else:
            hi = mid
    return FeasibilityResult(lo, "found", pav, expec)


@dataclass(frozen=True)
class RatePoint:
    """One grid point of an optimize_rate sweep."""

    p: Optional[float]
    w: Optional[int]
    p_av: Optional[float]
    expected_time: Optional[float]
    feasible: bool
    status: str

    def to_dict(self) -> dict:
        return {
            "p": None if self.p is None else float(self.p),
            "w": None if self.w is None else int(self.w),
            "p_av": None if self.p_av is None else float(self.p_av),
            "expected_time": None if self.expected_time is None else float(self.expected_time),
            "feasible": bool(self.feasible),
            "status": self.status,
        }


def optimize_rate(
    graph: ColoredGraph,
    noise: NoiseModel,
    *,
    vary: str,
    values: Sequence[float],
    w_cap: int = DEFAULT_W_CAP,
    **solver_kwargs,
) -> list[RatePoint]:
    """Sweep p (finding w_max) or w (finding p_max) and report E(tau) per point.

    Infeasible points are recorded, not fatal.  Rows follow grid order.
    """
    if vary not in ("p", "w"):
        raise InvalidParameterError(f"vary must be 'p' or 'w', got {vary!r}")
    rows: list[RatePoint] = []
    if vary == "p":
        hint: Optional[int] = None
        for p in values:
            res = w_max(graph, noise, float(p), w_cap=w_cap, hint=hint, **solver_kwargs)
            if res.feasible:
                hint = int(res.value)
                rows.append(
                    RatePoint(float(p), int(res.value), res.p_av, res.expectation, True, res.status)
                )
            else:
                hint = None
                rows.append(RatePoint(float(p), None, None, None, False, res.status))
    else:
        for w in values:
            res = p_max(graph, noise, int(w), **solver_kwargs)
            if res.feasible:
                rows.append(
                    RatePoint(float(res.value), int(w), res.p_av, res.expectation, True, res.status)
                )
            else:
                rows.append(RatePoint(None, int(w), None, None, False, res.status))
    return rows
