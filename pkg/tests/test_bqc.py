import math

import numpy as np
import pytest

from scanwait.bqc import (
    BqcScenario,
    NoiseModel,
    average_error,
    colored_graph,
    feasibility_threshold,
    fidelity_vector,
    optimize_rate,
    p_max,
    round_error,
    square_graph,
    w_max,
)
from scanwait.bqc import test_round_success as round_success
from scanwait.errors import (
    InvalidParameterError,
    NeighbourhoodBlowupError,
    ScenarioFormatError,
)
from scanwait.sim import SimConfig, run_batch
from scanwait.solver import solve_first_moment


def printed_square_success(F):
    """Hand-coded four-term success polynomial for the square's {2,4} trap class."""
    f1, f2, f3, f4 = F
    return (
        f1 * f2 * f3 * f4
        + f1 * (1 - f2) * (1 - f3) * (1 - f4)
        + (1 - f1) * (1 - f2) * f3 * (1 - f4)
        + (1 - f1) * f2 * (1 - f3) * f4
    )


def test_graph_validation():
    with pytest.raises(InvalidParameterError):  # monochromatic edge
        colored_graph(3, [(0, 1)], [(0, 1), (2,)])
    with pytest.raises(InvalidParameterError):  # self-loop
        colored_graph(2, [(0, 0)], [(0,), (1,)])
    with pytest.raises(InvalidParameterError):  # vertex in two classes
        colored_graph(2, [(0, 1)], [(0, 1), (1,)])
    with pytest.raises(InvalidParameterError):  # uncovered vertex
        colored_graph(3, [(0, 1)], [(0,), (1,)])
    g = colored_graph(2, [(0, 1), (1, 0)], [(0,), (1,)])  # duplicates collapse
    assert len(g.edges) == 1


def test_square_graph_shape():
    g = square_graph()
    assert g.k == 2
    assert g.vertex_count == 4
    assert g.coloring == ((0, 2), (1, 3))
    assert g.trap_neighbourhood(0) == (1, 3)
    assert g.trap_neighbourhood(1) == (0, 2)


def test_success_polynomial_matches_printed_expansion():
    g = square_graph()
    rng = np.random.default_rng(5)
    for _ in range(300):
        F = rng.uniform(0.0, 1.0, 4)
        assert round_success(g, 1, F) == pytest.approx(
            printed_square_success(F), abs=1e-12
        )


def test_success_polynomial_uniform_half_is_quarter():
    g = square_graph()
    assert round_success(g, 0, [0.5] * 4) == pytest.approx(0.25)
    assert round_success(g, 1, [0.5] * 4) == pytest.approx(0.25)
    assert printed_square_success([0.5] * 4) == pytest.approx(0.25)


def test_round_error_limits():
    g = square_graph()
    assert round_error(g, [1.0] * 4) == 0.0
    assert round_error(g, [0.5] * 4) == pytest.approx(0.75)
    assert round_success(g, 0, [1.0] * 4) == 1.0


def test_round_error_symmetries():
    g = square_graph()
    rng = np.random.default_rng(17)
    for _ in range(100):
        F = rng.uniform(0.0, 1.0, 4)
        base = round_error(g, F)
        assert abs(base - round_error(g, F[[2, 1, 0, 3]])) < 1e-12  # 1 <-> 3
        assert abs(base - round_error(g, F[[0, 3, 2, 1]])) < 1e-12  # 2 <-> 4
        assert 0.0 <= base <= 1.0


def test_round_error_monotone_in_single_fidelity():
    g = square_graph()
    rng = np.random.default_rng(23)
    for _ in range(60):
        F = rng.uniform(0.5, 1.0, 4)
        j = rng.integers(0, 4)
        hi = F.copy()
        hi[j] = min(1.0, F[j] + rng.uniform(0.0, 1.0 - F[j]))
        assert round_error(g, hi) <= round_error(g, F) + 1e-12


def test_feasibility_threshold_values():
    assert feasibility_threshold(2, 0.0) == pytest.approx(0.25)
    assert feasibility_threshold(3, 0.0) == pytest.approx(1 / 6)
    # generic gamma: (2g-1)/(k(2g-2))
    assert feasibility_threshold(2, 0.25) == pytest.approx((0.5 - 1) / (2 * (0.5 - 2)))
    with pytest.raises(InvalidParameterError):
        feasibility_threshold(2, 0.5)


def test_fidelity_vector_values():
    nm = NoiseModel(lam=0.5, memory_lifetime=10.0)
    fv = fidelity_vector((1, 0, 1), 0.1, nm)
    f_est = 0.95
    np.testing.assert_allclose(
        fv, [(f_est - 0.5) * math.exp(-0.2) + 0.5, f_est], rtol=1e-12
    )
    # newest qubit never decays
    assert fv[-1] == pytest.approx(1 - 0.5 * 0.1)
    perfect = NoiseModel(lam=0.0, memory_lifetime=math.inf)
    np.testing.assert_allclose(fidelity_vector((1, 0, 0, 1), 0.3, perfect), [1.0, 1.0])
    with pytest.raises(InvalidParameterError):
        fidelity_vector((1, 1), 0.9, NoiseModel(lam=2.0, memory_lifetime=5.0))


def test_noise_model_validation():
    with pytest.raises(InvalidParameterError):
        NoiseModel(lam=-1.0, memory_lifetime=10.0)
    with pytest.raises(InvalidParameterError):
        NoiseModel(lam=0.5, memory_lifetime=0.0)
    with pytest.raises(InvalidParameterError):
        NoiseModel(lam=0.5, memory_lifetime=10.0, gamma=0.6)


def test_average_error_perfect_noise_is_zero():
    g = square_graph()
    nm = NoiseModel(lam=0.0, memory_lifetime=math.inf)
    assert average_error(g, nm, 6, 0.3) == pytest.approx(0.0, abs=1e-12)


def test_average_error_degenerate_window():
    # w = s leaves a single pattern: p_av is the round error of the run pattern
    g = square_graph()
    nm = NoiseModel(lam=0.5, memory_lifetime=50.0)
    p = 0.12
    want = round_error(g, fidelity_vector((1, 1, 1, 1), p, nm))
    assert average_error(g, nm, 4, p) == pytest.approx(want, rel=1e-12)


def test_average_error_monte_carlo_cross_check():
    g = square_graph()
    nm = NoiseModel(lam=0.5, memory_lifetime=1000.0)
    w, p = 6, 0.07
    pav = average_error(g, nm, w, p)
    res = run_batch(SimConfig(w=w, s=4, p=p, runs=30_000, seed=515))
    errs = np.array(
        [round_error(g, fidelity_vector(pat, p, nm)) for pat in res.pattern_set]
    )
    sample = errs[res.pattern_indices]
    se = sample.std(ddof=1) / math.sqrt(len(sample))
    assert abs(sample.mean() - pav) < 4 * se


def test_average_error_orderings():
    g = square_graph()
    w, p = 8, 0.1
    by_t = [
        average_error(g, NoiseModel(lam=0.5, memory_lifetime=t), w, p)
        for t in (50.0, 200.0, 1000.0)
    ]
    assert by_t[0] > by_t[1] > by_t[2]  # longer memory, smaller error
    by_lam = [
        average_error(g, NoiseModel(lam=l, memory_lifetime=500.0), w, p)
        for l in (0.1, 0.5, 1.5)
    ]
    assert by_lam[0] < by_lam[1] < by_lam[2]  # steeper trade-off, larger error


def test_w_max_cap_and_infeasible():
    g = square_graph()
    perfect = NoiseModel(lam=0.0, memory_lifetime=math.inf)
    res = w_max(g, perfect, 0.3, w_cap=12)
    assert res.status == "cap_reached" and res.value == 12
    assert res.expectation == pytest.approx(solve_first_moment(12, 4, 0.3).expectation)
    # high p with lam=0.5 pushes the run-pattern round error past 1/4
    noisy = NoiseModel(lam=0.5, memory_lifetime=1000.0)
    assert round_error(g, fidelity_vector((1, 1, 1, 1), 0.16, noisy)) >= 0.25
    res = w_max(g, noisy, 0.16, w_cap=12)
    assert res.status == "infeasible" and res.value is None and not res.feasible


def test_w_max_boundary_found():
    g = square_graph()
    nm = NoiseModel(lam=0.5, memory_lifetime=1000.0)
    res = w_max(g, nm, 0.138, w_cap=24)
    assert res.status == "found"
    assert 4 <= res.value < 24
    thr = feasibility_threshold(2, 0.0)
    assert res.p_av < thr
    assert average_error(g, nm, res.value + 1, 0.138) >= thr
    # warm start lands on the same boundary
    res2 = w_max(g, nm, 0.138, w_cap=24, hint=20)
    assert res2.value == res.value


def test_p_max_cap_and_boundary():
    g = square_graph()
    perfect = NoiseModel(lam=0.0, memory_lifetime=math.inf)
    res = p_max(g, perfect, 6)
    assert res.status == "cap_reached"
    assert res.value == pytest.approx(1.0, abs=1e-8)
    # wide windows must not overflow the cap probe's q-powers
    import warnings as _w

    with _w.catch_warnings():
        _w.simplefilter("error")  # any warning here would be a regression
        wide = p_max(g, perfect, 60)
    assert wide.status == "cap_reached"

    nm = NoiseModel(lam=0.5, memory_lifetime=1000.0)
    res = p_max(g, nm, 6)
    assert res.status == "found"
    thr = feasibility_threshold(2, 0.0)
    assert res.p_av < thr
    assert abs(res.p_av - thr) < 1e-4  # boundary residual when interior
    assert average_error(g, nm, 6, res.value + 2e-6) >= thr


def test_round_trip_consistency():
    g = square_graph()
    nm = NoiseModel(lam=0.5, memory_lifetime=1000.0)
    p0 = 0.13
    res_w = w_max(g, nm, p0, w_cap=24)
    assert res_w.feasible
    res_p = p_max(g, nm, int(res_w.value))
    assert res_p.value >= p0 - 1e-6


def test_optimize_rate_p_sweep_shapes_in_binding_band():
    g = square_graph()
    nm = NoiseModel(lam=0.5, memory_lifetime=800.0)
    rows = optimize_rate(g, nm, vary="p", values=np.linspace(0.10, 0.145, 20), w_cap=24)
    feas = [r for r in rows if r.feasible]
    assert feas and not all(r.feasible for r in rows)
    times = [r.expected_time for r in feas]
    jumps = sum(1 for a, b in zip(times, times[1:]) if b > a * 1.0001)
    assert jumps >= 1
    k = int(np.argmin(times))
    assert 0 < k < len(times) - 1  # interior minimum
    ws = [r.w for r in feas]
    assert min(ws) < max(ws)  # the window boundary actually moved


def test_optimize_rate_w_sweep_u_shape_with_short_memory():
    g = square_graph()
    nm = NoiseModel(lam=0.5, memory_lifetime=60.0)
    rows = optimize_rate(g, nm, vary="w", values=range(4, 16))
    assert all(r.feasible for r in rows)
    times = [r.expected_time for r in rows]
    k = int(np.argmin(times))
    assert 0 < k < len(times) - 1


def test_optimize_rate_unconstrained_is_monotone():
    g = square_graph()
    perfect = NoiseModel(lam=0.0, memory_lifetime=math.inf)
    rows = optimize_rate(g, perfect, vary="p", values=[0.2, 0.4, 0.6, 0.8], w_cap=8)
    times = [r.expected_time for r in rows]
    assert all(r.status == "cap_reached" for r in rows)
    assert all(a > b for a, b in zip(times, times[1:]))


def test_neighbourhood_guard():
    leaves = list(range(1, 27))
    g = colored_graph(27, [(0, v) for v in leaves], [(0,), tuple(leaves)])
    with pytest.raises(NeighbourhoodBlowupError):
        round_success(g, 0, [0.9] * 27)


def test_scenario_parsing():
    data = {
        "vertices": 4,
        "edges": [[0, 1], [1, 2], [2, 3], [3, 0]],
        "coloring": [[0, 2], [1, 3]],
        "lambda": 0.5,
        "T": 1000,
        "gamma": 0.0,
        "p": 0.07,
        "w": 6,
    }
    sc = BqcScenario.from_dict(data)
    assert sc.graph.k == 2 and sc.p == 0.07 and sc.w == 6
    assert sc.noise.lam == 0.5
    with pytest.raises(ScenarioFormatError):
        BqcScenario.from_dict({"vertices": 2})
    with pytest.raises(ScenarioFormatError):
        BqcScenario.from_dict(dict(data, coloring=[[0, 1], [2, 3]]))
