import math
import warnings

import numpy as np
import pytest

from scanwait.algebra import star, dagger
from scanwait.closed_forms import expectation_s2, pattern_dist_s2, variance_infinite, variance_s2
from scanwait.errors import (
    DimensionCapError,
    IllConditionedWarning,
    InvalidParameterError,
    MissingVarianceError,
)
from scanwait.patterns import enumerate_patterns
from scanwait.sim import SimConfig, run_batch
from scanwait.solver import (
    WindowStats,
    dagger_matrix,
    solve_first_moment,
    solve_second_moment,
    star_matrix,
    std_dev,
)


def test_run_window_closed_value():
    st = solve_first_moment(4, 4, 0.5)
    assert st.expectation == pytest.approx(30.0, abs=1e-9)
    np.testing.assert_allclose(st.distribution, [1.0])


def test_matrix_entries_agree_with_scalar_products():
    ps = enumerate_patterns(6, 3)
    p = 0.43
    w_mat = star_matrix(6, 3, p)
    d_mat = dagger_matrix(6, 3, p)
    for i, xi in enumerate(ps):
        for j, xj in enumerate(ps):
            # row pattern's head against column pattern's tail
            assert w_mat[i, j] == pytest.approx(star(xj, xi, p), rel=1e-12)
            assert d_mat[i, j] == pytest.approx(dagger(xj, xi, p), rel=1e-12)


@pytest.mark.parametrize("w", range(2, 13))
@pytest.mark.parametrize("p", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_s2_cross_checks(w, p):
    st = solve_second_moment(w, 2, p)
    assert st.expectation == pytest.approx(expectation_s2(w, p), rel=1e-10)
    assert st.variance == pytest.approx(variance_s2(w, p), rel=1e-8)
    np.testing.assert_allclose(st.distribution, pattern_dist_s2(w, p), rtol=1e-8)


def test_distribution_normalised_and_nonnegative():
    for (w, s, p) in [(6, 3, 0.2), (9, 4, 0.5), (12, 3, 0.85), (7, 2, 0.4)]:
        st = solve_first_moment(w, s, p)
        assert abs(st.distribution.sum() - 1.0) < 1e-9
        assert st.distribution.min() >= 0.0


def test_expectation_monotone_in_window():
    for s in (2, 3, 4):
        for p in (0.2, 0.5, 0.8):
            values = [solve_first_moment(w, s, p).expectation for w in range(s, s + 11)]
            assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))


def test_expectation_bounds():
    for (w, s, p) in [(6, 3, 0.2), (10, 4, 0.5), (8, 2, 0.7), (5, 5, 0.35)]:
        e = solve_first_moment(w, s, p).expectation
        lower = s / p
        upper = (1 / p**s - 1) / (1 - p)
        assert lower - 1e-9 <= e <= upper + 1e-9


def test_degenerate_high_p_limit():
    p = 1 - 1e-9
    for (w, s) in [(5, 3), (4, 4), (9, 2)]:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IllConditionedWarning)
            e = solve_first_moment(w, s, p).expectation
        assert e == pytest.approx(s, abs=1e-6)


@pytest.mark.parametrize(
    "w,s,p,seed",
    [
        (5, 3, 0.3, 31337),
        (4, 2, 0.2, 1001),
        (6, 3, 0.5, 1002),
        (7, 4, 0.8, 1003),
        (9, 2, 0.5, 1004),
        (10, 4, 0.2, 1005),
        (8, 1, 0.5, 1006),
    ],
)
def test_monte_carlo_agreement_grid(w, s, p, seed):
    st = solve_first_moment(w, s, p)
    res = run_batch(SimConfig(w=w, s=s, p=p, runs=20_000, seed=seed))
    assert abs(res.mean - st.expectation) < 5 * res.mean_std_error
    for prob, freq in zip(st.distribution, res.frequencies):
        se = math.sqrt(prob * (1 - prob) / res.config.runs)
        assert abs(freq - prob) < 5 * max(se, 1e-4)


def test_second_moment_geometric_case():
    # w=s=1: tau is geometric, E=1/p, E(tau^2)=(2-p)/p^2
    p = 0.37
    st = solve_second_moment(1, 1, p)
    assert st.expectation == pytest.approx(1 / p, rel=1e-12)
    assert st.second_moment == pytest.approx((2 - p) / p**2, rel=1e-12)
    assert st.variance == pytest.approx((1 - p) / p**2, rel=1e-12)


def test_second_moment_run_window_monte_carlo():
    st = solve_second_moment(3, 3, 0.5)
    res = run_batch(SimConfig(w=3, s=3, p=0.5, runs=100_000, seed=90125))
    taus = res.taus.astype(float)
    n = len(taus)
    m4 = ((taus - taus.mean()) ** 4).mean()
    se_var = math.sqrt(max(m4 - res.variance**2 * (n - 3) / (n - 1), 0.0) / n)
    assert abs(res.variance - st.variance) < 5 * se_var
    assert abs(res.mean - st.expectation) < 4 * res.mean_std_error


def test_saturated_variance_matches_infinite_window():
    from scanwait.approx import epsilon

    assert epsilon(40, 3, 0.6) < 1e-6
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditionedWarning)
        st = solve_second_moment(40, 3, 0.6)
    assert st.variance == pytest.approx(variance_infinite(3, 0.6), rel=0.02)


def test_std_dev():
    stats = WindowStats(w=2, s=2, p=0.5, expectation=6.0, variance=4.0)
    assert std_dev(stats) == 2.0
    stats.variance = 0.0
    assert std_dev(stats) == 0.0
    stats.variance = None
    with pytest.raises(MissingVarianceError):
        std_dev(stats)


def test_small_p_routing_to_asymptotics():
    st = solve_first_moment(5, 3, 1e-5)
    assert st.method == "small-p-asymptotic"
    assert st.expectation == pytest.approx(1.0 / (6 * 1e-15), rel=1e-12)
    np.testing.assert_allclose(st.distribution, np.full(6, 1 / 6))
    with pytest.raises(InvalidParameterError):
        solve_second_moment(5, 3, 1e-5)
    # threshold override forces the dense path
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditionedWarning)
        exact = solve_first_moment(5, 3, 1e-5, small_p_threshold=0.0)
    assert exact.method == "lu"
    assert exact.expectation == pytest.approx(st.expectation, rel=1e-2)


def test_condition_warning_fires_when_severely_scaled():
    with pytest.warns(IllConditionedWarning):
        solve_first_moment(6, 4, 1e-3)


def test_dimension_cap():
    with pytest.raises(DimensionCapError):
        solve_first_moment(12, 4, 0.5, max_dimension=10)


def test_invalid_arguments():
    with pytest.raises(InvalidParameterError):
        solve_first_moment(3, 0, 0.5)
    with pytest.raises(InvalidParameterError):
        solve_first_moment(2, 3, 0.5)
    with pytest.raises(InvalidParameterError):
        solve_first_moment(4, 2, 1.0)


def test_to_dict_schema_shape():
    st = solve_second_moment(6, 2, 0.3)
    d = st.to_dict()
    assert set(d) == {"w", "s", "p", "expectation", "second_moment", "variance", "distribution"}
    assert d["distribution"][0]["pattern"] == "11"
    assert isinstance(d["distribution"][0]["prob"], float)
