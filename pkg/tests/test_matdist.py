import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from matrixdist import (DomainError, ParameterError, aldous_distribution, aldous_sample,
                        compare_distributions, compare_grid_types, evaluate_matrix,
                        invariance_check, make_kernel, minor_statistics, random_graph_matrix,
                        sample_matrix_distribution, sample_symmetric_grid, triangle_violations)
from matrixdist._rng import derive_seeds
from matrixdist.energy import energy_distance, permutation_test
from matrixdist.grids import GridSample
from matrixdist.matdist import EmpiricalMatrixDistribution, SampleMatrix, minor_features
from matrixdist.spaces_kernels import UNIT

from .oracles import (abs_diff_cdf_by_quadrature, brute_force_triangle_violations,
                      circle_distance_cdf_by_quadrature)

EUCLID = make_kernel("interval-euclid")
CIRCLE = make_kernel("circle-metric")
ADD = make_kernel("add-mod1")


def _grid(xs, ys, kind="bernoulli"):
    return GridSample(np.array(xs), np.array(ys), kind, 0, UNIT, UNIT)


def _emp(arrays, kernel_id="custom"):
    mats = tuple(SampleMatrix(np.asarray(a, dtype=float), kernel_id, "bernoulli", 0, False, r)
                 for r, a in enumerate(arrays))
    return EmpiricalMatrixDistribution(mats, kernel_id, "bernoulli", 0)


def test_evaluate_matrix_add_mod1():
    m = evaluate_matrix(ADD, _grid([0.0, 0.2], [0.3, 0.8]))
    assert np.allclose(m.values, [[0.3, 0.8], [0.5, 0.0]], atol=1e-15)
    assert (m.kernel_id, m.grid_kind) == ("add-mod1", "bernoulli")


def test_evaluate_matrix_space_mismatch():
    g = sample_symmetric_grid(make_kernel("halfline-cauchy-euclid").space_x, 4, 0)
    with pytest.raises(DomainError):
        evaluate_matrix(EUCLID, g)


@pytest.mark.parametrize("seed", range(3))
def test_symmetric_metric_matrix_structure(seed):
    m = evaluate_matrix(EUCLID, sample_symmetric_grid(UNIT, 64, seed))
    assert m.symmetric
    assert np.all(np.diag(m.values) == 0)
    assert np.array_equal(m.values, m.values.T)
    assert triangle_violations(m) == 0


def test_triangle_checker_agrees_with_brute_force():
    for kid in ["interval-euclid", "halfline-cauchy-euclid", "sphere-geodesic"]:
        k = make_kernel(kid)
        m = evaluate_matrix(k, sample_symmetric_grid(k.space_x, 16, 2))
        assert triangle_violations(m) == brute_force_triangle_violations(m.values) == 0
    bad = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    assert triangle_violations(bad) == brute_force_triangle_violations(bad) == 2


def test_frozen_single_entry_laws_match_quadrature():
    for t in np.linspace(0.05, 0.95, 7):
        assert abs_diff_cdf_by_quadrature(t) == pytest.approx(2 * t - t * t, abs=1e-8)
        assert circle_distance_cdf_by_quadrature(min(t, 0.5)) == pytest.approx(
            min(2 * t, 1.0), abs=1e-8)


def test_order_one_symmetric_distribution_is_zero():
    emp = sample_matrix_distribution(EUCLID, "symmetric", 1, 1000, seed=0)
    assert emp.order == 1 and emp.replicas == 1000
    assert np.all(emp.stack() == 0)


def test_order_one_single_entry_laws():
    entries = sample_matrix_distribution(EUCLID, "bernoulli", 1, 10_000, 1).stack().ravel()
    assert stats.kstest(entries, lambda t: np.clip(2 * t - t * t, 0, 1)).statistic <= 0.03
    entries = sample_matrix_distribution(CIRCLE, "bernoulli", 1, 10_000, 2).stack().ravel()
    assert stats.kstest(entries, stats.uniform(0, 0.5).cdf).statistic <= 0.03


def test_replicas_independent_of_thread_count():
    a = sample_matrix_distribution(EUCLID, "bernoulli", 5, 30, seed=3)
    b = sample_matrix_distribution(EUCLID, "bernoulli", 5, 30, seed=3, threads=4)
    assert np.array_equal(a.stack(), b.stack())
    assert not np.array_equal(a.matrices[0].values, a.matrices[1].values)


def test_minor_features():
    emp = _emp([np.full((3, 3), 2.5)])
    assert minor_statistics(emp, 2).tolist() == [[2.5, 2.5, 2.5, 2.5, 5.0, 5.0]]
    emp = sample_matrix_distribution(EUCLID, "bernoulli", 4, 5, 0)
    f1 = minor_statistics(emp, 1)
    assert np.array_equal(f1[:, 0], emp.stack()[:, 0, 0])
    with pytest.raises(ParameterError):
        minor_statistics(emp, 5)


@settings(max_examples=50)
@given(st.integers(0, 10_000), st.permutations(range(6)), st.permutations(range(6)))
def test_full_order_features_are_permutation_invariant(seed, rows, cols):
    v = np.random.default_rng(seed).random((6, 6))
    assert np.array_equal(minor_features(v, 6), minor_features(v[np.ix_(rows, cols)], 6))


def test_energy_distance_basics():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(50, 3))
    assert energy_distance(a, a) == 0.0
    assert energy_distance(a, a + 3.0) > 1.0
    stat, p = permutation_test(a, a + 3.0, 99, rng)
    assert p == 0.01


def test_compare_identical_object():
    emp = sample_matrix_distribution(EUCLID, "bernoulli", 6, 50, 0)
    rep = compare_distributions(emp, emp, 3, 0.05, 99, 0)
    assert rep.statistic == 0.0 and rep.decision == "accept"


def test_compare_degenerate_clouds():
    emp = _emp([np.zeros((2, 2))] * 10)
    rep = compare_distributions(emp, emp, 2, 0.05, 99, 0)
    assert (rep.statistic, rep.p_value, rep.decision) == (0.0, 1.0, "accept")


def test_compare_parameter_validation():
    emp = sample_matrix_distribution(EUCLID, "bernoulli", 4, 10, 0)
    with pytest.raises(ParameterError):
        compare_distributions(emp, emp, 2, 0.05, 50, 0)
    with pytest.raises(ParameterError):
        compare_distributions(emp, emp, 5, 0.05, 99, 0)


@pytest.mark.slow
def test_compare_null_calibration():
    accepted = 0
    for trial in range(20):
        sa, sb, st_ = derive_seeds(500 + trial, 3)
        a = sample_matrix_distribution(EUCLID, "bernoulli", 8, 400, sa)
        b = sample_matrix_distribution(EUCLID, "bernoulli", 8, 400, sb)
        accepted += compare_distributions(a, b, 4, 0.05, 999, st_).decision == "accept"
    assert accepted >= 18


def test_compare_separates_euclid_from_circle():
    a = sample_matrix_distribution(EUCLID, "bernoulli", 8, 400, 1)
    b = sample_matrix_distribution(CIRCLE, "bernoulli", 8, 400, 2)
    rep = compare_distributions(a, b, 1, 0.01, 999, 3)
    assert rep.decision == "reject" and rep.p_value <= 0.01
    swapped = compare_distributions(b, a, 1, 0.01, 999, 3)
    assert swapped.statistic == pytest.approx(rep.statistic, rel=1e-12)


def test_invariance_full_order_statistic_is_zero():
    emp = sample_matrix_distribution(EUCLID, "bernoulli", 6, 40, 0)
    rep = invariance_check(emp, "full", 0.05, 99, 1, q=6)
    assert rep.statistic == 0.0 and rep.decision == "accept"


def test_invariance_diag_accepts_for_symmetric_metric():
    emp = sample_matrix_distribution(EUCLID, "symmetric", 16, 200, 4)
    rep = invariance_check(emp, "diag", 0.05, 999, 4, q=8)
    assert rep.decision == "accept" and rep.group == "diag"


def test_invariance_diag_needs_symmetric_data():
    emp = sample_matrix_distribution(ADD, "bernoulli", 4, 10, 0)
    with pytest.raises(ParameterError):
        invariance_check(emp, "diag", 0.05, 99, 0)


def test_invariance_rejects_row_trend():
    rng = np.random.default_rng(0)
    emp = _emp([np.arange(16)[:, None] + rng.random((16, 16)) for _ in range(200)])
    rep = invariance_check(emp, "full", 0.05, 999, 0, q=8)
    assert rep.decision == "reject"


def test_aldous_lambda_only_entries_uniform():
    m = aldous_sample("lambda", 60, 70, seed=0)
    assert m.values.shape == (60, 70)
    assert stats.kstest(m.values.ravel(), "uniform").pvalue > 1e-3


def test_aldous_xi_gives_constant_rows():
    m = aldous_sample("xi", 5, 9, seed=1)
    assert np.all(m.values == m.values[:, :1])


def test_aldous_symmetric():
    m = aldous_sample("lambda", 12, 12, seed=2, symmetric=True)
    assert np.array_equal(m.values, m.values.T)
    with pytest.raises(ParameterError):
        aldous_sample("lambda", 3, 4, 0, symmetric=True)
    custom = aldous_sample(lambda xi, eta, lam: xi * eta, 3, 3, 0)
    assert custom.kernel_id.startswith("aldous:")


def test_aldous_zero_lambda_matches_add_mod1():
    ald = aldous_distribution("add-mod1", 8, 400, 10)
    ref = sample_matrix_distribution(ADD, "bernoulli", 8, 400, 11)
    assert compare_distributions(ald, ref, 4, 0.05, 999, 12).decision == "accept"


def test_random_graph_matrix():
    m = random_graph_matrix(0.3, 2, 0)
    assert m.values[0, 0] == m.values[1, 1] == 0 and m.values[0, 1] in (1.0, 2.0)
    for n in (5, 64):
        g = random_graph_matrix(0.5, n, n)
        assert triangle_violations(g) == 0
        assert set(np.unique(g.values)) <= {0.0, 1.0, 2.0}
    big = random_graph_matrix(0.5, 1000, 1).values
    off = big[~np.eye(1000, dtype=bool)]
    assert 0.47 <= np.mean(off == 1.0) <= 0.53
    with pytest.raises(ParameterError):
        random_graph_matrix(1.0, 5, 0)


def test_random_graph_exhaustive_small():
    d = random_graph_matrix(0.5, 6, 3).values
    for i, j, k in itertools.product(range(6), repeat=3):
        assert d[i, k] <= d[i, j] + d[j, k]


def test_compare_grid_types_reports():
    rep = compare_grid_types(EUCLID, ("bernoulli", "locally-finite"), 8, 400, 4, 0.05, 199, 0)
    d = rep.to_dict()
    for key in ("statistic", "p_value", "decision", "alpha", "permutations"):
        assert d[key] is not None
    assert d["params"]["kinds"] == ["bernoulli", "locally-finite"]


def test_compare_grid_types_stationary_rejects():
    rep = compare_grid_types(EUCLID, ("bernoulli", "stationary"), 8, 400, 4, 0.01, 999, 0,
                             grid_params=({}, {"rho": 0.99}))
    assert rep.decision == "reject"


@pytest.mark.slow
def test_compare_grid_types_null():
    accepted = sum(
        compare_grid_types(EUCLID, ("bernoulli", "bernoulli"), 8, 400, 4, 0.05, 999, s).decision
        == "accept" for s in range(20))
    assert accepted >= 18
