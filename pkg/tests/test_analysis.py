import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matrixdist import (DegenerateSpectrumError, ParameterError, entropy_profile,
                        evaluate_matrix, make_kernel, mm_entropy, random_graph_matrix,
                        sample_symmetric_grid, semicircle_distance, spectral_dispersion, spectrum)
from matrixdist.analysis import SpectrumSummary, semicircle_cdf, semicircle_quantile
from matrixdist.spaces_kernels import UNIT

from .oracles import interval_covering_number, nystrom_abs_kernel

EUCLID = make_kernel("interval-euclid")
METRICS = ["interval-euclid", "circle-metric", "sphere-geodesic", "halfline-cauchy-euclid"]


def _euclid(n, seed):
    return evaluate_matrix(EUCLID, sample_symmetric_grid(UNIT, n, seed))


def test_covering_oracle():
    assert interval_covering_number(0.25) == 2
    assert interval_covering_number(0.1) == 5


def test_mm_entropy_interval():
    m = _euclid(2000, 0)
    assert mm_entropy(m, 0.25) == 2
    assert mm_entropy(m, 0.1) in (4, 5, 6)


def test_mm_entropy_random_graph():
    for n in (100, 400):
        # every ball is a singleton, so floor(n/2) + 1 centers are needed
        assert mm_entropy(random_graph_matrix(0.5, n, 1), 0.5) == n // 2 + 1


def test_mm_entropy_validation():
    with pytest.raises(ParameterError):
        mm_entropy(np.array([[0.0, 1.0], [2.0, 0.0]]), 0.5)
    with pytest.raises(ParameterError):
        mm_entropy(np.array([[1.0]]), 0.5)
    with pytest.raises(ParameterError):
        mm_entropy(_euclid(5, 0), 1.5)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 0.98), st.floats(0.01, 0.98))
def test_mm_entropy_monotone_in_epsilon(seed, a, b):
    lo, hi = sorted((a, b))
    m = _euclid(150, seed)
    assert mm_entropy(m, lo) >= mm_entropy(m, hi)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 0.98))
def test_mm_entropy_permutation_invariant(seed, eps):
    m = _euclid(120, seed).values
    perm = np.random.default_rng(seed).permutation(120)
    assert mm_entropy(m, eps) == mm_entropy(m[np.ix_(perm, perm)], eps)


def test_entropy_profile_interval_stabilizes():
    prof = entropy_profile(EUCLID, [0.5, 0.25, 0.1], [500, 2000], seed=0)
    assert not prof.diverging
    assert prof.n == 2000
    assert prof.H == sorted(prof.H)
    assert all(h >= 1 for hs in prof.by_n.values() for h in hs)


def test_entropy_profile_random_graph_diverges():
    prof = entropy_profile("random-graph", [0.5], [100, 400], seed=0)
    assert prof.diverging
    assert prof.by_n[400][0] > prof.by_n[100][0] >= 25


@pytest.mark.parametrize("kid", METRICS)
def test_entropy_large_radius(kid):
    assert entropy_profile(make_kernel(kid), [0.9], [400], seed=3).H == [1]


def test_entropy_profile_validation():
    with pytest.raises(ParameterError):
        entropy_profile(EUCLID, [0.1, 0.5], [10], 0)
    with pytest.raises(ParameterError):
        entropy_profile(make_kernel("add-mod1"), [0.5], [10], 0)


def test_spectrum_small():
    assert spectrum(np.array([[0.0, 1.0], [1.0, 0.0]]), "none").eigenvalues.tolist() == \
        pytest.approx([1.0, -1.0])
    assert spectrum(np.array([[0.0]]), "none").eigenvalues.tolist() == [0.0]
    with pytest.raises(ParameterError):
        spectrum(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ParameterError):
        spectrum(np.eye(2), "by-log-n")


def test_spectrum_normalizations():
    m = _euclid(50, 1)
    raw = spectrum(m, "none").eigenvalues
    assert np.allclose(spectrum(m, "by-n").eigenvalues, raw / 50)
    assert np.allclose(spectrum(m, "by-sqrt-n").eigenvalues, raw / np.sqrt(50))
    assert np.all(np.diff(raw) <= 0)


@pytest.mark.parametrize("kid", METRICS)
@pytest.mark.parametrize("seed", range(3))
def test_spectrum_trace_and_dominance(kid, seed):
    k = make_kernel(kid)
    m = evaluate_matrix(k, sample_symmetric_grid(k.space_x, 64, seed))
    ev = spectrum(m, "none").eigenvalues
    assert len(ev) == 64
    assert abs(ev.sum()) <= 64 * 1e-9 * max(1.0, np.abs(ev).max())
    assert ev[0] > 0 and ev[0] >= np.abs(ev[1:]).max()


def test_top_eigenvalue_against_nystrom():
    oracle = nystrom_abs_kernel(2048)
    tops = [spectrum(_euclid(1024, s)).eigenvalues[0] for s in range(20)]
    assert np.mean(tops) == pytest.approx(oracle[0], rel=0.03)
    # single fragments fluctuate by about 1.5%
    assert np.mean(np.abs(np.array(tops) / oracle[0] - 1) <= 0.03) >= 0.8


def test_deterministic_limit_top3_n_and_2n():
    def top3(n):
        evs = []
        for s in range(10):
            ev = spectrum(_euclid(n, 100 + s)).eigenvalues
            evs.append(ev[np.argsort(-np.abs(ev))][:3])
        return np.mean(evs, axis=0)
    assert np.allclose(top3(512), top3(1024), rtol=0.05)


def test_semicircle_helpers():
    x = np.linspace(-2, 2, 9)
    assert semicircle_cdf(-2.0) == 0.0 and semicircle_cdf(2.0) == 1.0
    assert np.allclose(semicircle_cdf(semicircle_quantile(semicircle_cdf(x))), semicircle_cdf(x))
    assert semicircle_quantile(0.5) == pytest.approx(0.0, abs=1e-12)


def test_semicircle_self_match():
    q = semicircle_quantile((np.arange(1000) + 0.5) / 1000)
    spec = SpectrumSummary(np.sort(q)[::-1], "none", 1000)
    assert semicircle_distance(spec) <= 0.01


def test_semicircle_degenerate():
    spec = SpectrumSummary(np.array([5.0, 1.0, 1.0, 1.0]), "none", 4)
    with pytest.raises(DegenerateSpectrumError):
        semicircle_distance(spec)


def test_semicircle_distance_of_distance_matrix_is_large():
    assert semicircle_distance(spectrum(_euclid(1024, 0))) > 0.1


def test_wigner_matrix_is_close_to_semicircle():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(800, 800))
    w = (a + a.T) / np.sqrt(2)
    assert semicircle_distance(spectrum(w, "by-sqrt-n")) < 0.1


def test_dispersion_bounded_vs_cauchy():
    assert spectral_dispersion(EUCLID, 512, 20, 0)["cv"] <= 0.05
    assert spectral_dispersion(make_kernel("halfline-cauchy-euclid"), 512, 20, 0)["cv"] >= 0.2


def test_dispersion_same_seed_is_zero():
    rep = spectral_dispersion(EUCLID, 64, 2, 5, same_seed=True)
    assert rep["cv"] == 0.0
    with pytest.raises(ParameterError):
        spectral_dispersion(EUCLID, 64, 1, 5)
