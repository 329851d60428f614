import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chirpsep import DomainError, SolverError
from chirpsep.lstat import TrimMask
from chirpsep.recovery import (
    MeasurementSystem, build_system, l1_objective, largest_squared_singular_value,
    soft_threshold, solve_greedy, solve_l1, spectrum_to_signal,
)
from chirpsep.synth import SinusoidSpec, gen_sinusoid, mix
from chirpsep.transforms import build_tf_to_spectrum, stft
from conftest import crandn, naive_dft, row_random_mask


def tone_mixture(n_len, bins, amps):
    return mix([gen_sinusoid(SinusoidSpec(1.0, k, 0.0), n_len) * a for k, a in zip(bins, amps)])


def system_for(y, m, kept):
    tf = stft(y, m)
    return build_system(tf, TrimMask(kept), build_tf_to_spectrum(y.size, m))


def test_full_mask_square_system(rng):
    y = crandn(rng, 32)
    sys_ = system_for(y, 8, np.ones((8, 4), dtype=bool))
    assert sys_.matrix.shape == (32, 32)
    X = np.linalg.solve(sys_.matrix, sys_.measurements)
    assert np.max(np.abs(X - naive_dft(y))) < 1e-8


def test_single_point_system(rng):
    y = crandn(rng, 32)
    kept = np.zeros((8, 4), dtype=bool)
    kept[3, 2] = True
    sys_ = system_for(y, 8, kept)
    assert sys_.matrix.shape == (1, 32)
    assert abs(sys_.matrix @ naive_dft(y) - sys_.measurements)[0] < 1e-10
    # the single row is stacked index 2*8 + 3
    assert list(sys_.rows) == [19]


def test_random_mask_true_spectrum_consistent(rng):
    y = tone_mixture(64, [5, 17], [1.0, 0.5j])
    sys_ = system_for(y, 8, row_random_mask(rng, (8, 8), 0.5))
    assert sys_.matrix.shape[0] == 32
    X = naive_dft(y)
    assert np.linalg.norm(sys_.matrix @ X - sys_.measurements) < 1e-10


def test_build_system_errors(rng):
    tf = stft(crandn(rng, 16), 4)
    op = build_tf_to_spectrum(16, 4)
    with pytest.raises(DomainError):
        build_system(tf, TrimMask(np.zeros((4, 4), dtype=bool)), op)
    with pytest.raises(DomainError):
        build_system(tf, TrimMask(np.ones((4, 3), dtype=bool)), op)
    with pytest.raises(DomainError):
        build_system(tf, TrimMask(np.ones((4, 4), dtype=bool)), op[:8])


def test_greedy_one_sparse_exact():
    y = gen_sinusoid(SinusoidSpec(0.8, 9, 0.3), 64)
    rep = solve_greedy(system_for(y, 8, np.ones((8, 8), dtype=bool)), 1)
    assert rep.support == [9]
    assert abs(rep.solution[9] - 0.8 * 64 * np.exp(0.3j)) < 1e-10
    assert rep.residual_norm < 1e-10
    assert rep.converged


def test_greedy_two_tones_with_deletion(rng):
    y = tone_mixture(64, [5, 17], [1.0, 0.6 - 0.2j])
    kept = row_random_mask(rng, (8, 8), 0.5)
    sys_ = system_for(y, 8, kept)
    rep = solve_greedy(sys_, 2)
    assert sorted(rep.support) == [5, 17]
    # oracle: least squares restricted to the true support
    coef, *_ = np.linalg.lstsq(sys_.matrix[:, [5, 17]], sys_.measurements, rcond=None)
    assert np.max(np.abs(rep.solution[[5, 17]] - coef)) < 1e-6
    assert np.count_nonzero(rep.solution) == 2


def test_greedy_zero_measurements():
    sys_ = system_for(np.zeros(32, dtype=complex), 8, np.ones((8, 4), dtype=bool))
    rep = solve_greedy(sys_, 3)
    assert rep.iterations == 0 and rep.converged
    assert np.all(rep.solution == 0)


def test_greedy_stops_on_tolerance():
    y = gen_sinusoid(SinusoidSpec(1.0, 3, 0.0), 32)
    rep = solve_greedy(system_for(y, 8, np.ones((8, 4), dtype=bool)), 5)
    assert rep.iterations == 1 and rep.converged


def test_greedy_stall_reports_not_converged():
    a = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    rep = solve_greedy(MeasurementSystem(np.array([0.0, 1.0]), a), 3)
    # third column is zero and the residual vanished: tolerance stop first
    assert rep.converged
    a = np.array([[1.0, 0.0], [0.0, 0.0]])
    rep = solve_greedy(MeasurementSystem(np.array([1.0, 1.0]), a), 2)
    assert not rep.converged and rep.support == [0]


def test_greedy_rank_deficiency_raises():
    a = np.array([[1.0, 1.0], [0.0, 1e-17]])
    with pytest.raises(SolverError, match="rank deficient"):
        solve_greedy(MeasurementSystem(np.array([1.0, 1.0]), a), 2)


def test_greedy_argument_checks(rng):
    sys_ = system_for(crandn(rng, 16), 4, np.ones((4, 4), dtype=bool))
    with pytest.raises(DomainError):
        solve_greedy(sys_, 0)
    with pytest.raises(DomainError):
        solve_greedy(sys_, 1, tol=0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 3))
def test_greedy_consistency(seed, k):
    rng = np.random.default_rng(seed)
    bins = rng.choice(64, size=k, replace=False)
    y = tone_mixture(64, bins, crandn(rng, k))
    sys_ = system_for(y, 8, row_random_mask(rng, (8, 8), 0.5))
    rep = solve_greedy(sys_, k)
    if rep.converged:
        assert np.linalg.norm(sys_.matrix @ rep.solution - sys_.measurements) <= (
            1e-8 * np.linalg.norm(sys_.measurements) + rep.residual_norm + 1e-12)
    assert rep.residual_norm == pytest.approx(
        np.linalg.norm(sys_.measurements - sys_.matrix @ rep.solution), abs=1e-12)


def test_soft_threshold():
    x = np.array([3 + 4j, 0.1, 0, -2.0])
    out = soft_threshold(x, 1.0)
    np.testing.assert_allclose(out, [(3 + 4j) * 0.8, 0, 0, -1.0])


def test_power_iteration_matches_svd(rng):
    a = crandn(rng, 20, 30)
    assert largest_squared_singular_value(a) == pytest.approx(np.linalg.norm(a, 2) ** 2, rel=1e-8)
    assert largest_squared_singular_value(np.zeros((3, 4))) == 0.0


def test_l1_square_system_tiny_lambda(rng):
    y = crandn(rng, 32)
    sys_ = system_for(y, 8, np.ones((8, 4), dtype=bool))
    lam = 1e-8 * np.max(np.abs(sys_.matrix.conj().T @ sys_.measurements))
    rep = solve_l1(sys_, lam, max_iter=2000, tol=1e-12)
    assert np.max(np.abs(rep.solution - naive_dft(y))) < 1e-4


def test_l1_full_shrinkage(rng):
    sys_ = system_for(crandn(rng, 32), 8, row_random_mask(rng, (8, 4), 0.5))
    lam = np.max(np.abs(sys_.matrix.conj().T @ sys_.measurements))
    rep = solve_l1(sys_, lam)
    assert np.all(rep.solution == 0)
    assert rep.converged


def test_l1_objective_monotone(rng):
    a = crandn(rng, 15, 40)
    x_true = np.zeros(40, dtype=complex)
    x_true[[3, 11, 30]] = [2, -1j, 1 + 1j]
    sys_ = MeasurementSystem(a @ x_true, a)
    rep = solve_l1(sys_, 0.1, max_iter=300, tol=1e-14)
    hist = np.array(rep.objective)
    assert len(hist) == rep.iterations + 1
    assert np.all(np.diff(hist) <= 1e-12 * hist[:-1])
    assert hist[-1] == pytest.approx(l1_objective(sys_, rep.solution, 0.1))


def test_l1_sparse_recovery(rng):
    y = tone_mixture(64, [5, 40], [1.0, -0.5])
    sys_ = system_for(y, 8, row_random_mask(rng, (8, 8), 0.5))
    lam = 1e-3 * np.max(np.abs(sys_.matrix.conj().T @ sys_.measurements))
    rep = solve_l1(sys_, lam, max_iter=5000, tol=1e-12)
    X = naive_dft(y)
    assert np.max(np.abs(rep.solution - X)) < 0.01 * np.max(np.abs(X))


def test_l1_errors(rng):
    a = crandn(rng, 4, 8)
    with pytest.raises(DomainError):
        solve_l1(MeasurementSystem(np.ones(4), a), 0.0)
    with pytest.raises(DomainError):
        solve_l1(MeasurementSystem(np.ones(4), a), 1.0, max_iter=0)
    with pytest.raises(SolverError):
        solve_l1(MeasurementSystem(np.array([np.nan, 1, 1, 1]), a), 1e-3)


def test_spectrum_to_signal():
    np.testing.assert_allclose(spectrum_to_signal([4, 0, 0, 0]), [1, 1, 1, 1])
    assert np.all(spectrum_to_signal(np.zeros(8)) == 0)


def test_measurement_system_validation():
    with pytest.raises(DomainError):
        MeasurementSystem(np.ones(3), np.ones((2, 4)))
    with pytest.raises(DomainError):
        MeasurementSystem(np.ones(5), np.ones((5, 4)))


def test_report_json():
    y = gen_sinusoid(SinusoidSpec(1.0, 2, 0.0), 16)
    rep = solve_greedy(system_for(y, 4, np.ones((4, 4), dtype=bool)), 1)
    d = json.loads(json.dumps(rep.to_dict()))
    assert set(d) == {"residual_norm", "iterations", "converged", "nonzero_bins"}
    assert d["nonzero_bins"][0]["k"] == 2
    assert d["nonzero_bins"][0]["re"] == pytest.approx(16.0)
