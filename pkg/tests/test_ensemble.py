import math

import numpy as np
import pytest

from uqd.boolean_functions import BiasHypothesis, enumerate_weight_class
from uqd.caps import CapExceededError
from uqd.ensemble import (
    TwoEigenspaceState,
    check_density_operator,
    collective_trace_distance,
    densify,
    ensemble_brute_force,
    ensemble_closed_form,
    frobenius,
    helstrom_success,
    permutation_matrix,
    plus_projector,
    t_copy_ensemble_brute,
    tensor_power,
    trace_distance_closed,
    trace_distance_dense,
)
from uqd.statevector import address_state


def loop_average(N, m):
    """Independent oracle: explicit loop over the class with np.outer."""
    acc = np.zeros((N, N), dtype=complex)
    tables = enumerate_weight_class(N, m)
    for f in tables:
        v = address_state(f).amplitudes
        acc += np.outer(v, v.conj())
    return acc / len(tables)


def test_closed_form_examples():
    s = ensemble_closed_form(BiasHypothesis(8, 0))
    assert s.mu_sq == 1.0
    np.testing.assert_allclose(densify(s), plus_projector(8), atol=1e-15)
    s = ensemble_closed_form(BiasHypothesis(4, 1))
    assert s.mu_sq == 0.25 and s.lambda_perp == 0.25
    np.testing.assert_allclose(densify(s), np.eye(4) / 4, atol=1e-15)
    minus = np.array([1, -1]) / math.sqrt(2)
    np.testing.assert_allclose(densify(ensemble_closed_form(BiasHypothesis(2, 1))), np.outer(minus, minus), atol=1e-15)


def test_two_eigenspace_invariants():
    for N in (2, 4, 8, 16):
        for m in range(N + 1):
            s = ensemble_closed_form(BiasHypothesis(N, m))
            assert s.lambda_plus >= 0 and s.lambda_perp >= 0
            assert s.lambda_plus + (N - 1) * s.lambda_perp == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        TwoEigenspaceState(4, 1.5)


def test_densify_examples():
    for N in (2, 4, 8):
        np.testing.assert_allclose(densify(TwoEigenspaceState(N, 1.0)), np.full((N, N), 1 / N), atol=1e-15)
        np.testing.assert_allclose(densify(TwoEigenspaceState(N, 1 / N)), np.eye(N) / N, atol=1e-15)
    check_density_operator(densify(TwoEigenspaceState(16, 0.3)))
    with pytest.raises(CapExceededError):
        densify(TwoEigenspaceState(128, 0.5))


def test_brute_force_examples():
    np.testing.assert_allclose(ensemble_brute_force(4, 0), plus_projector(4), atol=1e-15)
    assert np.max(np.abs(ensemble_brute_force(4, 1) - np.eye(4) / 4)) <= 1e-14
    closed = densify(ensemble_closed_form(BiasHypothesis(8, 3)))
    assert frobenius(ensemble_brute_force(8, 3), closed) <= 1e-12


@pytest.mark.parametrize("N", [2, 4, 8])
def test_brute_force_matches_loop_oracle(N):
    for m in range(N + 1):
        np.testing.assert_allclose(ensemble_brute_force(N, m), loop_average(N, m), atol=1e-14)


@pytest.mark.parametrize("N", [2, 4, 8, 16])
def test_brute_force_matches_closed_form(N):
    for m in range(N + 1):
        rho = ensemble_brute_force(N, m)
        check_density_operator(rho)
        assert frobenius(rho, densify(ensemble_closed_form(BiasHypothesis(N, m)))) <= 1e-12


def test_alpha_beta_parameterization():
    # rho = alpha I + beta |+><+| with alpha = lambda_perp, beta = mu^2 - lambda_perp
    for m in range(9):
        s = ensemble_closed_form(BiasHypothesis(8, m))
        alpha, beta = s.lambda_perp, s.mu_sq - s.lambda_perp
        assert alpha * 8 + beta == pytest.approx(1.0, abs=1e-15)
        np.testing.assert_allclose(densify(s), alpha * np.eye(8) + beta * plus_projector(8), atol=1e-15)


def test_permutation_invariance():
    rng = np.random.default_rng(0)
    rho = ensemble_brute_force(8, 3)
    for _ in range(20):
        P = permutation_matrix(rng.permutation(8))
        assert np.max(np.abs(P @ rho @ P.T - rho)) <= 1e-12


def test_complement_symmetry_exact():
    for N in (4, 8):
        for m in range(N + 1):
            np.testing.assert_array_equal(ensemble_brute_force(N, m), ensemble_brute_force(N, N - m))


@pytest.mark.parametrize("N", [2, 4, 8, 16])
def test_eigenstructure_and_commutation(N):
    mats = []
    for m in range(N + 1):
        s = ensemble_closed_form(BiasHypothesis(N, m))
        rho = densify(s)
        np.testing.assert_allclose(np.linalg.eigvalsh(rho), s.eigenvalues(), atol=1e-10)
        # |+> is the lambda_plus eigenvector
        plus = np.full(N, 1 / math.sqrt(N))
        np.testing.assert_allclose(rho @ plus, s.mu_sq * plus, atol=1e-12)
        mats.append(rho)
    for a in mats:
        for b in mats:
            assert np.max(np.abs(a @ b - b @ a)) <= 1e-12


def test_trace_distance_closed_examples():
    N = 8
    assert trace_distance_closed(BiasHypothesis(N, 0), BiasHypothesis(N, N // 2)) == 1.0
    for m in range(N + 1):
        assert trace_distance_closed(BiasHypothesis(N, m), BiasHypothesis(N, N - m)) == 0.0
    assert trace_distance_closed(BiasHypothesis(4, 0), BiasHypothesis(4, 1)) == 0.75
    with pytest.raises(ValueError):
        trace_distance_closed(BiasHypothesis(4, 0), BiasHypothesis(8, 0))


def test_trace_distance_dense_examples():
    rho = ensemble_brute_force(4, 1)
    assert trace_distance_dense(rho, rho) == pytest.approx(0.0, abs=1e-15)
    a, b = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    assert trace_distance_dense(a, b) == pytest.approx(1.0, abs=1e-15)
    assert trace_distance_dense(ensemble_brute_force(4, 0), ensemble_brute_force(4, 1)) == pytest.approx(0.75, abs=1e-12)
    with pytest.raises(ValueError):
        trace_distance_dense(np.eye(2) / 2, np.eye(4) / 4)
    with pytest.raises(ValueError, match="Hermitian"):
        trace_distance_dense(np.array([[0.5, 1.0], [0.0, 0.5]]), np.eye(2) / 2)


@pytest.mark.parametrize("N", [4, 8, 16])
def test_trace_distance_dense_matches_closed(N):
    rhos = [densify(ensemble_closed_form(BiasHypothesis(N, m))) for m in range(N + 1)]
    for m0 in range(N + 1):
        for m1 in range(N + 1):
            D = trace_distance_closed(BiasHypothesis(N, m0), BiasHypothesis(N, m1))
            assert abs(trace_distance_dense(rhos[m0], rhos[m1]) - D) <= 1e-10
            trace_norm = np.sum(np.abs(np.linalg.eigvalsh(rhos[m0] - rhos[m1])))
            assert abs(trace_norm - 2 * D) <= 1e-10


def test_helstrom_success_examples():
    assert helstrom_success(BiasHypothesis(8, 0), BiasHypothesis(8, 4)) == 1.0
    assert helstrom_success(BiasHypothesis(8, 3), BiasHypothesis(8, 5)) == 0.5
    assert helstrom_success(BiasHypothesis(4, 0), BiasHypothesis(4, 1)) == 0.875


def test_t_copy_examples():
    rho2 = t_copy_ensemble_brute(4, 0, 2)
    assert frobenius(rho2, tensor_power(ensemble_brute_force(4, 0), 2)) <= 1e-12
    minus = np.array([1, -1]) / math.sqrt(2)
    proj = np.outer(minus, minus)
    assert frobenius(t_copy_ensemble_brute(2, 1, 3), tensor_power(proj, 3)) <= 1e-14
    assert frobenius(t_copy_ensemble_brute(4, 1, 2), tensor_power(ensemble_brute_force(4, 1), 2)) > 0.01


def test_t_copy_matches_loop_oracle():
    acc = np.zeros((16, 16), dtype=complex)
    tables = enumerate_weight_class(4, 2)
    for f in tables:
        v = np.kron(address_state(f).amplitudes, address_state(f).amplitudes)
        acc += np.outer(v, v.conj())
    np.testing.assert_allclose(t_copy_ensemble_brute(4, 2, 2), acc / len(tables), atol=1e-14)
    check_density_operator(t_copy_ensemble_brute(4, 1, 3))


def test_t_copy_cap(monkeypatch):
    with pytest.raises(CapExceededError):
        t_copy_ensemble_brute(16, 1, 4)
    monkeypatch.setenv("UQD_MAX_TCOPY_DIM", "16")
    with pytest.raises(CapExceededError):
        t_copy_ensemble_brute(4, 1, 3)


def test_collective_trace_distance():
    for N in (4, 8):
        for m0 in range(N + 1):
            for m1 in range(N + 1):
                D = trace_distance_closed(BiasHypothesis(N, m0), BiasHypothesis(N, m1))
                assert collective_trace_distance(N, m0, m1, 1) == pytest.approx(D, abs=1e-12)
    for t in (1, 2, 3):
        assert collective_trace_distance(4, 1, 3, t) == pytest.approx(0.0, abs=1e-12)
    value = collective_trace_distance(4, 0, 1, 2)
    assert 0 < value <= 1
    # t copies carry at least as much information as one
    assert value >= collective_trace_distance(4, 0, 1, 1) - 1e-12


def test_check_density_operator_rejects_bad_input():
    with pytest.raises(ValueError, match="trace"):
        check_density_operator(np.eye(2))
    with pytest.raises(ValueError, match="negative"):
        check_density_operator(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError, match="Hermitian"):
        check_density_operator(np.array([[0.5, 0.2], [0.0, 0.5]]))
