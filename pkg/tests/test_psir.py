import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psirmon import numlin, simlab
from psirmon.errors import DomainError
from psirmon.psir import (
    fit_psir,
    fit_psir_multi,
    krylov_sequence,
    krylov_spectrum,
    select_q,
)
from psirmon.sir import fit_sir

import oracles


def linear_design(seed, n=500):
    rng = np.random.default_rng(seed)
    X = simlab.gen_predictors(n, 10, 0.5, rng)
    y = simlab.gen_response(X, "linear", 0.05, rng)
    return X, y


def test_krylov_columns_shape_and_values():
    S = np.diag([1.0, 2.0, 3.0])
    w = np.ones(3)
    basis = krylov_sequence(S, w, 3)
    np.testing.assert_allclose(basis.columns, [[1, 1, 1], [1, 2, 4], [1, 3, 9]], rtol=1e-14)


def test_krylov_q_range():
    with pytest.raises(DomainError):
        krylov_sequence(np.eye(3), np.ones(3), 0)
    with pytest.raises(DomainError):
        krylov_sequence(np.eye(3), np.ones(3), 4)


def test_select_q_identity_is_one():
    # S = I collapses the Krylov sequence to multiples of omega
    assert select_q(np.eye(4), np.array([1.0, 2.0, 0.0, -1.0])) == 1


def test_select_q_diagonal_spread():
    S = np.diag([1.0, 4.0, 16.0])
    lam = krylov_spectrum(S, np.ones(3))
    ratios = lam[:-1] / lam[1:]
    assert select_q(S, np.ones(3), alpha=1.5) == max(1, int(np.sum(ratios > 1.5)))


def test_select_q_rejects_alpha_at_most_one():
    with pytest.raises(DomainError):
        select_q(np.eye(2), np.ones(2), alpha=1.0)


def test_krylov_spectrum_matches_direct_eigenvalues():
    S = np.diag([1.0, 2.0, 3.0])
    R = np.column_stack([np.linalg.matrix_power(S, j) @ np.ones(3) for j in range(3)])
    direct = np.sort(np.linalg.eigvalsh(R @ R.T))[::-1]
    np.testing.assert_allclose(krylov_spectrum(S, np.ones(3)), direct, rtol=1e-10)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_forced_full_order_equals_sir(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((150, 5)) @ (np.eye(5) + 0.3 * rng.standard_normal((5, 5)))
    y = X[:, 0] - X[:, 2] + 0.2 * rng.standard_normal(150)
    m = fit_psir(X, y, q=5)
    np.testing.assert_allclose(m.beta, m.beta_sir, atol=1e-6)


def test_q1_direction_is_omega():
    X, y = linear_design(1)
    m = fit_psir(X, y, q=1)
    omega = m.basis.omega
    assert oracles.abs_cos(m.beta, omega) == pytest.approx(1.0, abs=1e-12)


def test_psir_projector_idempotent_and_fixes_basis():
    X, y = linear_design(2)
    m = fit_psir(X, y, q=3)
    P = m.projector
    np.testing.assert_allclose(P @ P, P, atol=1e-8)
    np.testing.assert_allclose(P @ m.basis.unit_columns, m.basis.unit_columns, atol=1e-8)


def test_psir_recovers_linear_direction():
    X, y = linear_design(3)
    m = fit_psir(X, y)
    assert oracles.abs_cos(m.beta, np.ones(10)) >= 0.99
    assert np.linalg.norm(m.beta) == pytest.approx(1.0)


def test_psir_multi_first_matches_single():
    X, y = linear_design(4)
    dirs = fit_psir_multi(X, y, max_dirs=3)
    assert 1 <= len(dirs) <= 3
    single = fit_psir(X, y).beta
    np.testing.assert_allclose(dirs[0], single, atol=1e-10)
    for d in dirs:
        assert np.linalg.norm(d) == pytest.approx(1.0)


def test_psir_multi_stops_on_variance():
    rng = np.random.default_rng(5)
    X = np.column_stack([10 * rng.standard_normal(200), 0.01 * rng.standard_normal((200, 3))])
    y = X[:, 0] + rng.standard_normal(200)
    dirs = fit_psir_multi(X, y, max_dirs=4, var_tol=0.05)
    assert len(dirs) == 1


def test_psir_multi_bad_max_dirs():
    X, y = linear_design(6, n=100)
    with pytest.raises(DomainError):
        fit_psir_multi(X, y, max_dirs=11)
