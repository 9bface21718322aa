"""Generalized max eigenvalue: scalar entry point, batched closed forms,
maximizing directions, all against a brute-force direction-sampling oracle."""
from __future__ import annotations

import numpy as np
import pytest

from causal_surgery import spd_generalized_max_eigenvalue
from causal_surgery.eigen import gen_max_eig_batch, gen_max_eig_direction
from causal_surgery.errors import DomainError, ShapeError


def _random_spd(rng, d):
    m = rng.standard_normal((d, d))
    return m @ m.T + d * np.eye(d)


def _oracle(A, B, n_dirs=10_000):
    """sup over sampled unit directions of B(v,v) / A(v,v)."""
    rng = np.random.default_rng(12345)
    v = rng.standard_normal((n_dirs, A.shape[0]))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    num = np.einsum("ni,ij,nj->n", v, B, v)
    den = np.einsum("ni,ij,nj->n", v, A, v)
    return float(np.max(num / den))


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("d", [1, 2])
def test_scalar_matches_direction_oracle(seed, d):
    rng = np.random.default_rng(seed)
    A = _random_spd(rng, d)
    B = _random_spd(rng, d) - 0.5 * np.eye(d)  # symmetric, possibly indefinite
    mu = spd_generalized_max_eigenvalue(A, B)
    oracle = _oracle(A, B)
    # direction sampling can only undershoot the supremum
    assert mu >= oracle - 1e-12
    assert abs(mu - oracle) <= 1e-3 * max(abs(mu), 1.0)


def test_identity_pencil():
    assert spd_generalized_max_eigenvalue(np.eye(2), np.eye(2)) == pytest.approx(1.0)
    assert spd_generalized_max_eigenvalue(
        np.eye(2), np.diag([3.0, 7.0])
    ) == pytest.approx(7.0)


def test_scaling_covariance():
    rng = np.random.default_rng(0)
    A = _random_spd(rng, 2)
    B = _random_spd(rng, 2)
    mu = spd_generalized_max_eigenvalue(A, B)
    assert spd_generalized_max_eigenvalue(A, 5.0 * B) == pytest.approx(5.0 * mu)
    assert spd_generalized_max_eigenvalue(2.0 * A, B) == pytest.approx(mu / 2.0)


def test_rejects_non_spd_A():
    with pytest.raises(DomainError):
        spd_generalized_max_eigenvalue(np.diag([1.0, -1.0]), np.eye(2))


def test_rejects_asymmetric_B():
    with pytest.raises(DomainError):
        spd_generalized_max_eigenvalue(np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_rejects_shape_mismatch():
    with pytest.raises(ShapeError):
        spd_generalized_max_eigenvalue(np.eye(2), np.eye(3))


@pytest.mark.parametrize("seed", range(10))
def test_batch_matches_scalar(seed):
    rng = np.random.default_rng(100 + seed)
    A = np.stack([_random_spd(rng, 2) for _ in range(40)])
    B = np.stack([_random_spd(rng, 2) - np.eye(2) for _ in range(40)])
    batched = gen_max_eig_batch(A, B)
    for i in range(40):
        assert batched[i] == pytest.approx(
            spd_generalized_max_eigenvalue(A[i], B[i]), rel=1e-10, abs=1e-12
        )


def test_batch_d1():
    A = np.array([[[2.0]], [[4.0]]])
    B = np.array([[[6.0]], [[1.0]]])
    np.testing.assert_allclose(gen_max_eig_batch(A, B), [3.0, 0.25])


@pytest.mark.parametrize("seed", range(10))
def test_direction_achieves_maximum(seed):
    rng = np.random.default_rng(200 + seed)
    A = np.stack([_random_spd(rng, 2) for _ in range(25)])
    B = np.stack([_random_spd(rng, 2) for _ in range(25)])
    mu = gen_max_eig_batch(A, B)
    v = gen_max_eig_direction(A, B)
    ratio = np.einsum("ni,nij,nj->n", v, B, v) / np.einsum("ni,nij,nj->n", v, A, v)
    np.testing.assert_allclose(ratio, mu, rtol=1e-8)


def test_direction_degenerate_pencil_returns_unit_vector():
    A = np.eye(2)[None]
    v = gen_max_eig_direction(A, 3.0 * A)
    np.testing.assert_allclose(np.linalg.norm(v, axis=-1), 1.0)
