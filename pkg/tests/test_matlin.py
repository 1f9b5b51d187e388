import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from igmanova import matlin
from igmanova.errors import NotPositiveDefinite, RankDeficient
from igmanova.model import complex_normal

from conftest import random_hpd

seeds = st.integers(min_value=0, max_value=2**32 - 1)
sizes = st.integers(min_value=1, max_value=12)


class TestProjector:
    def test_axis_aligned_column(self):
        P = matlin.projector(np.array([[1.0], [0.0]]))
        np.testing.assert_allclose(P, [[1, 0], [0, 0]], atol=1e-15)

    def test_full_space(self):
        np.testing.assert_allclose(matlin.projector(np.eye(3)), np.eye(3), atol=1e-14)

    def test_scale_invariant(self):
        a = np.array([[1.0], [1.0]]) / np.sqrt(2)
        np.testing.assert_allclose(matlin.projector(5 * a), matlin.projector(a), atol=1e-14)

    def test_empty_basis_is_zero(self):
        assert np.all(matlin.projector(np.zeros((4, 0))) == 0)

    def test_rank_deficient(self):
        A = np.array([[1.0, 2.0], [2.0, 4.0], [0.0, 0.0]])
        with pytest.raises(RankDeficient):
            matlin.projector(A)

    @given(seeds, sizes, st.integers(1, 12))
    @settings(max_examples=60, deadline=None)
    def test_projector_properties(self, seed, n, p):
        p = min(p, n)
        rng = np.random.default_rng(seed)
        A = complex_normal(rng, (n, p))
        P = matlin.projector(A)
        assert np.linalg.norm(P - P.conj().T) <= 1e-12
        assert np.linalg.norm(P @ P - P) <= 1e-10
        assert abs(np.trace(P).real - p) <= 1e-10
        G = complex_normal(rng, (p, p)) + 3 * np.eye(p)
        assert np.linalg.norm(matlin.projector(A @ G) - P) <= 1e-10


class TestComplementProjector:
    def test_axis_aligned(self):
        np.testing.assert_allclose(matlin.complement_projector(np.array([[1.0], [0.0]])),
                                   [[0, 0], [0, 1]], atol=1e-15)

    def test_full_space_is_zero(self):
        assert np.linalg.norm(matlin.complement_projector(np.eye(4))) <= 1e-14

    def test_direct_sum(self, rng):
        A = complex_normal(rng, (4, 2))
        P, Q = matlin.projector(A), matlin.complement_projector(A)
        np.testing.assert_allclose(P + Q, np.eye(4), atol=1e-14)
        assert np.linalg.norm(P @ Q) <= 1e-10
        assert np.linalg.norm(Q @ Q - Q) <= 1e-10


class TestInverseSquareRoot:
    def test_identity(self):
        np.testing.assert_allclose(matlin.hpd_inv_sqrt(np.eye(5)), np.eye(5), atol=1e-15)

    def test_diagonal(self):
        np.testing.assert_allclose(matlin.hpd_inv_sqrt(np.diag([4.0, 9.0])),
                                   np.diag([0.5, 1 / 3]), atol=1e-15)

    @given(seeds, sizes)
    @settings(max_examples=60, deadline=None)
    def test_defining_property_and_commutation(self, seed, n):
        S = random_hpd(np.random.default_rng(seed), n)
        X = matlin.hpd_inv_sqrt(S)
        assert np.linalg.norm(X @ S @ X - np.eye(n)) <= 1e-10 * n
        assert np.linalg.norm(X @ S - S @ X) <= 1e-10 * np.linalg.norm(S)
        assert np.all(np.linalg.eigvalsh(X) > 0)
        R = matlin.hpd_sqrt(S)
        assert np.linalg.norm(R @ R - S) <= 1e-10 * np.linalg.norm(S)

    def test_indefinite_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            matlin.hpd_inv_sqrt(np.diag([1.0, -1.0]))

    def test_semidefinite_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            matlin.hpd_inv_sqrt(np.diag([1.0, 0.0]))

    def test_non_hermitian_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            matlin.hpd_inv_sqrt(np.array([[2.0, 1.0], [0.0, 2.0]]))


class TestSolve:
    def test_identity(self, rng):
        B = complex_normal(rng, (3, 2))
        np.testing.assert_allclose(matlin.solve_hpd(np.eye(3), B), B, atol=1e-15)

    def test_scaled_identity(self):
        np.testing.assert_allclose(matlin.solve_hpd(2 * np.eye(3), np.eye(3)), np.eye(3) / 2,
                                   atol=1e-15)

    @given(seeds, sizes, st.integers(1, 5))
    @settings(max_examples=60, deadline=None)
    def test_residual(self, seed, n, m):
        rng = np.random.default_rng(seed)
        S = random_hpd(rng, n)
        B = complex_normal(rng, (n, m))
        X = matlin.solve_hpd(S, B)
        assert np.linalg.norm(S @ X - B) <= 1e-10 * np.linalg.norm(B)

    def test_singular_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            matlin.solve_hpd(np.zeros((2, 2)), np.eye(2))


class TestLogdet:
    def test_identity(self):
        assert matlin.logdet_hpd(np.eye(6)) == 0.0

    def test_diagonal(self):
        assert matlin.logdet_hpd(np.diag([np.e, np.e**2])) == pytest.approx(3.0, abs=1e-14)

    @given(seeds, sizes)
    @settings(max_examples=60, deadline=None)
    def test_eigenvalue_oracle_and_inverse(self, seed, n):
        S = random_hpd(np.random.default_rng(seed), n)
        ref = np.sum(np.log(np.linalg.eigvalsh(S)))
        ld = matlin.logdet_hpd(S)
        assert abs(ld - ref) <= 1e-10 * max(1.0, abs(ref))
        S_inv = matlin.solve_hpd(S, np.eye(n))
        assert abs(ld + matlin.logdet_hpd(matlin.hermitian_part(S_inv))) <= 1e-9

    def test_large_determinant_no_overflow(self):
        S = 1e200 * np.eye(4)
        assert matlin.logdet_hpd(S) == pytest.approx(4 * 200 * np.log(10))
