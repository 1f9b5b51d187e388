import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from igmanova import detectors as D
from igmanova import matlin
from igmanova.errors import SingularBlock
from igmanova.mis import mis_batch, mis_from_data, split_data
from igmanova.model import ProblemDims, Scenario, canonical_bases, complex_normal, synthesize

import oracle_values as ov
from conftest import DIMS_GRID, random_data

seeds = st.integers(0, 2**32 - 1)
grid = st.sampled_from(DIMS_GRID)


def rel(a, b):
    return abs(a - b) / max(1.0, abs(a))


class TestFrozenOracle:
    @pytest.mark.parametrize("name", D.DISTINCT)
    def test_mis_form(self, name):
        mp = mis_from_data(ov.Z, ov.DIMS)
        val = D.detectors_from_mis(mp.Ta, mp.Tb, ov.DIMS.K)[name]
        assert val == pytest.approx(ov.STATISTICS[name], rel=1e-12)

    @pytest.mark.parametrize("name", D.DETECTORS)
    def test_standard_form(self, name):
        rep = D.evaluate_all(ov.Z, ov.DIMS)[name]
        assert rep.value_standard == pytest.approx(ov.STATISTICS[D.MIS_FORM[name]], rel=1e-11)


class TestNullData:
    @pytest.mark.parametrize("dims", DIMS_GRID)
    def test_zero_cells_under_test(self, dims, rng):
        Z = random_data(rng, dims)
        Z[:, :dims.M] = 0
        reps = D.evaluate_all(Z, dims)
        assert reps["glr"].value_standard == pytest.approx(1.0, abs=1e-12)
        assert reps["glr"].value_mis == pytest.approx(1.0, abs=1e-12)
        for name in ("rao", "wald", "gradient", "durbin", "2s-glr", "lh"):
            assert abs(reps[name].value_standard) <= 1e-12
            assert abs(reps[name].value_mis) <= 1e-12


class TestDualForms:
    @given(seeds, grid)
    @settings(max_examples=80, deadline=None)
    def test_all_detectors(self, seed, dims):
        Z = random_data(np.random.default_rng(seed), dims)
        for rep in D.evaluate_all(Z, dims).values():
            assert rep.dual_form_gap <= 1e-8, rep

    @pytest.mark.parametrize("fn", [D.glr, D.rao, D.wald, D.gradient, D.durbin,
                                    D.two_step_glr, D.lh])
    def test_report_wrappers(self, fn, rng):
        dims = DIMS_GRID[0]
        rep = fn(random_data(rng, dims), dims)
        assert rep.dual_form_gap <= 1e-8


class TestExactEquivalences:
    @given(seeds, grid)
    @settings(max_examples=60, deadline=None)
    def test_wald_two_step(self, seed, dims):
        Z = random_data(np.random.default_rng(seed), dims)
        assert rel(D.two_step_glr_standard(Z, dims), D.wald_standard(Z, dims)) <= 1e-10

    def test_two_step_proportional_form(self, rng):
        """``Tr[Z^H Sc^{-1/2} P_delta Sc^{-1/2} Z P_C]`` written out directly."""
        dims = DIMS_GRID[1]
        Z = random_data(rng, dims)
        b = canonical_bases(dims)
        W = matlin.hpd_inv_sqrt(split_data(Z, dims).Sc)
        Pd = matlin.projector(W @ b.A) - matlin.projector(W @ b.Et)
        ref = np.trace(Z.conj().T @ W @ Pd @ W @ Z @ b.Vc1 @ b.Vc1.T).real
        assert rel(D.two_step_glr_standard(Z, dims), ref) <= 1e-10

    @given(seeds, grid)
    @settings(max_examples=60, deadline=None)
    def test_durbin_rao(self, seed, dims):
        Z = random_data(np.random.default_rng(seed), dims)
        assert rel(D.durbin_standard(Z, dims), D.rao_standard(Z, dims)) <= 1e-8

    @pytest.mark.parametrize("dims", DIMS_GRID)
    def test_durbin_kronecker_vs_trace(self, dims, rng):
        Z = random_data(rng, dims)
        assert rel(D.durbin_standard(Z, dims), D.rao_fisher_form(Z, dims)) <= 1e-9

    @pytest.mark.parametrize("dims", DIMS_GRID)
    def test_fisher_forms(self, dims, rng):
        Z = random_data(rng, dims)
        assert rel(D.wald_fisher_form(Z, dims), D.wald_standard(Z, dims)) <= 1e-9
        assert rel(D.gradient_fisher_form(Z, dims), D.gradient_standard(Z, dims)) <= 1e-9


class TestMisForms:
    def test_zero_invariant(self):
        out = D.detectors_from_mis(np.zeros((3, 3)), np.zeros((3, 3)), 19)
        assert out == {"glr": 1.0, "rao": 0.0, "wald": 0.0, "gradient": 0.0, "lh": 0.0}

    @given(st.floats(0, 1e3), st.floats(0, 1e3), st.integers(2, 100))
    def test_scalar_case(self, a, b, K):
        out = D.detectors_from_mis(np.array([[a]]), np.array([[b]]), K)
        assert out["glr"] == pytest.approx((1 + a + b) / (1 + b), rel=1e-12)
        assert out["lh"] == pytest.approx(a / (1 + b), rel=1e-12, abs=1e-300)
        assert out["wald"] == pytest.approx(a, rel=1e-15, abs=1e-300)
        assert out["gradient"] == pytest.approx(K * a / (1 + a + b), rel=1e-12, abs=1e-300)

    @given(seeds, grid)
    @settings(max_examples=40, deadline=None)
    def test_rao_alternative_form(self, seed, dims):
        mp = mis_from_data(random_data(np.random.default_rng(seed), dims), dims)
        I = np.eye(dims.M)
        S = mp.S
        alt = dims.K * (np.trace(S @ np.linalg.inv(I + S)) - np.trace(mp.Tb @ np.linalg.inv(I + mp.Tb))).real
        assert rel(D.detectors_from_mis(mp.Ta, mp.Tb, dims.K)["rao"], alt) <= 1e-9

    @pytest.mark.parametrize("dims", DIMS_GRID)
    def test_batch_matches_single(self, dims, rng):
        Z = np.stack([random_data(rng, dims) for _ in range(6)])
        Ta, Tb, _ = mis_batch(Z, dims)
        batch = D.detectors_from_mis(Ta, Tb, dims.K)
        for i in range(6):
            single = D.detectors_from_mis(Ta[i], Tb[i], dims.K)
            for k in D.DISTINCT:
                assert rel(batch[k][i], single[k]) <= 1e-12

    def test_not_psd_rejected(self):
        with pytest.raises(SingularBlock):
            D.detectors_from_mis(np.zeros((1, 1)), np.array([[-1.0]]), 10)

    def test_full_signal_space_lh_equals_wald(self, rng):
        dims = ProblemDims(8, 24, 8, 8, 0)
        reps = D.evaluate_all(random_data(rng, dims), dims)
        assert rel(reps["lh"].value_standard, reps["wald"].value_standard) <= 1e-10


class TestNonnegativity:
    @pytest.mark.parametrize("dims", DIMS_GRID)
    def test_many_instances(self, dims):
        rng = np.random.default_rng(dims.as_tuple())
        n = 10_000 // len(DIMS_GRID) + 1
        Z = np.stack([random_data(rng, dims, signal=rng.uniform(0, 3)) for _ in range(n)])
        Ta, Tb, valid = mis_batch(Z, dims)
        out = D.detectors_from_mis(Ta[valid], Tb[valid], dims.K)
        assert np.all(out["glr"] >= 1 - 1e-12)
        for k in ("rao", "wald", "gradient", "lh"):
            assert np.all(out[k] >= -1e-10)

    @pytest.mark.parametrize("dims", DIMS_GRID)
    def test_gradient_imaginary_part(self, dims):
        rng = np.random.default_rng(sum(dims.as_tuple()))
        for _ in range(10_000 // len(DIMS_GRID) + 1):
            re, im = D.gradient_standard(random_data(rng, dims), dims, return_imag=True)
            assert abs(im) <= 1e-10 * max(abs(re), 1.0)


class TestWhitenedViews:
    @pytest.mark.parametrize("dims", DIMS_GRID)
    def test_pdelta_projector(self, dims, rng):
        v = D.whitened_views(random_data(rng, dims), dims)
        P = v.Pdelta
        assert np.linalg.norm(P - P.conj().T) <= 1e-12
        assert np.linalg.norm(P @ P - P) <= 1e-10
        assert abs(np.trace(P).real - dims.r) <= 1e-9

    def test_g1_identity(self, rng):
        dims = DIMS_GRID[0]
        Z = random_data(rng, dims)
        v = D.whitened_views(Z, dims)
        b = canonical_bases(dims)
        R0_inv = matlin.inv_hpd(v.R0_hat)
        lhs = R0_inv @ D._zd0(v, b) @ v.P_C
        rhs = v.Sc_isqrt @ (np.eye(dims.N) - v.P_A0) @ v.Sc_sqrt @ R0_inv @ Z @ v.P_C
        assert np.linalg.norm(lhs - rhs) <= 1e-9 * np.linalg.norm(lhs)


class TestMlEstimates:
    def test_noiseless_recovery(self, rng):
        dims = ProblemDims(6, 14, 2, 2, 2)
        scn = Scenario(dims, complex_normal(rng, (2, 2)), np.zeros((2, 2)),
                       complex_normal(rng, (2, 2)), np.eye(6))
        Z = synthesize(scn, "H1", rng)
        Z[:, :dims.M] = scn.mean("H1")[:, :dims.M] + 1e-12 * complex_normal(rng, (6, 2))
        est = D.ml_estimates(Z, dims)
        np.testing.assert_allclose(est.Bs_hat, np.vstack([scn.Bt1, scn.B]), atol=1e-4)

    @pytest.mark.parametrize("dims", DIMS_GRID)
    def test_ml_covariance_identity(self, dims, rng):
        Z = random_data(rng, dims)
        est = D.ml_estimates(Z, dims)
        b = canonical_bases(dims)
        Sc = split_data(Z, dims).Sc
        lhs = matlin.solve_hpd(est.R1_hat, b.A)
        rhs = dims.K * np.linalg.solve(Sc, b.A)
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(rhs)
        if dims.t:
            lhs = matlin.solve_hpd(est.R0_hat, b.Et)
            rhs = dims.K * np.linalg.solve(Sc, b.Et)
            assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(rhs)
        for R in (est.R0_hat, est.R1_hat):
            w = np.linalg.eigvalsh(dims.K * R - Sc)
            assert w[0] >= -1e-10 * np.linalg.norm(Sc)
