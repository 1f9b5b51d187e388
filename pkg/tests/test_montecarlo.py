import math
import warnings

import numpy as np
import pytest

from igmanova import montecarlo as mc
from igmanova.detectors import DETECTORS
from igmanova.errors import TooManyDiscards
from igmanova.model import ProblemDims

DIMS = ProblemDims(8, 19, 3, 2, 4)


def cfg(**kw):
    base = dict(dims=DIMS, pfa_target=0.1, cal_trials=4000, pd_trials=1000, seed=7)
    base.update(kw)
    return mc.McConfig(**base)


class TestConfig:
    def test_bad_pfa(self):
        with pytest.raises(ValueError):
            cfg(pfa_target=0.0)

    def test_unknown_detector(self):
        with pytest.raises(ValueError):
            cfg(detectors=("glr", "nope"))

    def test_low_trial_warning(self):
        with pytest.warns(UserWarning, match="below 100/pfa"):
            mc.calibrate(cfg(cal_trials=500))

    def test_no_warning_at_protocol_count(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            mc.calibrate(cfg(cal_trials=1000))


class TestThreshold:
    def test_order_statistic_index(self):
        x = np.arange(1.0, 11.0)[::-1]  # 10..1
        # ceil(10 * 0.75) = 8 -> 8th smallest
        assert mc.threshold_from_samples(x, 0.25) == 8.0
        assert mc.threshold_from_samples(x, 0.999) == 1.0

    def test_median(self):
        c = cfg(pfa_target=0.5, cal_trials=10_000)
        table = mc.calibrate(c)
        stats, _ = mc.simulate_statistics(mc._setup(DIMS, c.covariance(), mc.calibration_interference(c)),
                                          c.seed, 1, c.cal_trials)
        x = np.sort(stats["glr"])
        pos = np.searchsorted(x, table.thresholds["glr"])
        assert abs(pos - (len(x) / 2 - 1)) <= 2
        assert table.thresholds["glr"] == pytest.approx(np.median(x), rel=1e-3)

    def test_deterministic(self):
        assert mc.calibrate(cfg()) == mc.calibrate(cfg())

    def test_worker_count_irrelevant(self):
        assert mc.calibrate(cfg(), workers=1) == mc.calibrate(cfg(), workers=3)

    def test_seed_matters(self):
        assert mc.calibrate(cfg()).thresholds != mc.calibrate(cfg(seed=8)).thresholds

    def test_aliases_share_thresholds(self):
        t = mc.calibrate(cfg()).thresholds
        assert t["durbin"] == t["rao"] and t["2s-glr"] == t["wald"]
        assert all(math.isfinite(v) for v in t.values())

    def test_fresh_trial_consistency(self):
        c = cfg(pfa_target=0.1, cal_trials=20_000)
        table = mc.calibrate(c)
        stats, _ = mc.simulate_statistics(mc._setup(DIMS, c.covariance(), None), c.seed, 99, 20_000)
        # the threshold carries its own calibration noise, so both samples count
        sigma = math.sqrt(2 * 0.1 * 0.9 / 20_000)
        for d in DETECTORS:
            pfa = np.mean(stats[mc.MIS_FORM[d]] > table.thresholds[d])
            assert abs(pfa - 0.1) <= 3 * sigma, d

    def test_too_many_discards(self, monkeypatch):
        real = mc.mis_batch

        def broken(Z, dims):
            Ta, Tb, valid = real(Z, dims)
            valid = valid.copy()
            valid[:5] = False
            return Ta, Tb, valid

        monkeypatch.setattr(mc, "mis_batch", broken)
        with pytest.raises(TooManyDiscards):
            mc.calibrate(cfg(cal_trials=1000))

    def test_discards_counted(self, monkeypatch):
        real = mc.mis_batch

        def one_bad(Z, dims):
            Ta, Tb, valid = real(Z, dims)
            valid = valid.copy()
            valid[0] = False
            return Ta, Tb, valid

        monkeypatch.setattr(mc, "mis_batch", one_bad)
        table = mc.calibrate(cfg(cal_trials=2000))
        assert table.discarded == 2 and table.trials == 1998


class TestPd:
    def test_null_signal(self):
        c = cfg(pfa_target=0.1, pd_trials=4000)
        table = mc.calibrate(c)
        sigma = math.sqrt(0.1 * 0.9 / 4000)
        for row in mc.estimate_pd(c, table, -math.inf):
            assert abs(row.pd - 0.1) <= 3 * sigma, row

    def test_saturation(self):
        c = cfg(pfa_target=0.01, cal_trials=10_000, pd_trials=500)
        rows = mc.estimate_pd(c, mc.calibrate(c), 60.0)
        assert all(r.pd >= 0.99 for r in rows)

    def test_deterministic(self):
        c = cfg()
        t = mc.calibrate(c)
        assert mc.estimate_pd(c, t, 10.0) == mc.estimate_pd(c, t, 10.0, workers=2)

    def test_stderr(self):
        row = mc.PdRow("glr", 0.0, 0.25, 300)
        assert row.stderr == pytest.approx(math.sqrt(0.25 * 0.75 / 300))


class TestCurve:
    def test_single_point(self):
        curve = mc.pd_vs_sinr(cfg(sinr_grid_db=(10.0,)))
        assert [r.detector for r in curve.rows] == list(DETECTORS)

    def test_order_and_aliases(self):
        curve = mc.pd_vs_sinr(cfg(sinr_grid_db=(14.0, 6.0, 10.0)))
        assert len(curve.rows) == 21
        for i, d in enumerate(DETECTORS):
            block = curve.rows[3 * i:3 * i + 3]
            assert [r.detector for r in block] == [d] * 3
            assert [r.rho_db for r in block] == [6.0, 10.0, 14.0]
        for rho in (6.0, 10.0, 14.0):
            assert curve.pd("wald", rho).pd == curve.pd("2s-glr", rho).pd
            assert curve.pd("rao", rho).pd == curve.pd("durbin", rho).pd
            assert 0 <= curve.pd("glr", rho).pd <= 1
        assert curve.monotonicity_violations() == []

    def test_missing_point(self):
        with pytest.raises(KeyError):
            mc.pd_vs_sinr(cfg(sinr_grid_db=(10.0,))).pd("glr", 3.0)

    def test_monotonicity_report(self):
        table = mc.ThresholdTable({}, 1, 0, 0, 0.1)
        curve = mc.PdCurve(table, [mc.PdRow("glr", 0.0, 0.9, 1000), mc.PdRow("glr", 3.0, 0.5, 1000)])
        assert len(curve.monotonicity_violations()) == 1


class TestCfar:
    def test_identical_variants(self):
        c = cfg(pfa_target=0.1, cal_trials=10_000)
        v = (c.covariance(), mc.calibration_interference(c))
        rep = mc.cfar_check(c, [v, v])
        assert rep.passed
        assert rep.invariance_gap == 0.0

    def test_interference_scaling_deterministic(self):
        c = cfg()
        R = c.covariance()
        B = mc.calibration_interference(c)
        assert mc.invariance_gap(c, R, [B, 0 * B, 100 * B]) <= 1e-9

    def test_covariance_scaling(self):
        c = cfg(pfa_target=0.1, cal_trials=10_000)
        R = c.covariance()
        rep = mc.cfar_check(c, [(R, mc.nuisance_interference(c, 0)),
                                (10 * R, mc.nuisance_interference(c, 1))])
        assert all(r.passed for r in rep.rows)
        assert rep.passed

    def test_needs_two_variants(self):
        c = cfg()
        with pytest.raises(ValueError):
            mc.cfar_check(c, [(c.covariance(), None)])
