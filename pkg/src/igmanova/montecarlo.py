"""Monte Carlo threshold calibration, P_d curves and CFAR checks.

Trials run in fixed-size chunks. Chunk ``c`` of stream ``s`` draws from its
own generator seeded by ``SeedSequence(seed, spawn_key=(s, c))``, so results
do not depend on how many worker threads process the chunks. Statistics
are computed from the maximal invariant, which is vectorised over trials.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import matlin
from .detectors import DETECTORS, MIS_FORM, detectors_from_mis, evaluate_all
from .errors import TooManyDiscards
from .mis import mis_batch, schur_23
from .model import ProblemDims, clutter_covariance, complex_normal

CHUNK_SIZE = 1024
MAX_DISCARD_FRACTION = 1e-3

# stream tags
_STREAM_NUISANCE = 0
_STREAM_CALIBRATION = 1
_STREAM_PD = 2
_STREAM_CFAR = 16


@dataclass(frozen=True)
class McConfig:
    dims: ProblemDims
    pfa_target: float = 1e-2
    cal_trials: int = 100_000
    pd_trials: int = 5_000
    sinr_grid_db: tuple = ()
    seed: int = 0
    cnr_db: float = 30.0
    corr: float = 0.95
    sigma_n2: float = 1.0
    detectors: tuple = DETECTORS

    def __post_init__(self):
        if not 0.0 < self.pfa_target < 1.0:
            raise ValueError(f"pfa_target must lie in (0, 1), got {self.pfa_target}")
        if self.cal_trials < 1 or self.pd_trials < 1:
            raise ValueError("trial counts must be positive")
        unknown = set(self.detectors) - set(DETECTORS)
        if unknown:
            raise ValueError(f"unknown detectors: {sorted(unknown)}")
        object.__setattr__(self, "sinr_grid_db", tuple(float(x) for x in self.sinr_grid_db))
        object.__setattr__(self, "detectors", tuple(self.detectors))

    def covariance(self):
        return clutter_covariance(self.dims.N, self.sigma_n2, self.cnr_db, self.corr)


@dataclass(frozen=True)
class ThresholdTable:
    thresholds: dict
    trials: int
    discarded: int
    seed: int
    pfa_target: float


@dataclass(frozen=True)
class PdRow:
    detector: str
    rho_db: float
    pd: float
    trials: int

    @property
    def stderr(self):
        return math.sqrt(self.pd * (1.0 - self.pd) / self.trials)


@dataclass
class PdCurve:
    thresholds: ThresholdTable
    rows: list = field(default_factory=list)

    def pd(self, detector, rho_db):
        for row in self.rows:
            if row.detector == detector and row.rho_db == rho_db:
                return row
        raise KeyError((detector, rho_db))

    def monotonicity_violations(self):
        """Consecutive grid points where P_d drops by more than 3 sigma."""
        out = []
        for a, b in zip(self.rows, self.rows[1:]):
            if a.detector != b.detector:
                continue
            sigma = math.hypot(a.stderr, b.stderr)
            if b.pd < a.pd - 3.0 * sigma:
                out.append((a, b))
        return out


def nuisance_interference(cfg: McConfig, draw: int = 0) -> np.ndarray:
    """Deterministic ``t x M`` interference matrix number ``draw`` for ``cfg.seed``."""
    rng = np.random.default_rng(
        np.random.SeedSequence(cfg.seed, spawn_key=(_STREAM_NUISANCE, draw)))
    return 10.0 * complex_normal(rng, (cfg.dims.t, cfg.dims.M))


def calibration_interference(cfg: McConfig) -> np.ndarray:
    """Nonzero interference used during calibration (draw 0)."""
    return nuisance_interference(cfg, 0)


def _chunk_rng(seed, stream, chunk):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, chunk)))


@dataclass(frozen=True)
class _Setup:
    dims: ProblemDims
    R_sqrt: np.ndarray
    R23: np.ndarray
    Bt: np.ndarray


def _setup(dims, R, Bt):
    R = matlin.check_hpd(R, "R")
    Bt = np.zeros((dims.t, dims.M), complex) if Bt is None else np.asarray(Bt, complex)
    return _Setup(dims, matlin.hpd_sqrt(R, name="R"), schur_23(R, dims), Bt)


def _draw_chunk(setup, seed, stream, chunk, n, rho):
    """Data matrices of one chunk, shape ``(n, N, K)``."""
    d = setup.dims
    rng = _chunk_rng(seed, stream, chunk)
    Z = setup.R_sqrt @ complex_normal(rng, (n, d.N, d.K))
    Z[:, :d.t, :d.M] += setup.Bt
    if rho is not None:
        Bg = complex_normal(rng, (n, d.r, d.M))
        if rho > 0:
            power = np.real(np.trace(matlin.ct(Bg) @ np.linalg.solve(setup.R23, Bg),
                                     axis1=-2, axis2=-1))
            Z[:, d.t:d.J, :d.M] += np.sqrt(rho / power)[:, None, None] * Bg
    return Z


def _simulate_chunk(setup, seed, stream, chunk, n, rho):
    d = setup.dims
    Z = _draw_chunk(setup, seed, stream, chunk, n, rho)
    Ta, Tb, valid = mis_batch(Z, d)
    stats = detectors_from_mis(Ta, Tb, d.K)
    return stats, valid


def simulate_statistics(setup, seed, stream, n_trials, rho=None, workers=1):
    """Distinct MIS-form statistics for ``n_trials`` trials.

    ``rho=None`` simulates H0 without drawing a signal; otherwise each trial
    draws a fresh ``Bg`` scaled to linear SINR ``rho`` (``rho = 0`` leaves
    ``B = 0`` but consumes the same random numbers).

    Returns
    -------
    stats : dict of ndarray
        Keyed by distinct detector id; discarded trials are removed.
    discarded : int
    """
    sizes = [min(CHUNK_SIZE, n_trials - s) for s in range(0, n_trials, CHUNK_SIZE)]

    def work(c):
        return _simulate_chunk(setup, seed, stream, c, sizes[c], rho)

    if workers == 1 or len(sizes) == 1:
        results = [work(c) for c in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers or None) as ex:
            results = list(ex.map(work, range(len(sizes))))
    valid = np.concatenate([v for _, v in results])
    stats = {k: np.concatenate([s[k] for s, _ in results])[valid] for k in results[0][0]}
    return stats, int((~valid).sum())


def _check_discards(discarded, total):
    if discarded > MAX_DISCARD_FRACTION * total:
        raise TooManyDiscards(f"{discarded} of {total} trials were numerically degenerate")


def threshold_from_samples(x, pfa):
    """Ascending order statistic of rank ``ceil(n (1 - pfa))`` (1-based)."""
    x = np.sort(np.asarray(x), kind="stable")
    k = max(1, math.ceil(len(x) * (1.0 - pfa)))
    return float(x[k - 1])


def calibrate(cfg: McConfig, R=None, Bt=None, *, stream=_STREAM_CALIBRATION,
              workers=1) -> ThresholdTable:
    """Thresholds giving ``cfg.pfa_target`` under H0.

    ``R`` defaults to the clutter model of ``cfg`` and ``Bt`` to
    :func:`calibration_interference`.
    """
    if cfg.cal_trials < 100.0 / cfg.pfa_target:
        warnings.warn(f"cal_trials={cfg.cal_trials} is below 100/pfa="
                      f"{100.0 / cfg.pfa_target:g}", stacklevel=2)
    R = cfg.covariance() if R is None else R
    Bt = calibration_interference(cfg) if Bt is None else Bt
    stats, discarded = simulate_statistics(_setup(cfg.dims, R, Bt), cfg.seed, stream,
                                           cfg.cal_trials, None, workers)
    _check_discards(discarded, cfg.cal_trials)
    distinct = {k: threshold_from_samples(v, cfg.pfa_target) for k, v in stats.items()}
    return ThresholdTable(
        thresholds={d: distinct[MIS_FORM[d]] for d in cfg.detectors},
        trials=cfg.cal_trials - discarded,
        discarded=discarded,
        seed=cfg.seed,
        pfa_target=cfg.pfa_target,
    )


def db_to_linear(rho_db):
    return 0.0 if rho_db == -math.inf else 10.0 ** (rho_db / 10.0)


def estimate_pd(cfg: McConfig, thresholds: ThresholdTable, rho_db: float, R=None,
                Bt=None, *, workers=1) -> list:
    """P_d of every selected detector at SINR ``rho_db`` (``-inf`` for B = 0).

    All detectors see the same ``cfg.pd_trials`` datasets.
    """
    R = cfg.covariance() if R is None else R
    Bt = calibration_interference(cfg) if Bt is None else Bt
    stats, discarded = simulate_statistics(_setup(cfg.dims, R, Bt), cfg.seed, _STREAM_PD,
                                           cfg.pd_trials, db_to_linear(rho_db), workers)
    _check_discards(discarded, cfg.pd_trials)
    n = cfg.pd_trials - discarded
    return [PdRow(d, float(rho_db),
                  float(np.mean(stats[MIS_FORM[d]] > thresholds.thresholds[d])), n)
            for d in cfg.detectors]


def pd_vs_sinr(cfg: McConfig, *, workers=1) -> PdCurve:
    """Calibrate once, then sweep ``cfg.sinr_grid_db``.

    Rows are ordered by detector (config order), then SINR ascending.
    """
    table = calibrate(cfg, workers=workers)
    rows = []
    for rho_db in sorted(cfg.sinr_grid_db):
        rows.extend(estimate_pd(cfg, table, rho_db, workers=workers))
    order = {d: i for i, d in enumerate(cfg.detectors)}
    rows.sort(key=lambda r: (order[r.detector], r.rho_db))
    return PdCurve(table, rows)


@dataclass(frozen=True)
class CfarRow:
    variant: int
    detector: str
    pfa: float
    trials: int
    threshold: float
    pfa_target: float

    @property
    def stderr(self):
        return math.sqrt(self.pfa_target * (1.0 - self.pfa_target) / self.trials)

    @property
    def passed(self):
        return abs(self.pfa - self.pfa_target) <= 3.0 * self.stderr


@dataclass
class CfarReport:
    thresholds: ThresholdTable
    rows: list
    invariance_gap: float
    invariance_tol: float = 1e-9

    @property
    def passed(self):
        return all(r.passed for r in self.rows) and self.invariance_gap <= self.invariance_tol


def invariance_gap(cfg: McConfig, R, Bts, n_trials=256, n_standard=16) -> float:
    """Largest relative change of any statistic when only ``Bt`` varies.

    The same noise realisations are reused for every ``Bt`` in ``Bts``. All
    MIS-form statistics are compared on ``n_trials`` trials, and the
    standard forms (which do read the interference rows) on the first
    ``n_standard`` of them.
    """
    ref = ref_std = None
    worst = 0.0
    for Bt in Bts:
        Z = _draw_chunk(_setup(cfg.dims, R, Bt), cfg.seed, _STREAM_CFAR - 1, 0, n_trials, None)
        Ta, Tb, _ = mis_batch(Z, cfg.dims)
        stats = detectors_from_mis(Ta, Tb, cfg.dims.K)
        std = np.array([[rep.value_standard for rep in evaluate_all(z, cfg.dims).values()]
                        for z in Z[:n_standard]])
        if ref is None:
            ref, ref_std = stats, std
            continue
        for k in ref:
            gap = np.abs(stats[k] - ref[k]) / np.maximum(1.0, np.abs(ref[k]))
            worst = max(worst, float(gap.max()))
        gap = np.abs(std - ref_std) / np.maximum(1.0, np.abs(ref_std))
        worst = max(worst, float(gap.max()))
    return worst


def cfar_check(cfg: McConfig, variants, *, workers=1) -> CfarReport:
    """Empirical and deterministic CFAR verification.

    Parameters
    ----------
    variants : list of (R, Bt)
        Nuisance settings. Thresholds come from ``variants[0]``; the false
        alarm rate is re-estimated under every variant (including the first)
        on ``cfg.cal_trials`` fresh trials each.
    """
    if len(variants) < 2:
        raise ValueError("cfar_check needs at least two nuisance variants")
    R0, Bt0 = variants[0]
    table = calibrate(cfg, R0, Bt0, workers=workers)
    rows = []
    for i, (R, Bt) in enumerate(variants):
        stats, discarded = simulate_statistics(_setup(cfg.dims, R, Bt), cfg.seed,
                                               _STREAM_CFAR + i, cfg.cal_trials, None, workers)
        _check_discards(discarded, cfg.cal_trials)
        n = cfg.cal_trials - discarded
        for d in cfg.detectors:
            thr = table.thresholds[d]
            rows.append(CfarRow(i, d, float(np.mean(stats[MIS_FORM[d]] > thr)), n, thr,
                                cfg.pfa_target))
    gap = invariance_gap(cfg, R0, [Bt for _, Bt in variants])
    return CfarReport(table, rows, gap)
