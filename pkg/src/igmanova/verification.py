"""Numerical property suite behind ``igmanova verify``.

Every property compares two independently computed quantities on random
instances and records the largest relative gap. Matrix gaps are
``||L - R||_F / max(||L||_F, ||R||_F, scale)`` where ``scale`` is the
natural magnitude of the quantities involved (so that identities whose
sides are structurally zero do not divide roundoff by roundoff).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from . import matlin, special
from .detectors import (DISTINCT, _gamma22, _mis_values, _STANDARD, _zd0, canonical_bases,
                        durbin_standard, gradient_fisher_form, ml_estimates, rao_fisher_form,
                        two_step_glr_standard, wald_fisher_form, whitened_views)
from .matlin import ct
from .mis import mis_from_data, partition_blocks, split_data
from .model import ProblemDims, clutter_covariance, complex_normal

DEFAULT_DIMS = (
    ProblemDims(8, 19, 3, 2, 4),
    ProblemDims(8, 12, 3, 4, 2),
    ProblemDims(8, 24, 8, 8, 0),
    ProblemDims(8, 24, 8, 1, 0),
    ProblemDims(8, 13, 1, 2, 4),
    ProblemDims(6, 14, 2, 2, 0),
    ProblemDims(8, 13, 1, 1, 0),
    ProblemDims(8, 13, 1, 2, 0),
)

PERTURBATION = 1e-3

TOL_DUAL = 1e-8
TOL_WALD_2SGLR = 1e-10
TOL_DURBIN_RAO = 1e-8
TOL_ML_COV = 1e-10
TOL_IDENTITY = 1e-9
TOL_SPECIAL = 1e-9
TOL_GRAD_KETA = 1e-8
TOL_SAME_EXPR = 1e-12


@dataclass
class PropertyResult:
    name: str
    suite: str
    tol: float
    max_gap: float = 0.0
    instances: int = 0

    @property
    def passed(self):
        return bool(np.isfinite(self.max_gap)) and self.max_gap <= self.tol


@dataclass
class VerificationReport:
    results: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(r.passed for r in self.results.values())

    def format(self):
        lines = [f"{'property':<28} {'suite':<12} {'instances':>9} {'max_gap':>11} {'tol':>9}  status"]
        for r in self.results.values():
            lines.append(f"{r.name:<28} {r.suite:<12} {r.instances:>9d} {r.max_gap:>11.3e} "
                         f"{r.tol:>9.1e}  {'PASS' if r.passed else 'FAIL'}")
        n_fail = sum(not r.passed for r in self.results.values())
        lines.append("ALL PASS" if n_fail == 0 else f"{n_fail} FAILED")
        return "\n".join(lines)


def scalar_gap(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


def matrix_gap(L, R, scale=0.0):
    L = np.asarray(L)
    R = np.asarray(R)
    den = max(np.linalg.norm(L), np.linalg.norm(R), scale)
    return 0.0 if den == 0.0 else float(np.linalg.norm(L - R) / den)


def random_instance(dims: ProblemDims, rng: np.random.Generator) -> np.ndarray:
    """Random data matrix with random clutter covariance and random mean.

    The mean is zero, interference only or interference plus signal with
    equal probability, so both hypotheses are exercised.
    """
    R = clutter_covariance(dims.N, sigma_n2=rng.uniform(0.5, 2.0),
                           cnr_db=rng.uniform(0.0, 30.0), corr=rng.uniform(0.0, 0.95))
    Z = matlin.hpd_sqrt(R) @ complex_normal(rng, (dims.N, dims.K))
    kind = rng.integers(3)
    scale = np.sqrt(np.real(np.trace(R)) / dims.N)
    if kind >= 1:
        Z[:dims.t, :dims.M] += 3.0 * scale * complex_normal(rng, (dims.t, dims.M))
    if kind == 2:
        Z[dims.t:dims.J, :dims.M] += 2.0 * scale * complex_normal(rng, (dims.r, dims.M))
    return Z


def parse_dims_filter(text):
    """``"M=1,t=0"`` -> ``{"M": 1, "t": 0}``. Empty or ``None`` -> ``{}``."""
    if not text:
        return {}
    out = {}
    for part in text.split(","):
        m = re.fullmatch(r"\s*([NKMrtJ])\s*=\s*(\d+)\s*", part)
        if not m:
            raise ValueError(f"bad dims filter term {part!r}; expected e.g. M=1")
        out[m.group(1)] = int(m.group(2))
    return out


def select_dims(dims_filter=None, dims_list=DEFAULT_DIMS):
    flt = parse_dims_filter(dims_filter) if isinstance(dims_filter, str) else (dims_filter or {})
    return [d for d in dims_list if all(getattr(d, k) == v for k, v in flt.items())]


class _Recorder:
    def __init__(self, perturb):
        self.report = VerificationReport()
        self.perturb = perturb

    def factor(self, name):
        return 1.0 + PERTURBATION if self.perturb == name else 1.0

    def scalar(self, name, suite, tol, a, b):
        self._add(name, suite, tol, scalar_gap(a, b * self.factor(name)))

    def matrix(self, name, suite, tol, L, R, scale=0.0):
        self._add(name, suite, tol, matrix_gap(L, np.asarray(R) * self.factor(name), scale))

    def _add(self, name, suite, tol, gap):
        r = self.report.results.setdefault(name, PropertyResult(name, suite, tol))
        r.instances += 1
        r.max_gap = max(r.max_gap, gap) if np.isfinite(gap) else np.inf


def _general_checks(rec, Z, dims):
    v = whitened_views(Z, dims)
    mis_vals = _mis_values(Z, dims)
    std = {k: _STANDARD[k](Z, dims, v) for k in DISTINCT}
    for k in DISTINCT:
        rec.scalar(f"dual:{k}", "dual", TOL_DUAL, std[k], mis_vals[k])
    rec.scalar("wald=2s-glr", "equivalence", TOL_WALD_2SGLR,
               two_step_glr_standard(Z, dims), std["wald"])
    rec.scalar("durbin=rao", "equivalence", TOL_DURBIN_RAO, durbin_standard(Z, dims, v), std["rao"])
    rec.scalar("rao:fisher-form", "equivalence", TOL_DUAL, rao_fisher_form(Z, dims, v), std["rao"])
    rec.scalar("wald:fisher-form", "equivalence", TOL_DUAL, wald_fisher_form(Z, dims, v), std["wald"])
    rec.scalar("gradient:fisher-form", "equivalence", TOL_DUAL,
               gradient_fisher_form(Z, dims, v), std["gradient"])

    b = canonical_bases(dims)
    K, M, N = dims.K, dims.M, dims.N
    est = ml_estimates(Z, dims)
    Sc_inv = matlin.inv_hpd(v.Sc)
    rec.matrix("ml-cov:R1", "ml-cov", TOL_ML_COV,
               matlin.solve_hpd(est.R1_hat, b.A), K * Sc_inv @ b.A)
    if dims.t > 0:
        rec.matrix("ml-cov:R0", "ml-cov", TOL_ML_COV,
                   matlin.solve_hpd(est.R0_hat, b.Et), K * Sc_inv @ b.Et)

    bs = partition_blocks(split_data(Z, dims), dims)
    mp = mis_from_data(Z, dims)
    S = mp.S
    I_N = np.eye(N)
    I_M = np.eye(M)
    X1, X0 = v.Zw1c, v.Zw0c
    s1 = np.linalg.norm(X1) ** 2
    s0 = np.linalg.norm(X0) ** 2
    rec.matrix("mis:S-from-A0", "identity", TOL_IDENTITY, ct(X1) @ (I_N - v.P_A0) @ X1, S, s1)
    rec.matrix("mis:Tb-from-A1", "identity", TOL_IDENTITY, ct(X1) @ (I_N - v.P_A1) @ X1, mp.Tb, s1)

    def kform(Y, Sblk):
        if Y.shape[0] == 0:
            return np.zeros((M, M), complex)
        Q = ct(Y) @ np.linalg.solve(Sblk, Y)
        return K * (Q - Q @ np.linalg.solve(I_M + Q, Q))

    rec.matrix("mis:S-from-Abar0", "identity", TOL_IDENTITY, ct(X0) @ (I_N - v.P_Abar0) @ X0,
               kform(bs.Z23, bs.S2), s0)
    rec.matrix("mis:Tb-from-Abar1", "identity", TOL_IDENTITY, ct(X0) @ (I_N - v.P_Abar1) @ X0,
               kform(bs.Z3, bs.S[2][2]), s0)
    T = v.Sc_sqrt @ v.R0_isqrt
    s10 = np.linalg.norm(X1) * np.linalg.norm(T @ X0)
    G = I_M - np.linalg.solve(I_M + S, S)
    rec.matrix("mis:cross-A0", "identity", TOL_IDENTITY, ct(X1) @ (I_N - v.P_A0) @ T @ X0, K * S @ G, s10)
    rec.matrix("mis:cross-A1", "identity", TOL_IDENTITY, ct(X1) @ (I_N - v.P_A1) @ T @ X0,
               K * mp.Tb @ G, s10)

    P0p = I_N - v.P_A0
    R1_inv = matlin.inv_hpd(est.R1_hat)
    W1 = K * P0p @ v.Sc_isqrt @ b.Er @ _gamma22(R1_inv, b, dims.t) @ ct(b.Er) @ v.Sc_isqrt @ P0p
    rec.matrix("wald:gamma22-projector", "identity", TOL_IDENTITY, W1, v.Pdelta, 1.0)

    R0_inv = matlin.inv_hpd(v.R0_hat)
    Zd0 = _zd0(v, b)
    rec.matrix("gradient:residual", "identity", TOL_IDENTITY, R0_inv @ Zd0 @ v.P_C,
               v.Sc_isqrt @ P0p @ v.Sc_sqrt @ R0_inv @ Z @ v.P_C)
    Pb0p = I_N - v.P_Abar0
    rec.matrix("rao:residual", "identity", TOL_IDENTITY, v.R0_isqrt @ Zd0 @ v.P_C, Pb0p @ v.Zw0 @ v.P_C)
    R2 = Pb0p @ v.R0_isqrt @ b.Er @ _gamma22(R0_inv, b, dims.t) @ ct(b.Er) @ v.R0_isqrt @ Pb0p
    rec.matrix("rao:gamma22-projector", "identity", TOL_IDENTITY, R2, v.Pbar_delta, 1.0)
    return mis_vals


def _special_checks(rec, Z, dims, mis_vals):
    N, M, r, t = dims.N, dims.M, dims.r, dims.t
    if M == 1:
        A = np.eye(N, dtype=complex)[:, :dims.J]
        s = special.point_like_equivalences(special.PointLikeData.from_matrix(Z), A, t)
        for k in DISTINCT:
            rec.scalar(f"point-like:{k}", "special", TOL_SPECIAL, s[k], mis_vals[k])
        rec.scalar("point-like:grad=K*eta", "special", TOL_GRAD_KETA, s["gradient"],
                   dims.K * s["eta"])
        rec.scalar("point-like:lh=glr-1", "special", TOL_SPECIAL, s["lh"], s["glr"] - 1.0)
        rec.scalar("point-like:lh=glr*eta", "special", TOL_SPECIAL, s["lh"], s["glr"] * s["eta"])
        if t == 0 and r == 1:
            rec.scalar("point-like:amf=wald", "special", TOL_SPECIAL,
                       special.amf(special.PointLikeData.from_matrix(Z), A[:, 0]), mis_vals["wald"])
        return
    if t != 0:
        return
    d = special.SpreadData.from_matrix(Z, M)
    if r == N:
        s = special.multidim_detectors(d)
        for k in DISTINCT:
            rec.scalar(f"multidim:{k}", "special", TOL_SPECIAL, s[k], mis_vals[k])
        rec.scalar("multidim:rao=grad", "special", TOL_SAME_EXPR, s["rao"], s["gradient"])
        rec.scalar("multidim:wald=lh", "special", TOL_SAME_EXPR, s["wald"], s["lh"])
    elif r == 1:
        s = special.range_spread_detectors(d, np.eye(N)[:, 0])
        for k in DISTINCT:
            rec.scalar(f"range-spread:{k}", "special", TOL_SPECIAL, s[k], mis_vals[k])
        rec.scalar("range-spread:lh=glr-1", "special", TOL_SPECIAL, s["lh"], s["glr"] - 1.0)
        rec.scalar("range-spread:grad=K*eta", "special", TOL_GRAD_KETA, s["gradient"],
                   dims.K * s["eta"])
    else:
        s = special.gmanova_detectors(Z, dims)
        for k in DISTINCT:
            rec.scalar(f"gmanova:{k}", "special", TOL_SPECIAL, s[k], mis_vals[k])


def run_verification(dims_filter=None, *, instances=40, seed=0, perturb=None,
                     dims_list=DEFAULT_DIMS) -> VerificationReport:
    """Run every property on ``instances`` random instances per selected dims.

    Parameters
    ----------
    dims_filter : str or dict, optional
        Restrict to dims matching e.g. ``"M=1"``.
    perturb : str, optional
        Property name whose reference side is scaled by ``1 + 1e-3``; used
        to check that the suite detects a wrong formula.
    """
    selected = select_dims(dims_filter, dims_list)
    if not selected:
        raise ValueError(f"dims filter {dims_filter!r} matches no test dimensions")
    rec = _Recorder(perturb)
    for i, dims in enumerate(selected):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        for _ in range(instances):
            Z = random_instance(dims, rng)
            mis_vals = _general_checks(rec, Z, dims)
            _special_checks(rec, Z, dims, mis_vals)
    if perturb is not None and perturb not in rec.report.results:
        raise ValueError(f"unknown property to perturb: {perturb!r}")
    return rec.report
