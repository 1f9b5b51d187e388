"""Adaptive detectors for the canonical I-GMANOVA problem.

Each detector is available in two algebraically independent forms:

* the *standard* form, evaluated on the whitened data matrix, and
* the *MIS* form, a function of the maximal invariant ``(Ta, Tb)`` only.

Their agreement is the numerical witness that each detector is CFAR.

Detector ids: ``glr``, ``rao``, ``wald``, ``gradient``, ``durbin``,
``2s-glr``, ``lh``. Durbin shares Rao's MIS form and 2S-GLR shares Wald's.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matlin
from .errors import SingularBlock
from .matlin import ct, hermitian_part
from .mis import mis_from_data, split_data
from .model import canonical_bases

DETECTORS = ("glr", "rao", "wald", "gradient", "durbin", "2s-glr", "lh")
DISTINCT = ("glr", "rao", "wald", "gradient", "lh")
# detector id -> id of the MIS-form expression it shares
MIS_FORM = {d: d for d in DISTINCT} | {"durbin": "rao", "2s-glr": "wald"}


@dataclass(frozen=True)
class MlEstimates:
    Bs_hat: np.ndarray
    Bt0_hat: np.ndarray
    R1_hat: np.ndarray
    R0_hat: np.ndarray


@dataclass(frozen=True)
class DetectorReport:
    detector: str
    value_standard: float
    value_mis: float

    @property
    def dual_form_gap(self) -> float:
        return abs(self.value_standard - self.value_mis) / max(1.0, abs(self.value_standard))


@dataclass(frozen=True)
class WhitenedViews:
    """Quantities shared by the standard-form detectors.

    ``A0 = Sc^{-1/2} Et``, ``A1 = Sc^{-1/2} A``, ``Zw1 = Sc^{-1/2} Z``;
    the barred versions use ``R0_hat^{-1/2}`` instead of ``Sc^{-1/2}``.
    """

    dims: object
    Z: np.ndarray
    Sc: np.ndarray
    Sc_isqrt: np.ndarray
    Sc_sqrt: np.ndarray
    A0: np.ndarray
    A1: np.ndarray
    Zw1: np.ndarray
    P_A0: np.ndarray
    P_A1: np.ndarray
    R0_hat: np.ndarray
    R0_isqrt: np.ndarray
    Zw0: np.ndarray
    Abar0: np.ndarray
    Abar1: np.ndarray
    P_Abar0: np.ndarray
    P_Abar1: np.ndarray
    P_C: np.ndarray

    @property
    def Pdelta(self):
        return self.P_A1 - self.P_A0

    @property
    def Pbar_delta(self):
        return self.P_Abar1 - self.P_Abar0

    @property
    def Zw1c(self):
        """``Zw1 Vc1``: whitened cells under test."""
        return self.Zw1[:, :self.dims.M]

    @property
    def Zw0c(self):
        return self.Zw0[:, :self.dims.M]

    def D(self, i):
        """``D_i = I + (Zw1 Vc1)^H P_{A_i}^perp (Zw1 Vc1)``."""
        P = self.P_A0 if i == 0 else self.P_A1
        X = self.Zw1c
        I_N = np.eye(self.dims.N)
        return hermitian_part(np.eye(self.dims.M) + ct(X) @ (I_N - P) @ X)


def _covariance_estimate(Sc, Sc_sqrt, P, Zw1, Z, P_C, K):
    """``K^{-1}[Sc + (Z - Sc^{1/2} P Zw1) P_C (Z - Sc^{1/2} P Zw1)^H]``."""
    X = Z - Sc_sqrt @ P @ Zw1
    return hermitian_part((Sc + X @ P_C @ ct(X)) / K)


def whitened_views(Z, dims) -> WhitenedViews:
    Z = np.asarray(Z, dtype=complex)
    b = canonical_bases(dims)
    Sc = split_data(Z, dims).Sc
    Sc_isqrt = matlin.hpd_inv_sqrt(Sc, SingularBlock, "Sc")
    Sc_sqrt = matlin.hpd_sqrt(Sc, SingularBlock, "Sc")
    A0 = Sc_isqrt @ b.Et
    A1 = Sc_isqrt @ b.A
    Zw1 = Sc_isqrt @ Z
    P_A0 = matlin.projector(A0)
    P_A1 = matlin.projector(A1)
    P_C = b.Vc1 @ ct(b.Vc1)
    R0 = _covariance_estimate(Sc, Sc_sqrt, P_A0, Zw1, Z, P_C, dims.K)
    R0_isqrt = matlin.hpd_inv_sqrt(R0, SingularBlock, "R0_hat")
    Abar0 = R0_isqrt @ b.Et
    Abar1 = R0_isqrt @ b.A
    return WhitenedViews(
        dims=dims, Z=Z, Sc=Sc, Sc_isqrt=Sc_isqrt, Sc_sqrt=Sc_sqrt,
        A0=A0, A1=A1, Zw1=Zw1, P_A0=P_A0, P_A1=P_A1,
        R0_hat=R0, R0_isqrt=R0_isqrt, Zw0=R0_isqrt @ Z,
        Abar0=Abar0, Abar1=Abar1,
        P_Abar0=matlin.projector(Abar0), P_Abar1=matlin.projector(Abar1),
        P_C=P_C,
    )


def _views(Z, dims, views):
    return whitened_views(Z, dims) if views is None else views


def _gls(E, Sc, Z, C):
    """``(E^H Sc^{-1} E)^{-1} E^H Sc^{-1} Z C^H (C C^H)^{-1}``."""
    if E.shape[1] == 0:
        return np.zeros((0, C.shape[0]), dtype=complex)
    ScE = matlin.solve_hpd(Sc, E, SingularBlock, "Sc")
    G = hermitian_part(ct(E) @ ScE)
    rhs = ct(ScE) @ Z @ ct(C) @ np.linalg.inv(C @ ct(C))
    return matlin.solve_hpd(G, rhs, SingularBlock, "E^H Sc^-1 E")


def ml_estimates(Z, dims) -> MlEstimates:
    """Closed-form ML estimates of the mean and covariance under H0/H1.

    The covariance estimates use the whitened projector forms; the mean
    estimates use generalised least squares on ``Sc``.
    """
    v = whitened_views(Z, dims)
    b = canonical_bases(dims)
    R1 = _covariance_estimate(v.Sc, v.Sc_sqrt, v.P_A1, v.Zw1, v.Z, v.P_C, dims.K)
    matlin.check_hpd(R1, "R1_hat", SingularBlock)
    return MlEstimates(
        Bs_hat=_gls(b.A, v.Sc, v.Z, b.C),
        Bt0_hat=_gls(b.Et, v.Sc, v.Z, b.C),
        R1_hat=R1,
        R0_hat=v.R0_hat,
    )


# --- MIS-form expressions -------------------------------------------------

def _eye_like(T):
    return np.broadcast_to(np.eye(T.shape[-1]), T.shape)


def _tr(X):
    return np.real(np.trace(X, axis1=-2, axis2=-1))


def detectors_from_mis(Ta, Tb, K):
    """Evaluate the five distinct MIS-form statistics.

    ``Ta``, ``Tb`` may be single ``M x M`` matrices or stacks of shape
    ``(..., M, M)``; results follow the leading shape.

    Returns
    -------
    dict
        Keys ``glr``, ``rao``, ``wald``, ``gradient``, ``lh``.
    """
    Ta = np.asarray(Ta, dtype=complex)
    Tb = np.asarray(Tb, dtype=complex)
    I = _eye_like(Ta)
    S = Ta + Tb
    IS = I + S
    ITb = I + Tb
    if Ta.ndim == 2:
        matlin.check_hpd(hermitian_part(IS), "I + Ta + Tb", SingularBlock)
        matlin.check_hpd(hermitian_part(ITb), "I + Tb", SingularBlock)
    # (I + S)^{-1} S and (I + Tb)^{-1} Tb, (I + Tb)^{-1}
    IS_inv_S = np.linalg.solve(IS, S)
    ITb_inv_Tb = np.linalg.solve(ITb, Tb)
    _, ld_IS = np.linalg.slogdet(IS)
    _, ld_ITb = np.linalg.slogdet(ITb)
    out = {
        "glr": np.exp(ld_IS - ld_ITb),
        "rao": K * _tr(Ta - S @ IS_inv_S + Tb @ ITb_inv_Tb),
        "wald": _tr(Ta),
        "gradient": K * _tr(Ta @ (I - IS_inv_S)),
        "lh": _tr(Ta @ np.linalg.inv(ITb)),
    }
    if Ta.ndim == 2:
        out = {k: float(v) for k, v in out.items()}
    return out


def _mis_values(Z, dims):
    mp = mis_from_data(Z, dims)
    return detectors_from_mis(mp.Ta, mp.Tb, dims.K)


# --- standard forms ---------------------------------------------------------

def glr_standard(Z, dims, views=None) -> float:
    """Determinant ratio ``det D0 / det D1``, evaluated in log space."""
    v = _views(Z, dims, views)
    ld0 = matlin.logdet_hpd(v.D(0), SingularBlock, "D0")
    ld1 = matlin.logdet_hpd(v.D(1), SingularBlock, "D1")
    return float(np.exp(ld0 - ld1))


def rao_standard(Z, dims, views=None) -> float:
    v = _views(Z, dims, views)
    return float(_tr(ct(v.Zw0) @ v.Pbar_delta @ v.Zw0 @ v.P_C))


def wald_standard(Z, dims, views=None) -> float:
    v = _views(Z, dims, views)
    return float(_tr(ct(v.Zw1) @ v.Pdelta @ v.Zw1 @ v.P_C))


def gradient_standard(Z, dims, views=None, *, return_imag=False):
    v = _views(Z, dims, views)
    val = np.trace(ct(v.Zw1) @ v.Pdelta @ (v.Sc_sqrt @ v.R0_isqrt) @ v.Zw0 @ v.P_C)
    if return_imag:
        return float(val.real), float(val.imag)
    return float(val.real)


def lh_standard(Z, dims, views=None) -> float:
    v = _views(Z, dims, views)
    X = v.Zw1c
    Q = ct(X) @ v.Pdelta @ X
    return float(_tr(Q @ matlin.inv_hpd(v.D(1), SingularBlock, "D1")))


def known_covariance_glr(Z, R, dims) -> float:
    """Log GLR for known ``R``: ``Tr[Z^H R^{-1/2} (P_A1 - P_A0) R^{-1/2} Z P_C]``."""
    b = canonical_bases(dims)
    W = matlin.hpd_inv_sqrt(R, SingularBlock, "R")
    P = matlin.projector(W @ b.A) - matlin.projector(W @ b.Et)
    Zw = W @ np.asarray(Z, dtype=complex)
    return float(_tr(ct(Zw) @ P @ Zw @ b.Vc1 @ ct(b.Vc1)))


def two_step_glr_standard(Z, dims) -> float:
    """Known-covariance GLR with ``R`` replaced by ``Sc / (K - M)``.

    The ``(K - M)`` factor the plug-in introduces is divided out.
    """
    Sc = split_data(Z, dims).Sc
    scale = dims.K - dims.M
    return known_covariance_glr(Z, Sc / scale, dims) / scale


def _zd0(v, b):
    """``Z - Et Bt0_hat C``: data with the H0 interference estimate removed."""
    return v.Z - v.Sc_sqrt @ v.P_A0 @ v.Sc_isqrt @ v.Z @ v.P_C


def _gamma22(R_inv, b, t):
    """Signal block of ``(A^H R^{-1} A)^{-1}``."""
    G = hermitian_part(ct(b.A) @ R_inv @ b.A)
    return matlin.inv_hpd(G, SingularBlock, "A^H R^-1 A")[t:, t:]


def durbin_standard(Z, dims, views=None) -> float:
    """Durbin (naive) statistic through its Fisher-information quadratic form.

    ``vec(B0)^H (Tbar0 T0 Tbar0) vec(B0)`` where ``B0`` maximises the H1
    likelihood over the signal with nuisances fixed at their H0 estimates,
    ``T0 = (C C^H)^{-T} kron Gamma0_22`` and
    ``Tbar0 = (C C^H)^T kron (Er^H R0^{-1} Er)``.
    """
    v = _views(Z, dims, views)
    b = canonical_bases(dims)
    R0_inv = matlin.inv_hpd(v.R0_hat, SingularBlock, "R0_hat")
    Zd0 = v.Z - b.Et @ _gls(b.Et, v.Sc, v.Z, b.C) @ b.C
    G = hermitian_part(ct(b.Er) @ R0_inv @ b.Er)
    CC = b.C @ ct(b.C)
    CC_inv = np.linalg.inv(CC)
    B0 = matlin.solve_hpd(G, ct(b.Er) @ R0_inv @ Zd0 @ ct(b.C) @ CC_inv,
                          SingularBlock, "Er^H R0^-1 Er")
    T0 = np.kron(CC_inv.T, _gamma22(R0_inv, b, dims.t))
    Tbar0 = np.kron(CC.T, G)
    vb = B0.reshape(-1, order="F")
    return float(np.real(np.conj(vb) @ (Tbar0 @ T0 @ Tbar0) @ vb))


def rao_fisher_form(Z, dims, views=None) -> float:
    """Rao statistic before projector simplification.

    ``Tr[Zd0^H R0^{-1} Er Gamma0_22 Er^H R0^{-1} Zd0 P_C]``.
    """
    v = _views(Z, dims, views)
    b = canonical_bases(dims)
    R0_inv = matlin.inv_hpd(v.R0_hat, SingularBlock, "R0_hat")
    Zd0 = _zd0(v, b)
    X = ct(b.Er) @ R0_inv @ Zd0
    return float(_tr(ct(X) @ _gamma22(R0_inv, b, dims.t) @ X @ v.P_C))


def _wald_inner(v, b, R1_hat):
    """``K P_A0^perp Sc^{-1/2} Er Gamma1_22 Er^H Sc^{-1/2} ... `` left factor."""
    R1_inv = matlin.inv_hpd(R1_hat, SingularBlock, "R1_hat")
    G22 = _gamma22(R1_inv, b, v.dims.t)
    P0p = np.eye(v.dims.N) - v.P_A0
    return v.dims.K * P0p @ v.Sc_isqrt @ b.Er @ G22 @ ct(b.Er)


def wald_fisher_form(Z, dims, views=None) -> float:
    """Wald statistic in its Fisher-block form (before projector simplification)."""
    v = _views(Z, dims, views)
    b = canonical_bases(dims)
    est = ml_estimates(Z, dims)
    L = _wald_inner(v, b, est.R1_hat)
    P0p = np.eye(dims.N) - v.P_A0
    return float(_tr(ct(v.Zw1) @ L @ v.Sc_isqrt @ P0p @ v.Zw1 @ v.P_C))


def gradient_fisher_form(Z, dims, views=None) -> float:
    """Gradient statistic in its Fisher-block form."""
    v = _views(Z, dims, views)
    b = canonical_bases(dims)
    est = ml_estimates(Z, dims)
    L = _wald_inner(v, b, est.R1_hat)
    R0_inv = matlin.inv_hpd(v.R0_hat, SingularBlock, "R0_hat")
    val = np.trace(ct(v.Zw1) @ L @ R0_inv @ _zd0(v, b) @ v.P_C)
    return float(val.real)


# --- reports ------------------------------------------------------------------

_STANDARD = {
    "glr": glr_standard,
    "rao": rao_standard,
    "wald": wald_standard,
    "gradient": gradient_standard,
    "durbin": durbin_standard,
    "lh": lh_standard,
}


def _report(name, Z, dims, views=None, mis_values=None):
    if mis_values is None:
        mis_values = _mis_values(Z, dims)
    if name == "2s-glr":
        std = two_step_glr_standard(Z, dims)
    else:
        std = _STANDARD[name](Z, dims, views)
    return DetectorReport(name, std, mis_values[MIS_FORM[name]])


def glr(Z, dims) -> DetectorReport:
    return _report("glr", Z, dims)


def rao(Z, dims) -> DetectorReport:
    return _report("rao", Z, dims)


def wald(Z, dims) -> DetectorReport:
    return _report("wald", Z, dims)


def gradient(Z, dims) -> DetectorReport:
    return _report("gradient", Z, dims)


def durbin(Z, dims) -> DetectorReport:
    return _report("durbin", Z, dims)


def two_step_glr(Z, dims) -> DetectorReport:
    return _report("2s-glr", Z, dims)


def lh(Z, dims) -> DetectorReport:
    return _report("lh", Z, dims)


def evaluate_all(Z, dims, detectors=DETECTORS):
    """Reports for several detectors, sharing the whitening work."""
    views = whitened_views(Z, dims)
    mv = _mis_values(Z, dims)
    return {d: _report(d, Z, dims, views, mv) for d in detectors}
