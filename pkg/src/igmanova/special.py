"""Closed forms of the detectors in classical special cases.

Point-like targets (``M = 1``, optionally with ``t`` interference
directions), multidimensional signals (``J = N``, ``t = 0``), range-spread
targets (``r = 1``, ``t = 0``) and plain GMANOVA (``t = 0``). These are
written directly from the simplified expressions, not through the general
code path, so that comparing the two is a meaningful check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matlin
from .errors import InvalidDims, SingularBlock
from .matlin import ct, hermitian_part


@dataclass(frozen=True)
class PointLikeData:
    """Cell under test ``zp`` (N,) or (N, 1) and secondary data ``Zs``."""

    zp: np.ndarray
    Zs: np.ndarray

    @classmethod
    def from_matrix(cls, Z):
        Z = np.asarray(Z, dtype=complex)
        return cls(Z[:, :1], Z[:, 1:])

    @property
    def Z(self):
        return np.hstack([self._zp, self.Zs])

    @property
    def _zp(self):
        return np.asarray(self.zp, dtype=complex).reshape(-1, 1)

    @property
    def K(self):
        return 1 + self.Zs.shape[1]


@dataclass(frozen=True)
class SpreadData:
    """Target cells ``Ze`` (N x M) and secondary data ``Zs`` (N x (K - M))."""

    Ze: np.ndarray
    Zs: np.ndarray

    @classmethod
    def from_matrix(cls, Z, M):
        Z = np.asarray(Z, dtype=complex)
        return cls(Z[:, :M], Z[:, M:])

    @property
    def Z(self):
        return np.hstack([self.Ze, self.Zs])

    @property
    def K(self):
        return self.Ze.shape[1] + self.Zs.shape[1]


def _scatter(Zs):
    Zs = np.asarray(Zs, dtype=complex)
    S = hermitian_part(Zs @ ct(Zs))
    return matlin.check_hpd(S, "Sc", SingularBlock)


def _real(x):
    return float(np.real(np.squeeze(x)))


def _point_like_projectors(d, A, n_interference):
    Sc = _scatter(d.Zs)
    W = matlin.hpd_inv_sqrt(Sc, SingularBlock, "Sc")
    A = np.asarray(A, dtype=complex).reshape(Sc.shape[0], -1)
    P1 = matlin.projector(W @ A)
    P0 = matlin.projector(W @ A[:, :n_interference])
    return Sc, W, W @ d._zp, P0, P1


def kelly_eta(d: PointLikeData, A, n_interference: int = 0):
    """Kelly-type point-like GLR.

    ``eta = z1^H (P_A1 - P_A0) z1 / (1 + z1^H P_A0^perp z1)`` with
    ``z1 = Sc^{-1/2} zp``; the first ``n_interference`` columns of ``A``
    span the interference. Without interference the denominator is
    ``1 + zp^H Sc^{-1} zp``.

    Returns
    -------
    eta : float
        In ``[0, 1)``.
    t_glr : float
        ``1 / (1 - eta)``.
    """
    Sc, W, z1, P0, P1 = _point_like_projectors(d, A, n_interference)
    I = np.eye(Sc.shape[0])
    eta = _real(ct(z1) @ (P1 - P0) @ z1) / (1.0 + _real(ct(z1) @ (I - P0) @ z1))
    return eta, 1.0 / (1.0 - eta)


def amf(d: PointLikeData, a) -> float:
    """Adaptive matched filter ``|zp^H Sc^{-1} a|^2 / (a^H Sc^{-1} a)``."""
    Sc = _scatter(d.Zs)
    a = np.asarray(a, dtype=complex).reshape(-1, 1)
    Sa = matlin.solve_hpd(Sc, a, SingularBlock, "Sc")
    return abs((ct(d._zp) @ Sa).item()) ** 2 / _real(ct(a) @ Sa)


def rao_point_like(d: PointLikeData, a, *, woodbury=True) -> float:
    """Point-like Rao statistic (no interference).

    With a single steering vector ``a`` (``N x 1``) the scalar closed form
    is used; a matrix ``A`` uses the multi-rank form in terms of
    ``z1 = Sc^{-1/2} zp``. Both return ``K * eta_rao`` so the value is on
    the same scale as the general Rao statistic.

    ``woodbury=False`` evaluates ``eta_rao`` with an explicit inverse of
    ``S0 = zp zp^H + Zs Zs^H`` instead of the rank-one update of ``Sc^{-1}``.
    """
    Sc = _scatter(d.Zs)
    zp = d._zp
    A = np.asarray(a, dtype=complex).reshape(Sc.shape[0], -1)
    K = d.K
    if not woodbury:
        S0 = hermitian_part(zp @ ct(zp) + Sc)
        S0i = matlin.inv_hpd(S0, SingularBlock, "S0")
        u = ct(A) @ S0i @ zp
        G = hermitian_part(ct(A) @ S0i @ A)
        return K * _real(ct(u) @ matlin.solve_hpd(G, u, SingularBlock, "A^H S0^-1 A"))
    if A.shape[1] == 1:
        Sz = matlin.solve_hpd(Sc, zp, SingularBlock, "Sc")
        Sa = matlin.solve_hpd(Sc, A, SingularBlock, "Sc")
        q = _real(ct(zp) @ Sz)
        amf_val = abs((ct(zp) @ Sa).item()) ** 2 / _real(ct(A) @ Sa)
        return K * amf_val / ((1.0 + q) * (1.0 + q - amf_val))
    W = matlin.hpd_inv_sqrt(Sc, SingularBlock, "Sc")
    z1 = W @ zp
    P1 = matlin.projector(W @ A)
    I = np.eye(Sc.shape[0])
    num = _real(ct(z1) @ P1 @ z1) / (1.0 + _real(ct(z1) @ (I - P1) @ z1))
    return K * num / (1.0 + _real(ct(z1) @ z1))


def rao_point_like_interference(d: PointLikeData, A, n_interference: int) -> float:
    """``zp0^H (P_Abar1 - P_Abar0) zp0`` with ``R0_hat = S0 / K`` and
    ``S0 = Sc + Sc^{1/2} P_A0^perp Sc^{-1/2} zp zp^H Sc^{-1/2} P_A0^perp Sc^{1/2}``."""
    Sc, W, z1, P0, _ = _point_like_projectors(d, A, n_interference)
    A = np.asarray(A, dtype=complex).reshape(Sc.shape[0], -1)
    I = np.eye(Sc.shape[0])
    Ssq = matlin.hpd_sqrt(Sc, SingularBlock, "Sc")
    x = Ssq @ (I - P0) @ z1
    R0 = hermitian_part(Sc + x @ ct(x)) / d.K
    V = matlin.hpd_inv_sqrt(R0, SingularBlock, "R0_hat")
    P = matlin.projector(V @ A) - matlin.projector(V @ A[:, :n_interference])
    z0 = V @ d._zp
    return _real(ct(z0) @ P @ z0)


def point_like_statistics(d: PointLikeData, A, n_interference: int = 0) -> dict:
    """All point-like statistics from their special-case closed forms.

    ``gradient`` is ``K z1^H (P_A1 - P_A0) z1 / (1 + z1^H P_A0^perp z1)``
    written with ``Sc^{-1/2}``-whitened quadratic forms; ``lh`` is the
    scalar ``q / d1`` with ``q = z1^H (P_A1 - P_A0) z1`` and
    ``d1 = 1 + z1^H P_A1^perp z1``.
    """
    Sc, W, z1, P0, P1 = _point_like_projectors(d, A, n_interference)
    I = np.eye(Sc.shape[0])
    eta, t_glr = kelly_eta(d, A, n_interference)
    q = _real(ct(z1) @ (P1 - P0) @ z1)
    d0 = 1.0 + _real(ct(z1) @ (I - P0) @ z1)
    d1 = 1.0 + _real(ct(z1) @ (I - P1) @ z1)
    if n_interference == 0:
        rao_val = rao_point_like(d, A)
    else:
        rao_val = rao_point_like_interference(d, A, n_interference)
    return {
        "eta": eta,
        "glr": t_glr,
        "rao": rao_val,
        "wald": q,
        "gradient": d.K * q / d0,
        "lh": q / d1,
    }


def point_like_equivalences(d: PointLikeData, A, n_interference: int = 0) -> dict:
    """Exact relations among point-like statistics.

    ``gradient = K eta`` and ``lh = t_glr - 1 = t_glr * eta``. Returns the
    statistics together with the relative gaps of both relations.
    """
    s = point_like_statistics(d, A, n_interference)
    K = d.K
    s["gap_gradient_K_eta"] = abs(s["gradient"] - K * s["eta"]) / max(1.0, abs(s["gradient"]))
    s["gap_lh_glr_minus_1"] = abs(s["lh"] - (s["glr"] - 1.0)) / max(1.0, abs(s["lh"]))
    s["gap_lh_glr_times_eta"] = abs(s["lh"] - s["glr"] * s["eta"]) / max(1.0, abs(s["lh"]))
    return s


def multidim_detectors(d: SpreadData) -> dict:
    """Statistics for ``J = N``, ``t = 0``: the whole space is signal.

    ``glr = det[Sc + Ze Ze^H] / det[Sc]``, ``rao = gradient =
    K Tr[Ze^H S0^{-1} Ze]`` and ``wald = lh = Tr[Ze^H Sc^{-1} Ze]`` with
    ``S0 = Ze Ze^H + Sc``.
    """
    Sc = _scatter(d.Zs)
    Ze = np.asarray(d.Ze, dtype=complex)
    S0 = hermitian_part(Ze @ ct(Ze) + Sc)
    K = d.K
    ZP = np.hstack([Ze, np.zeros_like(d.Zs)])  # Z P_C
    rao_val = K * _real(np.trace(ct(Ze) @ matlin.solve_hpd(S0, Ze, SingularBlock, "S0")))
    grad_val = K * _real(np.trace(ct(ZP) @ matlin.solve_hpd(S0, ZP, SingularBlock, "S0")))
    wald_val = _real(np.trace(ct(Ze) @ matlin.solve_hpd(Sc, Ze, SingularBlock, "Sc")))
    lh_val = _real(np.trace(ct(ZP) @ matlin.solve_hpd(Sc, ZP, SingularBlock, "Sc")))
    glr_val = np.exp(matlin.logdet_hpd(S0, SingularBlock, "S0")
                     - matlin.logdet_hpd(Sc, SingularBlock, "Sc"))
    return {"glr": float(glr_val), "rao": rao_val, "gradient": grad_val,
            "wald": wald_val, "lh": lh_val}


def range_spread_detectors(d: SpreadData, a) -> dict:
    """Statistics for a rank-one signal subspace ``a`` and no interference.

    ``eta' = (a^H Sc^{-1} Ze) D0^{-1} (Ze^H Sc^{-1} a) / (a^H Sc^{-1} a)``
    with ``D0 = I + Ze^H Sc^{-1} Ze``. The LH value is computed from its
    trace form with ``D1`` and not from ``eta'``.
    """
    Sc = _scatter(d.Zs)
    Ze = np.asarray(d.Ze, dtype=complex)
    a = np.asarray(a, dtype=complex).reshape(-1, 1)
    M = Ze.shape[1]
    K = d.K
    Sa = matlin.solve_hpd(Sc, a, SingularBlock, "Sc")
    aSa = _real(ct(a) @ Sa)
    w = ct(Ze) @ Sa  # Ze^H Sc^{-1} a
    D0 = hermitian_part(np.eye(M) + ct(Ze) @ matlin.solve_hpd(Sc, Ze, SingularBlock, "Sc"))
    D0_inv_w = matlin.solve_hpd(D0, w, SingularBlock, "D0")
    eta = _real(ct(w) @ D0_inv_w) / aSa

    S0 = hermitian_part(Ze @ ct(Ze) + Sc)
    S0a = matlin.solve_hpd(S0, a, SingularBlock, "S0")
    v0 = ct(Ze) @ S0a
    rao_val = K * _real(ct(v0) @ v0) / _real(ct(a) @ S0a)
    wald_val = _real(ct(w) @ w) / aSa
    grad_val = K * _real(ct(w) @ v0) / aSa
    Q = w @ ct(w) / aSa
    D1 = hermitian_part(D0 - Q)
    lh_val = _real(np.trace(Q @ matlin.inv_hpd(D1, SingularBlock, "D1")))
    return {"eta": eta, "glr": 1.0 / (1.0 - eta), "rao": rao_val,
            "wald": wald_val, "gradient": grad_val, "lh": lh_val}


def gmanova_detectors(Z, dims) -> dict:
    """Plain GMANOVA (``t = 0``) statistics.

    Without interference ``P_A0 = 0`` and ``R0_hat = Z Z^H / K``.
    """
    if dims.t != 0:
        raise InvalidDims("GMANOVA special case requires t = 0")
    Z = np.asarray(Z, dtype=complex)
    N, K, M, r = dims.N, dims.K, dims.M, dims.r
    A = np.eye(N, dtype=complex)[:, :r]
    Zs = Z[:, M:]
    Sc = _scatter(Zs)
    W1 = matlin.hpd_inv_sqrt(Sc, SingularBlock, "Sc")
    S0 = hermitian_part(Z @ ct(Z))
    R0 = S0 / K
    W0 = matlin.hpd_inv_sqrt(R0, SingularBlock, "R0_hat")
    P1 = matlin.projector(W1 @ A)
    Pb1 = matlin.projector(W0 @ A)
    I = np.eye(N)
    X1 = W1 @ Z[:, :M]
    X0 = W0 @ Z[:, :M]
    D0 = hermitian_part(np.eye(M) + ct(X1) @ X1)
    D1 = hermitian_part(np.eye(M) + ct(X1) @ (I - P1) @ X1)
    glr_val = np.exp(matlin.logdet_hpd(D0, SingularBlock, "D0")
                     - matlin.logdet_hpd(D1, SingularBlock, "D1"))
    Q = ct(X1) @ P1 @ X1
    grad = np.trace(ct(X1) @ P1 @ matlin.hpd_sqrt(Sc) @ W0 @ X0)
    return {
        "glr": float(glr_val),
        "rao": _real(np.trace(ct(X0) @ Pb1 @ X0)),
        "wald": _real(np.trace(Q)),
        "gradient": float(np.real(grad)),
        "lh": _real(np.trace(Q @ matlin.inv_hpd(D1, SingularBlock, "D1"))),
    }
