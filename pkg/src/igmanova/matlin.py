"""Dense complex matrix primitives.

Everything here works on plain ``numpy`` arrays of complex dtype. A matrix
is treated as Hermitian positive definite (HPD) when

* ``||S - S^H||_F <= HERMITIAN_RTOL * ||S||_F``, and
* its smallest eigenvalue exceeds ``PD_RTOL`` times its largest one.

Matrices in this problem are tiny (N <= 32), so spectral checks are cheap
and every HPD entry point runs them.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .errors import NotPositiveDefinite, RankDeficient

PD_RTOL = 1e-12
HERMITIAN_RTOL = 1e-12


def ct(X):
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(X, -1, -2))


def hermitian_part(S):
    return 0.5 * (S + ct(S))


def _checked_eigvalsh(S, error, name):
    S = np.asarray(S)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"{name}: expected a square matrix, got shape {S.shape}")
    if S.shape[0] == 0:
        return np.zeros(0)
    norm = np.linalg.norm(S)
    if not np.all(np.isfinite(S)):
        raise error(f"{name}: non-finite entries")
    if norm == 0.0:
        raise error(f"{name}: zero matrix")
    if np.linalg.norm(S - ct(S)) > HERMITIAN_RTOL * norm:
        raise error(f"{name}: not Hermitian")
    w = np.linalg.eigvalsh(S)
    if w[0] <= PD_RTOL * w[-1]:
        raise error(
            f"{name}: minimum eigenvalue {w[0]:.3e} below tolerance "
            f"({PD_RTOL:.0e} x {w[-1]:.3e})"
        )
    return w


def check_hpd(S, name="matrix", error=NotPositiveDefinite):
    """Validate ``S`` as HPD and return it as a complex array.

    Raises ``error`` (default :class:`NotPositiveDefinite`) on failure.
    """
    S = np.asarray(S, dtype=complex)
    _checked_eigvalsh(S, error, name)
    return S


def min_eig_ratio(S):
    """Smallest over largest eigenvalue of a Hermitian matrix."""
    w = np.linalg.eigvalsh(hermitian_part(np.asarray(S)))
    return w[0] / w[-1]


def projector(A):
    """Orthogonal projector onto the column span of ``A``.

    ``A (A^H A)^{-1} A^H``. An ``N x 0`` basis gives the zero projector.

    Raises
    ------
    RankDeficient
        If the Gram matrix ``A^H A`` fails the PD tolerance.
    """
    A = np.asarray(A, dtype=complex)
    n, p = A.shape
    if p == 0:
        return np.zeros((n, n), dtype=complex)
    gram = ct(A) @ A
    _checked_eigvalsh(hermitian_part(gram), RankDeficient, "A^H A")
    P = A @ sla.solve(gram, ct(A), assume_a="pos")
    return hermitian_part(P)


def complement_projector(A):
    """``I - P_A``."""
    A = np.asarray(A, dtype=complex)
    return np.eye(A.shape[0], dtype=complex) - projector(A)


def _hpd_power(S, power, error, name):
    S = np.asarray(S, dtype=complex)
    _checked_eigvalsh(S, error, name)
    w, V = np.linalg.eigh(hermitian_part(S))
    return hermitian_part((V * w**power) @ ct(V))


def hpd_inv_sqrt(S, error=NotPositiveDefinite, name="S"):
    """Principal (Hermitian) inverse square root ``S^{-1/2}``."""
    return _hpd_power(S, -0.5, error, name)


def hpd_sqrt(S, error=NotPositiveDefinite, name="S"):
    """Principal (Hermitian) square root ``S^{1/2}``."""
    return _hpd_power(S, 0.5, error, name)


def solve_hpd(S, B, error=NotPositiveDefinite, name="S"):
    """``S^{-1} B`` through a Cholesky factorization of ``S``."""
    S = np.asarray(S, dtype=complex)
    _checked_eigvalsh(S, error, name)
    B = np.asarray(B, dtype=complex)
    if S.shape[0] == 0:
        return np.zeros(B.shape, dtype=complex)
    c = sla.cho_factor(hermitian_part(S), lower=True)
    return sla.cho_solve(c, B)


def inv_hpd(S, error=NotPositiveDefinite, name="S"):
    S = np.asarray(S, dtype=complex)
    return hermitian_part(solve_hpd(S, np.eye(S.shape[0]), error, name))


def logdet_hpd(S, error=NotPositiveDefinite, name="S"):
    """Natural log of ``det(S)`` for HPD ``S`` (Cholesky diagonal)."""
    S = np.asarray(S, dtype=complex)
    _checked_eigvalsh(S, error, name)
    if S.shape[0] == 0:
        return 0.0
    L = np.linalg.cholesky(hermitian_part(S))
    return float(2.0 * np.sum(np.log(np.real(np.diag(L)))))
