"""Data partitioning and the maximal invariant statistic ``(Ta, Tb)``.

Rows of the canonical data split as ``t`` interference rows ("1"), ``r``
signal rows ("2") and ``N - J`` signal-free rows ("3"); columns split as the
first ``M`` (cells under test) and the remaining ``K - M`` (secondary data).

For ``J < N``::

    Ta = Z_{2.3}^H S_{2.3}^{-1} Z_{2.3},   Tb = Z_3^H S_33^{-1} Z_3

with ``Z_{2.3} = Z_2 - S_23 S_33^{-1} Z_3`` and the Schur complement
``S_{2.3} = S_22 - S_23 S_33^{-1} S_32``. For ``J = N`` the "3" blocks are
empty, ``Ta = Z_2^H S_22^{-1} Z_2`` and ``Tb = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matlin
from .errors import SingularBlock, SingularSecondary
from .matlin import ct, hermitian_part


@dataclass(frozen=True)
class DataSplit:
    Zc: np.ndarray
    Zcperp: np.ndarray
    Sc: np.ndarray


@dataclass(frozen=True)
class BlockSplit:
    """Row blocks of ``Zc`` and the 3x3 block partition of ``Sc``.

    ``S[i][j]`` holds block ``S_{i+1, j+1}``.
    """

    Z1: np.ndarray
    Z2: np.ndarray
    Z3: np.ndarray
    S: tuple

    @property
    def Z23(self):
        return np.vstack([self.Z2, self.Z3])

    @property
    def S2(self):
        return np.block([[self.S[1][1], self.S[1][2]],
                         [self.S[2][1], self.S[2][2]]])

    @property
    def Zc(self):
        return np.vstack([self.Z1, self.Z2, self.Z3])

    @property
    def Sc(self):
        return np.block([[self.S[i][j] for j in range(3)] for i in range(3)])


@dataclass(frozen=True)
class MisPair:
    Ta: np.ndarray
    Tb: np.ndarray

    @property
    def S(self):
        """``Ta + Tb``."""
        return self.Ta + self.Tb


def _row_slices(dims):
    return slice(0, dims.t), slice(dims.t, dims.J), slice(dims.J, dims.N)


def split_data(Z, dims) -> DataSplit:
    """Split ``Z`` into cells under test, secondary data and ``Sc``.

    Raises
    ------
    SingularSecondary
        If ``Sc = Zcperp Zcperp^H`` fails the PD tolerance.
    """
    Z = np.asarray(Z, dtype=complex)
    if Z.shape != (dims.N, dims.K):
        raise ValueError(f"Z has shape {Z.shape}, expected {(dims.N, dims.K)}")
    Zc = Z[:, :dims.M]
    Zcperp = Z[:, dims.M:]
    Sc = hermitian_part(Zcperp @ ct(Zcperp))
    matlin.check_hpd(Sc, "Sc", SingularSecondary)
    return DataSplit(Zc=Zc, Zcperp=Zcperp, Sc=Sc)


def partition_blocks(ds: DataSplit, dims) -> BlockSplit:
    rows = _row_slices(dims)
    Z1, Z2, Z3 = (ds.Zc[s] for s in rows)
    S = tuple(tuple(ds.Sc[si, sj] for sj in rows) for si in rows)
    return BlockSplit(Z1=Z1, Z2=Z2, Z3=Z3, S=S)


def schur_23(S, dims):
    """``S_{2.3} = S_22 - S_23 S_33^{-1} S_32`` (``S_22`` when ``J = N``)."""
    _, s2, s3 = _row_slices(dims)
    S = np.asarray(S, dtype=complex)
    S22 = S[s2, s2]
    if dims.J == dims.N:
        return S22
    X = matlin.solve_hpd(S[s3, s3], S[s3, s2], SingularBlock, "S_33")
    return hermitian_part(S22 - S[s2, s3] @ X)


def compute_mis(bs: BlockSplit, dims) -> MisPair:
    """Maximal invariant ``(Ta, Tb)`` from the block partition."""
    M = bs.Z2.shape[1]
    S22, S23, S32, S33 = bs.S[1][1], bs.S[1][2], bs.S[2][1], bs.S[2][2]
    if dims.J == dims.N:
        X = matlin.solve_hpd(S22, bs.Z2, SingularBlock, "S_22")
        return MisPair(Ta=hermitian_part(ct(bs.Z2) @ X),
                       Tb=np.zeros((M, M), dtype=complex))
    Y = matlin.solve_hpd(S33, np.hstack([bs.Z3, S32]), SingularBlock, "S_33")
    S33i_Z3, S33i_S32 = Y[:, :M], Y[:, M:]
    Z2_3 = bs.Z2 - S23 @ S33i_Z3
    S2_3 = hermitian_part(S22 - S23 @ S33i_S32)
    Ta = ct(Z2_3) @ matlin.solve_hpd(S2_3, Z2_3, SingularBlock, "S_2.3")
    Tb = ct(bs.Z3) @ S33i_Z3
    return MisPair(Ta=hermitian_part(Ta), Tb=hermitian_part(Tb))


def mis_from_data(Z, dims) -> MisPair:
    """Shortcut: ``split_data`` -> ``partition_blocks`` -> ``compute_mis``."""
    return compute_mis(partition_blocks(split_data(Z, dims), dims), dims)


def induced_invariant(B, R, dims):
    """``T_p = B^H R_{2.3}^{-1} B`` for the true covariance ``R``."""
    B = np.asarray(B, dtype=complex)
    R23 = schur_23(R, dims)
    return hermitian_part(ct(B) @ matlin.solve_hpd(R23, B, SingularBlock, "R_2.3"))


def sinr(B, R, dims) -> float:
    """SINR ``rho = Tr[T_p]`` (linear scale)."""
    return float(np.real(np.trace(induced_invariant(B, R, dims))))


def mis_batch(Z, dims):
    """Vectorised MIS over a stack of data matrices.

    Parameters
    ----------
    Z : ndarray, shape (n, N, K)

    Returns
    -------
    Ta, Tb : ndarray, shape (n, M, M)
    valid : ndarray of bool, shape (n,)
        False where ``Sc`` fails the PD tolerance; the corresponding
        ``Ta``/``Tb`` entries are meaningless.
    """
    Z = np.asarray(Z, dtype=complex)
    n = Z.shape[0]
    M, t, J, N = dims.M, dims.t, dims.J, dims.N
    Zc = Z[:, :, :M]
    Zp = Z[:, :, M:]
    Sc = Zp @ ct(Zp)
    Sc = hermitian_part(Sc)
    w = np.linalg.eigvalsh(Sc)
    valid = w[:, 0] > matlin.PD_RTOL * w[:, -1]
    if not valid.all():
        Sc = Sc.copy()
        Sc[~valid] = np.eye(N)
    Z2 = Zc[:, t:J]
    S22 = Sc[:, t:J, t:J]
    if J == N:
        Ta = ct(Z2) @ np.linalg.solve(S22, Z2)
        Tb = np.zeros((n, M, M), dtype=complex)
    else:
        Z3 = Zc[:, J:]
        S33 = Sc[:, J:, J:]
        S23 = Sc[:, t:J, J:]
        Y = np.linalg.solve(S33, np.concatenate([Z3, ct(S23)], axis=-1))
        Z2_3 = Z2 - S23 @ Y[..., :M]
        S2_3 = S22 - S23 @ Y[..., M:]
        Ta = ct(Z2_3) @ np.linalg.solve(S2_3, Z2_3)
        Tb = ct(Z3) @ Y[..., :M]
    return hermitian_part(Ta), hermitian_part(Tb), valid
