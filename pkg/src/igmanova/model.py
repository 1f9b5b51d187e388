"""Canonical-form scenario construction and synthetic data generation.

Under the canonical form the data matrix is

    H0:  Z = A [Bt0; 0] C + N
    H1:  Z = A [Bt1; B] C + N

with ``A = [Et Er]`` a selector of the first ``J = t + r`` channels,
``C = [I_M 0]`` a selector of the first ``M`` snapshots and ``N`` a proper
complex Gaussian matrix with i.i.d. columns of covariance ``R``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matlin
from .errors import InvalidCorrelation, InvalidDims, ZeroSignal
from .mis import sinr


@dataclass(frozen=True)
class ProblemDims:
    """Dimensions ``(N, K, M, r, t)`` of the detection problem."""

    N: int
    K: int
    M: int
    r: int
    t: int = 0

    def __post_init__(self):
        for name in ("N", "K", "M", "r", "t"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise InvalidDims(f"{name} must be an integer, got {v!r}")
        N, K, M, r, t = self.N, self.K, self.M, self.r, self.t
        if not 1 <= M <= K:
            raise InvalidDims(f"need 1 <= M <= K, got M={M}, K={K}")
        if K - M < N:
            raise InvalidDims(f"need K - M >= N, got K-M={K - M}, N={N}")
        if r < 1 or t < 0:
            raise InvalidDims(f"need r >= 1 and t >= 0, got r={r}, t={t}")
        if r + t > N:
            raise InvalidDims(f"need J = r + t <= N, got J={r + t}, N={N}")

    @property
    def J(self) -> int:
        return self.r + self.t

    def as_tuple(self):
        return (self.N, self.K, self.M, self.r, self.t)

    def __str__(self):
        return f"(N={self.N}, K={self.K}, M={self.M}, r={self.r}, t={self.t})"


@dataclass(frozen=True)
class CanonicalBases:
    Et: np.ndarray
    Er: np.ndarray
    A: np.ndarray
    C: np.ndarray
    Vc1: np.ndarray
    Vc2: np.ndarray


def canonical_bases(dims: ProblemDims) -> CanonicalBases:
    """Selector matrices of the canonical form for ``dims``."""
    N, K, M, r, t = dims.as_tuple()
    I_N = np.eye(N, dtype=complex)
    I_K = np.eye(K, dtype=complex)
    return CanonicalBases(
        Et=I_N[:, :t].copy(),
        Er=I_N[:, t:t + r].copy(),
        A=I_N[:, :t + r].copy(),
        C=I_K[:M, :].copy(),
        Vc1=I_K[:, :M].copy(),
        Vc2=I_K[:, M:].copy(),
    )


def clutter_covariance(N: int, sigma_n2: float = 1.0, cnr_db: float = 30.0,
                       corr: float = 0.95) -> np.ndarray:
    """Thermal noise plus exponentially correlated clutter.

    ``R = sigma_n2 I + sigma_c2 M_c`` with ``(M_c)_{ij} = corr^|i-j|`` and
    ``sigma_c2 = sigma_n2 10^(cnr_db/10)``. ``cnr_db=-inf`` drops the
    clutter term.
    """
    if not 0.0 <= corr < 1.0:
        raise InvalidCorrelation(f"correlation must lie in [0, 1), got {corr}")
    if not sigma_n2 > 0:
        raise ValueError(f"sigma_n2 must be positive, got {sigma_n2}")
    sigma_c2 = sigma_n2 * 10.0 ** (cnr_db / 10.0)
    idx = np.arange(N)
    Mc = corr ** np.abs(idx[:, None] - idx[None, :])
    return (sigma_n2 * np.eye(N) + sigma_c2 * Mc).astype(complex)


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard proper complex Gaussian entries, ``E|x|^2 = 1``."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) * np.sqrt(0.5)


def sample_disturbance(R, K: int, rng: np.random.Generator) -> np.ndarray:
    """``N x K`` matrix with i.i.d. ``CN(0, R)`` columns, built as ``R^{1/2} G``."""
    R = np.asarray(R, dtype=complex)
    G = complex_normal(rng, (R.shape[0], K))
    return matlin.hpd_sqrt(R, name="R") @ G


def draw_signal(dims: ProblemDims, rng: np.random.Generator) -> np.ndarray:
    """Random ``r x M`` signal matrix with i.i.d. ``CN(0, 1)`` entries."""
    return complex_normal(rng, (dims.r, dims.M))


def scale_signal_to_sinr(Bg, R, dims: ProblemDims, rho: float) -> np.ndarray:
    """Rescale ``Bg`` so that ``Tr[B^H R_{2.3}^{-1} B]`` equals ``rho`` (linear)."""
    Bg = np.asarray(Bg, dtype=complex)
    if rho < 0:
        raise ValueError(f"target SINR must be nonnegative, got {rho}")
    if np.linalg.norm(Bg) == 0.0:
        raise ZeroSignal("cannot scale a zero signal matrix")
    if rho == 0:
        return np.zeros_like(Bg)
    return np.sqrt(rho / sinr(Bg, R, dims)) * Bg


@dataclass(frozen=True)
class Scenario:
    """Ground truth of one canonical-form experiment."""

    dims: ProblemDims
    B: np.ndarray
    Bt0: np.ndarray
    Bt1: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        d = self.dims
        for name, shape in (("B", (d.r, d.M)), ("Bt0", (d.t, d.M)),
                            ("Bt1", (d.t, d.M)), ("R", (d.N, d.N))):
            got = np.shape(getattr(self, name))
            if got != shape:
                raise InvalidDims(f"{name} has shape {got}, expected {shape}")
        matlin.check_hpd(self.R, "R")

    @classmethod
    def noise_only(cls, dims: ProblemDims, R) -> "Scenario":
        z = np.zeros((dims.t, dims.M), dtype=complex)
        return cls(dims, np.zeros((dims.r, dims.M), dtype=complex), z, z, np.asarray(R, complex))

    def mean(self, hypothesis: str) -> np.ndarray:
        """Noise-free part ``A Bs C`` of the data under ``hypothesis``."""
        d = self.dims
        if hypothesis == "H0":
            Bs = np.vstack([self.Bt0, np.zeros((d.r, d.M))])
        elif hypothesis == "H1":
            Bs = np.vstack([self.Bt1, self.B])
        else:
            raise ValueError(f"hypothesis must be 'H0' or 'H1', got {hypothesis!r}")
        out = np.zeros((d.N, d.K), dtype=complex)
        out[:d.J, :d.M] = Bs
        return out


def synthesize(scn: Scenario, hypothesis: str, rng: np.random.Generator) -> np.ndarray:
    """One ``N x K`` data matrix drawn under ``hypothesis`` ('H0' or 'H1')."""
    return scn.mean(hypothesis) + sample_disturbance(scn.R, scn.dims.K, rng)
