"""
Classical detectors as special cases
====================================

With one target cell the general detectors collapse onto the
point-like family (Kelly's eta, the AMF, the adaptive Rao test). With no
interference and a full signal subspace they become the
multidimensional detectors. This script checks a few of those
reductions numerically.
"""

import numpy as np

from igmanova import ProblemDims, detectors_from_mis, mis_from_data
from igmanova.model import clutter_covariance, complex_normal
from igmanova import special

rng = np.random.default_rng(7)


def draw(dims, amp=1.5):
    R = clutter_covariance(dims.N)
    Z = np.linalg.cholesky(R) @ complex_normal(rng, (dims.N, dims.K))
    Z[:dims.J, :dims.M] += amp * complex_normal(rng, (dims.J, dims.M))
    return Z


def general(Z, dims):
    mis = mis_from_data(Z, dims)
    stats = detectors_from_mis(mis.Ta[None], mis.Tb[None], dims.K)
    return {k: float(v[0]) for k, v in stats.items()}


# Point-like target, rank-one steering, no interference.
dims = ProblemDims(N=8, K=13, M=1, r=1, t=0)
Z = draw(dims)
g = general(Z, dims)
pl = special.PointLikeData.from_matrix(Z)
A = np.eye(dims.N)[:, :1]
eta, t_glr = special.kelly_eta(pl, A)
print("point-like")
print(f"  Kelly eta            {eta:.10f}")
print(f"  GLR vs 1/(1-eta)     {g['glr']:.10f}  {t_glr:.10f}")
print(f"  AMF vs Wald          {special.amf(pl, A[:, 0]):.10f}  {g['wald']:.10f}")
print(f"  gradient vs K*eta    {g['gradient']:.10f}  {dims.K * eta:.10f}")
print(f"  LH vs GLR - 1        {g['lh']:.10f}  {g['glr'] - 1:.10f}")

# Multidimensional signal: r = N, t = 0. Rao equals Gradient and Wald
# equals Lawley-Hotelling.
dims = ProblemDims(N=6, K=16, M=3, r=6, t=0)
Z = draw(dims)
md = special.multidim_detectors(special.SpreadData.from_matrix(Z, dims.M))
g = general(Z, dims)
print("\nmultidimensional")
for k in ("glr", "rao", "wald", "gradient", "lh"):
    print(f"  {k:9s} special {md[k]:.10f}  general {g[k]:.10f}")
