"""Adaptive multichannel detection under the I-GMANOVA model.

Seven CFAR detectors (GLR, Rao, Wald, Gradient, Durbin, two-step GLR and
Lawley-Hotelling) in standard and maximal-invariant forms, closed forms for
classical special cases, and a Monte Carlo harness for thresholds, P_d
curves and CFAR checks.
"""
from .detectors import (DETECTORS, DISTINCT, DetectorReport, detectors_from_mis, durbin,
                        evaluate_all, glr, gradient, lh, ml_estimates, rao, two_step_glr, wald)
from .errors import (ConfigError, InvalidCorrelation, InvalidDims, NotPositiveDefinite,
                     NumericalError, RankDeficient, SingularBlock, SingularSecondary,
                     TooManyDiscards, ZeroSignal)
from .mis import MisPair, compute_mis, induced_invariant, mis_batch, mis_from_data, sinr
from .model import (ProblemDims, Scenario, canonical_bases, clutter_covariance,
                    scale_signal_to_sinr, synthesize)
from .montecarlo import McConfig, calibrate, cfar_check, estimate_pd, pd_vs_sinr

__all__ = [
    "DETECTORS", "DISTINCT", "DetectorReport", "detectors_from_mis", "durbin", "evaluate_all",
    "glr", "gradient", "lh", "ml_estimates", "rao", "two_step_glr", "wald",
    "ConfigError", "InvalidCorrelation", "InvalidDims", "NotPositiveDefinite", "NumericalError",
    "RankDeficient", "SingularBlock", "SingularSecondary", "TooManyDiscards", "ZeroSignal",
    "MisPair", "compute_mis", "induced_invariant", "mis_batch", "mis_from_data", "sinr",
    "ProblemDims", "Scenario", "canonical_bases", "clutter_covariance", "scale_signal_to_sinr",
    "synthesize", "McConfig", "calibrate", "cfar_check", "estimate_pd", "pd_vs_sinr",
]
