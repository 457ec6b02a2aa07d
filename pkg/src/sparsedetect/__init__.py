"""Detection of sparse signals in high-dimensional linear regression.

Test statistics (chi-square, U-statistic, Higher Criticism), closed-form
detection boundaries, exact likelihood-ratio lower-bound machinery and a
seeded Monte Carlo harness for the detection phase transition.
"""
from .boundary import boundary_rate, classify_regime, phi_boundary, sharp_radius
from .decisions import TestSpec, decide
from .designs import assumption_diagnostics, sample_design
from .lowerbound import (
    ThreePointPrior,
    UniformSupportPrior,
    bayes_risk_oracle,
    likelihood_ratio_exact,
    likelihood_ratio_unknown_variance,
    threshold_tj,
)
from .model import Dataset, DomainError, ProblemConfig, SparseSignal, place_signal
from .montecarlo import CellResult, SweepGrid, estimate_errors, run_sweep, unknown_variance_sweep
from .numerics import std_normal_cdf, std_normal_quantile, two_sided_pvalue
from .statistics import (
    hc_statistic,
    lu_statistic,
    pvalue_profile,
    t0_statistic,
    t1_statistic,
    tmax_statistic,
    ymax_exceeds,
)

__version__ = "0.1.0"
