"""Thresholded tests built on the statistics, and their combinations.

Every ``decide_*`` function accepts a :class:`~sparsedetect.model.Dataset` or
any object with a response ``y`` and, optionally, a precomputed ``profile``
(as produced by the reduced Monte Carlo sampler).  Tests that need the full
design (t1) require ``x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .boundary import hc_detection_threshold
from .model import Dataset, DomainError, TestDecision
from .numerics import std_normal_quantile
from .statistics import (
    PValueProfile,
    hc_statistic,
    pvalue_profile,
    t0_statistic,
    t1_statistic,
    tmax_statistic,
)

__all__ = [
    "TEST_NAMES",
    "TestSpec",
    "critical_value",
    "decide",
    "decide_combined",
    "decide_psi0_T",
    "decide_psi0_alpha",
    "decide_psi1_alpha",
    "decide_psi_hc",
    "decide_psi_max",
    "needs_design",
    "requires_known_variance",
]

TEST_NAMES = ("psi0_alpha", "psi0_T", "psi1_alpha", "psi_hc", "psi_max",
              "psi_star", "psi_star_hc", "psi_triple")

_ALIASES = {"psi0": "psi0_alpha", "psi1": "psi1_alpha", "hc": "psi_hc",
            "psi_star_alpha": "psi_star"}

_COMPONENTS = {
    "psi_star": ("psi0_alpha/2", "psi1_alpha/2"),
    "psi_star_hc": ("psi0_alpha", "psi_hc"),
    "psi_triple": ("psi0_alpha/2", "psi1_alpha/2", "psi_hc"),
}


@dataclass(frozen=True)
class TestSpec:
    """A named test and its tuning constants.

    ``alpha`` is the nominal level of the calibrated tests, ``a`` the HC
    margin, ``T_np`` an explicit threshold for psi0_T (default sqrt(n) r^2 / 2),
    and ``cutoff`` the largest p-value entering the HC maximum.
    """

    name: str
    alpha: float = 0.05
    a: float = 0.1
    T_np: float | None = None
    cutoff: float = 0.5

    __test__ = False

    def __post_init__(self):
        name = _ALIASES.get(self.name, self.name)
        if name not in TEST_NAMES:
            raise DomainError(f"unknown test {self.name!r}; choose from {TEST_NAMES}")
        object.__setattr__(self, "name", name)
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")
        if not self.a > 0:
            raise DomainError("HC margin a must be positive")
        if not 0.0 < self.cutoff < 1.0:
            raise DomainError("HC cutoff must lie in (0, 1)")


def needs_design(spec: TestSpec) -> bool:
    """Whether the test needs the full design matrix (anything using t1)."""
    return spec.name in ("psi1_alpha", "psi_star", "psi_triple")


def requires_known_variance(spec: TestSpec) -> bool:
    """t0 and t1 are calibrated for unit noise; only HC-type tests are scale free."""
    return spec.name not in ("psi_hc", "psi_max")


def known_variance_error(spec: TestSpec) -> DomainError:
    base = spec.name[:4] if spec.name[:4] in ("psi0", "psi1") else spec.name
    return DomainError(f"{base} requires known variance")


def uses_hc(spec: TestSpec) -> bool:
    return spec.name in ("psi_hc", "psi_max", "psi_star_hc", "psi_triple")


def critical_value(alpha: float) -> float:
    """u_alpha, the (1 - alpha)-quantile of N(0, 1)."""
    return std_normal_quantile(1.0 - alpha)


def _profile_of(data) -> PValueProfile:
    profile = getattr(data, "profile", None)
    return profile if profile is not None else pvalue_profile(data)


def _standardized_y(data, sigma: float):
    return data.y if sigma == 1.0 else data.y / sigma


def decide_psi0_alpha(data, alpha: float, sigma: float = 1.0) -> TestDecision:
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    t0 = t0_statistic(_standardized_y(data, sigma))
    return TestDecision.from_threshold("psi0_alpha", t0, critical_value(alpha))


def decide_psi0_T(data, r: float | None = None, threshold: float | None = None,
                  sigma: float = 1.0) -> TestDecision:
    """Reject when t0 exceeds ``threshold`` (default sqrt(n) r^2 / 2)."""
    y = _standardized_y(data, sigma)
    if threshold is None:
        if r is None or not r > 0:
            raise DomainError("psi0_T needs a radius r > 0 or an explicit threshold")
        threshold = math.sqrt(y.size) * r * r / 2.0
    return TestDecision.from_threshold("psi0_T", t0_statistic(y), threshold)


def decide_psi1_alpha(data, alpha: float, sigma: float = 1.0) -> TestDecision:
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    x = getattr(data, "x", None)
    if x is None:
        raise DomainError("t1 needs the full design matrix")
    std = data if sigma == 1.0 else Dataset(x, data.y / sigma)
    return TestDecision.from_threshold("psi1_alpha", t1_statistic(std), critical_value(alpha))


def _column_count(data) -> int:
    x = getattr(data, "x", None)
    return x.shape[1] if x is not None else data.profile.p


def decide_psi_hc(data, a: float = 0.1, cutoff: float = 0.5) -> TestDecision:
    """Reject when t_hc > (1 + a) sqrt(2 log log p); needs p >= 3."""
    threshold = hc_detection_threshold(_column_count(data), a)
    value = hc_statistic(_profile_of(data), cutoff)
    return TestDecision.from_threshold("psi_hc", value, threshold)


def decide_psi_max(data, a: float = 0.1) -> TestDecision:
    """Reject when t_max exceeds the HC threshold."""
    threshold = hc_detection_threshold(_column_count(data), a)
    return TestDecision.from_threshold("psi_max", tmax_statistic(_profile_of(data)), threshold)


def _single(data, name: str, spec: TestSpec, sigma: float, r: float | None) -> TestDecision:
    alpha = spec.alpha
    if name.endswith("/2"):
        name, alpha = name[:-2], alpha / 2.0
    if name == "psi0_alpha":
        return decide_psi0_alpha(data, alpha, sigma)
    if name == "psi0_T":
        return decide_psi0_T(data, r=r, threshold=spec.T_np, sigma=sigma)
    if name == "psi1_alpha":
        return decide_psi1_alpha(data, alpha, sigma)
    if name == "psi_hc":
        return decide_psi_hc(data, spec.a, spec.cutoff)
    if name == "psi_max":
        return decide_psi_max(data, spec.a)
    raise DomainError(f"{name} is not a single test")


def decide_combined(data, spec: TestSpec, sigma: float = 1.0) -> TestDecision:
    """Max-combination: reject iff any constituent rejects.

    psi_star uses psi0 and psi1 at level alpha/2 each, psi_star_hc uses
    psi0 at level alpha with HC, psi_triple uses all three.  The returned
    decision carries the constituents; its statistic is the number of
    rejecting constituents and its threshold 0.
    """
    names = _COMPONENTS.get(spec.name)
    if names is None:
        raise DomainError(f"{spec.name} is not a combined test")
    parts = tuple(_single(data, name, spec, sigma, None) for name in names)
    hits = sum(d.reject for d in parts)
    return TestDecision(float(hits), 0.0, hits > 0, spec.name, parts)


def decide(data, spec: TestSpec, *, sigma: float = 1.0, variance_known: bool = True,
           r: float | None = None) -> TestDecision:
    """Apply ``spec`` to ``data``.

    With ``variance_known`` the response is standardized by ``sigma`` before
    t0/t1; with unknown variance only the scale-free HC tests are allowed.
    """
    if not variance_known:
        if requires_known_variance(spec):
            raise known_variance_error(spec)
        sigma = 1.0
    if spec.name in _COMPONENTS:
        return decide_combined(data, spec, sigma)
    return _single(data, spec.name, spec, sigma, r)
