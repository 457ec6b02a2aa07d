"""Closed-form detection boundaries.

Natural logarithms throughout.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .model import DomainError, ProblemConfig, k_from_beta

__all__ = [
    "RegimeReport",
    "SHARP_RATIO_THRESHOLD",
    "UNKNOWN_VARIANCE_RATIO_THRESHOLD",
    "boundary_rate",
    "boundary_unit",
    "classify_regime",
    "hc_detection_threshold",
    "phi_boundary",
    "sharp_radius",
]

# finite-sample stand-ins for k log p = o(sqrt n) and k log p = o(n)
SHARP_RATIO_THRESHOLD = 0.1
UNKNOWN_VARIANCE_RATIO_THRESHOLD = 1.0


def phi_boundary(beta: float) -> float:
    """Sharp constant: sqrt(2 beta - 1) up to 3/4, sqrt(2)(1 - sqrt(1 - beta)) after."""
    if not 0.5 < beta < 1.0:
        raise DomainError(f"phi is defined for 1/2 < beta < 1, got {beta}")
    if beta <= 0.75:
        return math.sqrt(2.0 * beta - 1.0)
    return math.sqrt(2.0) * (1.0 - math.sqrt(1.0 - beta))


def boundary_unit(n: int, p: int, k: int) -> float:
    return math.sqrt(k * math.log(p) / n)


def boundary_rate(n: int, p: int, k: int) -> float:
    """Order of the minimax detection radius.

    ``min(p**0.25 / sqrt(n), n**-0.25)`` when ``k*k >= p`` (moderate sparsity),
    otherwise ``min(sqrt(k log p / n), n**-0.25)``.
    """
    if n < 2 or p < 2:
        raise DomainError("boundary_rate needs n >= 2 and p >= 2")
    if not 1 <= k <= p:
        raise DomainError(f"need 1 <= k <= p, got k={k}")
    dense_term = n ** -0.25
    if k * k >= p:
        return min(p ** 0.25 / math.sqrt(n), dense_term)
    return min(boundary_unit(n, p, k), dense_term)


def sharp_radius(n: int, p: int, beta: float) -> float:
    """phi(beta) * sqrt(k log p / n) with k = round(p**(1 - beta))."""
    phi = phi_boundary(beta)
    return phi * boundary_unit(n, p, k_from_beta(p, beta))


def hc_detection_threshold(p: int, a: float = 0.1) -> float:
    """(1 + a) sqrt(2 log log p), the rejection level of the HC test."""
    if p < 3:
        raise DomainError("the HC threshold needs p >= 3")
    if not a > 0:
        raise DomainError("HC margin a must be positive")
    return (1.0 + a) * math.sqrt(2.0 * math.log(math.log(p)))


@dataclass(frozen=True)
class RegimeReport:
    beta: float
    k: int
    regime: str
    sharp_constant_applicable: bool
    sharp_condition_ratio: float
    unknown_variance_ratio: float
    unknown_variance_detectable: bool
    boundary_rate: float
    phi: float | None = None
    sharp_radius: float | None = None

    def as_dict(self) -> dict:
        out = asdict(self)
        if self.phi is None:
            del out["phi"]
        if self.sharp_radius is None:
            del out["sharp_radius"]
        return out


def classify_regime(cfg: ProblemConfig,
                    sharp_threshold: float = SHARP_RATIO_THRESHOLD,
                    unknown_threshold: float = UNKNOWN_VARIANCE_RATIO_THRESHOLD) -> RegimeReport:
    """Place a configuration in the moderate/high sparsity picture.

    beta = 1/2 counts as moderately sparse.  The sharp constant is flagged
    applicable when beta > 1/2 and ``k log p / sqrt(n) <= sharp_threshold``;
    with unknown variance, detectability requires ``k log p / n <= unknown_threshold``.
    """
    n, p, k = cfg.n, cfg.p, cfg.k
    beta = cfg.effective_beta
    log_p = math.log(p)
    sharp_ratio = k * log_p / math.sqrt(n)
    unknown_ratio = k * log_p / n
    highly = beta > 0.5
    phi = radius = None
    if highly:
        phi = phi_boundary(beta)
        radius = phi * boundary_unit(n, p, k)
    detectable = True if cfg.variance_known else unknown_ratio <= unknown_threshold
    return RegimeReport(
        beta=beta,
        k=k,
        regime="highly_sparse" if highly else "moderately_sparse",
        sharp_constant_applicable=highly and sharp_ratio <= sharp_threshold,
        sharp_condition_ratio=sharp_ratio,
        unknown_variance_ratio=unknown_ratio,
        unknown_variance_detectable=detectable,
        boundary_rate=boundary_rate(n, p, k),
        phi=phi,
        sharp_radius=radius,
    )
