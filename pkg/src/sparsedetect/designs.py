"""Random design matrices with independent, centred, unit-variance entries."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DomainError

__all__ = ["DESIGN_FAMILIES", "DesignDiagnostics", "assumption_diagnostics", "sample_design",
           "resolve_family"]

DESIGN_FAMILIES = ("gaussian_iid", "rademacher_iid", "uniform_iid")

_ALIASES = {
    "gaussian": "gaussian_iid",
    "rademacher": "rademacher_iid",
    "uniform": "uniform_iid",
}

_SQRT3 = math.sqrt(3.0)


def resolve_family(kind: str) -> str:
    kind = _ALIASES.get(kind, kind)
    if kind not in DESIGN_FAMILIES:
        raise DomainError(f"unknown design family {kind!r}; choose from {DESIGN_FAMILIES}")
    return kind


def sample_design(family: str, n: int, p: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an n-by-p matrix from ``family``.

    gaussian_iid gives N(0, 1) entries, rademacher_iid equiprobable +-1 and
    uniform_iid the uniform law on [-sqrt(3), sqrt(3)].
    """
    family = resolve_family(family)
    if n < 1 or p < 1:
        raise DomainError("need n >= 1 and p >= 1")
    if family == "gaussian_iid":
        return rng.standard_normal((n, p))
    if family == "rademacher_iid":
        return 2.0 * rng.integers(0, 2, size=(n, p), dtype=np.int8).astype(float) - 1.0
    return rng.uniform(-_SQRT3, _SQRT3, size=(n, p))


@dataclass(frozen=True)
class DesignDiagnostics:
    """Normalized finite-sample analogues of the column-norm and
    column-correlation conditions.  Smaller is better; no cutoff is implied."""

    column_norm_deviation: float
    max_cross_product: float
    max_fourth_moment: float

    def as_dict(self) -> dict:
        return {
            "column_norm_deviation": self.column_norm_deviation,
            "max_cross_product": self.max_cross_product,
            "max_fourth_moment": self.max_fourth_moment,
        }


def assumption_diagnostics(x: np.ndarray) -> DesignDiagnostics:
    """Diagnostics of a design matrix.

    Reports ``max_j | ||X_j||^2 - n | / s``, ``max_{j<l} |(X_j, X_l)| / s`` with
    ``s = sqrt(n * max(log p, 1))``, and the largest per-column empirical
    fourth moment.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise DomainError("design must be a 2-d array")
    n, p = x.shape
    scale = math.sqrt(n * max(math.log(p), 1.0)) if p > 1 else math.sqrt(n)
    gram = x.T @ x
    norm_dev = float(np.max(np.abs(np.diag(gram) - n))) / scale
    if p > 1:
        off = np.abs(gram[np.triu_indices(p, k=1)])
        cross = float(off.max()) / scale
    else:
        cross = 0.0
    fourth = float(np.max(np.mean(x ** 4, axis=0)))
    return DesignDiagnostics(norm_dev, cross, fourth)
