"""Test statistics computed from a dataset (X, Y).

t0 is the centred chi-square of the responses, t1 the degenerate
U-statistic with kernel ``p**-0.5 * Y_i Y_k <X_i., X_k.>``, and t_hc the
Higher Criticism of the two-sided p-values of ``y_j = (X_j, Y) / ||Y||``.
t_max, the sup-norm exceedance and L(u) are the auxiliary statistics that
bound t_hc from below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Dataset, DomainError
from .numerics import Q_MIN, std_normal_sf, two_sided_pvalue

__all__ = [
    "PValueProfile",
    "hc_statistic",
    "lu_statistic",
    "pvalue_profile",
    "t0_statistic",
    "t1_pairwise",
    "t1_statistic",
    "tmax_statistic",
    "ymax_exceeds",
]


def t0_statistic(y) -> float:
    """(2n)^(-1/2) * sum(Y_i^2 - 1), for unit noise variance."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise DomainError("t0 needs at least one response")
    n = y.size
    return float((np.dot(y, y) - n) / math.sqrt(2.0 * n))


def t1_statistic(data: Dataset) -> float:
    """U-statistic t1 in O(np) through column sums.

    Uses ``sum_{i<k} Y_i Y_k X_ij X_kj = ((sum_i Y_i X_ij)^2 - sum_i Y_i^2 X_ij^2) / 2``.
    """
    x, y = data.x, data.y
    n, p = x.shape
    if n < 2:
        raise DomainError("t1 needs n >= 2")
    s = x.T @ y
    q = (x * x).T @ (y * y)
    pairs = n * (n - 1) / 2.0
    return float(np.sum(s * s - q) / (2.0 * math.sqrt(p) * math.sqrt(pairs)))


def t1_pairwise(data: Dataset) -> float:
    """Direct O(n^2 p) double sum over pairs i < k; reference implementation."""
    x, y = data.x, data.y
    n, p = x.shape
    if n < 2:
        raise DomainError("t1 needs n >= 2")
    total = 0.0
    for i in range(n):
        for k in range(i + 1, n):
            total += y[i] * y[k] * float(np.dot(x[i], x[k])) / math.sqrt(p)
    return total / math.sqrt(n * (n - 1) / 2.0)


@dataclass(frozen=True)
class PValueProfile:
    """Projected responses y_j, their two-sided p-values and the sorted p-values.

    ``order[i]`` is the original column of the i-th smallest p-value; ties keep
    their original order.
    """

    y_values: np.ndarray
    q_values: np.ndarray
    q_sorted: np.ndarray
    order: np.ndarray

    @classmethod
    def from_y(cls, y_values, floor: float = Q_MIN) -> "PValueProfile":
        yv = np.asarray(y_values, dtype=float).ravel()
        q = np.atleast_1d(two_sided_pvalue(yv, floor=floor))
        order = np.argsort(q, kind="stable")
        return cls(yv, q, q[order], order)

    @property
    def p(self) -> int:
        return self.y_values.size


def pvalue_profile(data: Dataset) -> PValueProfile:
    """p-value profile of ``y_j = (X_j, Y) / ||Y||``.

    Raises ``DomainError`` for an all-zero response.
    """
    norm = float(np.linalg.norm(data.y))
    if norm == 0.0:
        raise DomainError("degenerate response: ||Y|| = 0")
    return PValueProfile.from_y(data.x.T @ data.y / norm)


def hc_statistic(profile: PValueProfile, cutoff: float = 0.5) -> float:
    """Higher Criticism over sorted p-values not exceeding ``cutoff``.

    Returns ``-inf`` when no p-value qualifies.
    """
    if not 0.0 < cutoff < 1.0:
        raise DomainError("HC cutoff must lie in (0, 1)")
    q = profile.q_sorted
    p = q.size
    m = int(np.searchsorted(q, cutoff, side="right"))
    if m == 0:
        return -math.inf
    qs = q[:m]
    ranks = np.arange(1, m + 1, dtype=float)
    terms = math.sqrt(p) * (ranks / p - qs) / np.sqrt(qs * (1.0 - qs))
    return float(terms.max())


def tmax_statistic(profile: PValueProfile) -> float:
    """(p q_(1))^(-1/2) - (p q_(1))^(1/2) from the smallest p-value."""
    pq = profile.p * float(profile.q_sorted[0])
    return 1.0 / math.sqrt(pq) - math.sqrt(pq)


def ymax_exceeds(profile: PValueProfile, p: int | None = None) -> bool:
    """True iff max_j |y_j| >= sqrt(2.5 log p); the boundary counts as exceeding."""
    p = profile.p if p is None else p
    if p < 2:
        raise DomainError("the sup-norm threshold needs p >= 2")
    return bool(np.max(np.abs(profile.y_values)) >= math.sqrt(2.5 * math.log(p)))


def lu_statistic(profile: PValueProfile, u: float, p: int | None = None) -> float:
    """Standardized count of |y_j| above u * sqrt(log p)."""
    p = profile.p if p is None else p
    if not u > 0:
        raise DomainError("u must be positive")
    if p < 2:
        raise DomainError("L(u) needs p >= 2")
    level = u * math.sqrt(math.log(p))
    tail = std_normal_sf(level)
    count = int(np.count_nonzero(np.abs(profile.y_values) > level))
    return (count - 2.0 * p * tail) / math.sqrt(2.0 * p * tail)
