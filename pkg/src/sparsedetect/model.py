"""Domain types for the sparse regression detection problem.

Observations follow ``Y = X @ theta + sigma * xi`` with ``xi ~ N(0, I_n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AlternativeSpec",
    "Dataset",
    "DomainError",
    "ProblemConfig",
    "SparseSignal",
    "TestDecision",
    "k_from_beta",
    "place_signal",
]


class DomainError(ValueError):
    """Raised when an input lies outside the domain of an operation."""


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2 or y.ndim != 1:
            raise DomainError("x must be n-by-p and y a length-n vector")
        if x.shape[0] != y.shape[0]:
            raise DomainError(f"x has {x.shape[0]} rows but y has length {y.shape[0]}")
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise DomainError("need n >= 1 and p >= 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class SparseSignal:
    """Coefficient vector together with its support and Euclidean norm."""

    coefficients: np.ndarray
    support: np.ndarray = field(init=False)
    norm: float = field(init=False)

    def __post_init__(self):
        coef = np.array(self.coefficients, dtype=float)
        coef.setflags(write=False)
        support = np.flatnonzero(coef)
        support.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "norm", float(np.linalg.norm(coef)))

    @property
    def p(self) -> int:
        return self.coefficients.shape[0]

    @property
    def sparsity(self) -> int:
        """Number of nonzero coordinates, M(theta)."""
        return int(self.support.size)

    @classmethod
    def zero(cls, p: int) -> "SparseSignal":
        return cls(np.zeros(p))


@dataclass(frozen=True)
class AlternativeSpec:
    p: int
    k: int
    r: float

    def __post_init__(self):
        if self.p < 1:
            raise DomainError("p must be at least 1")
        if not 1 <= self.k <= self.p:
            raise DomainError(f"need 1 <= k <= p, got k={self.k}, p={self.p}")
        if not self.r >= 0:
            raise DomainError("separation radius must be nonnegative")


def k_from_beta(p: int, beta: float) -> int:
    """Sparsity ``round(p**(1 - beta))`` with half-up rounding, clamped to [1, p]."""
    if not 0.0 < beta < 1.0:
        raise DomainError(f"sparsity index must lie in (0, 1), got {beta}")
    k = math.floor(p ** (1.0 - beta) + 0.5)
    return min(max(k, 1), p)


@dataclass(frozen=True)
class ProblemConfig:
    """Resolved parameters of one detection problem.

    Give exactly one of ``k``/``beta`` and at least one of ``r``/``x``; the
    missing members are filled in.  When both ``r`` and ``x`` are given they
    must agree through ``r = x * sqrt(k log p / n)``.
    """

    n: int
    p: int
    k: int | None = None
    beta: float | None = None
    r: float | None = None
    x: float | None = None
    sigma: float = 1.0
    variance_known: bool = True
    design: str = "gaussian_iid"
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise DomainError("need n >= 1 and p >= 1")
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")
        k, beta = self.k, self.beta
        if k is None and beta is None:
            raise DomainError("one of k or beta is required")
        if beta is not None:
            k_beta = k_from_beta(self.p, beta)
            if k is not None and k != k_beta:
                raise DomainError(f"k={k} disagrees with beta={beta} (k={k_beta})")
            k = k_beta
        if not 1 <= k <= self.p:
            raise DomainError(f"need 1 <= k <= p, got k={k}")
        object.__setattr__(self, "k", int(k))

        unit = self.boundary_unit
        r, x = self.r, self.x
        if r is None and x is None:
            raise DomainError("one of r or x is required")
        if r is None:
            r = x * unit
        elif x is None:
            x = r / unit if unit > 0 else math.inf
        elif abs(r - x * unit) > 1e-12 * max(1.0, abs(r)):
            raise DomainError(f"r={r} and x={x} are inconsistent (x implies r={x * unit})")
        if r < 0:
            raise DomainError("separation radius must be nonnegative")
        object.__setattr__(self, "r", float(r))
        object.__setattr__(self, "x", float(x))

    @property
    def boundary_unit(self) -> float:
        """sqrt(k log p / n), the scale in which the intensity x is measured."""
        return math.sqrt(self.k * math.log(self.p) / self.n)

    @property
    def effective_beta(self) -> float:
        """beta if given, else the exponent solving k = p**(1 - beta)."""
        if self.beta is not None:
            return self.beta
        if self.p < 2:
            return 0.0
        return 1.0 - math.log(self.k) / math.log(self.p)

    def alternative(self) -> AlternativeSpec:
        return AlternativeSpec(self.p, self.k, self.r)


@dataclass(frozen=True)
class TestDecision:
    statistic_value: float
    threshold: float
    reject: bool
    test_name: str
    components: tuple["TestDecision", ...] = ()

    __test__ = False  # keep pytest from collecting this class

    @classmethod
    def from_threshold(cls, name: str, value: float, threshold: float) -> "TestDecision":
        # a -inf statistic is the empty-index sentinel and never rejects
        reject = bool(value > threshold) and value != -math.inf
        return cls(float(value), float(threshold), reject, name)


def place_signal(spec: AlternativeSpec, rng: np.random.Generator,
                 signs: str | np.ndarray = "random") -> SparseSignal:
    """Boundary alternative with ``k`` equal-magnitude entries of size r/sqrt(k).

    The support is a uniformly random k-subset.  ``signs`` is ``"random"``
    (independent fair signs), ``"positive"``, or an explicit array of k signs.
    """
    p, k = spec.p, spec.k
    if k > p:
        raise DomainError("k exceeds p")
    support = rng.choice(p, size=k, replace=False)
    if isinstance(signs, str):
        if signs == "random":
            sgn = rng.choice(np.array([-1.0, 1.0]), size=k)
        elif signs == "positive":
            sgn = np.ones(k)
        else:
            raise DomainError(f"unknown sign pattern {signs!r}")
    else:
        sgn = np.asarray(signs, dtype=float)
        if sgn.shape != (k,) or not np.all(np.abs(sgn) == 1):
            raise DomainError("explicit signs must be k values in {-1, +1}")
    coef = np.zeros(p)
    coef[support] = sgn * (spec.r / math.sqrt(k))
    return SparseSignal(coef)
