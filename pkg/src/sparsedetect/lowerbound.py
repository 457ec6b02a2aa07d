"""Least-favorable priors, exact likelihood ratios and a Bayes-risk oracle.

For a prior ``pi`` on theta and known unit noise, the likelihood ratio of the
mixture against the null is

    L_pi(Z) = E_pi exp(-||X theta||^2 / 2 + (X theta, Y)),

which for small p is evaluated exactly by enumerating every support/sign
pattern of the prior.  The Bayes-optimal total error between P_0 and P_pi
equals ``E_0 min(1, L_pi)``, which the oracle estimates by Monte Carlo under
the null.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .designs import sample_design
from .model import Dataset, DomainError, ProblemConfig, SparseSignal

__all__ = [
    "EXACT_P_MAX",
    "SUPPORT_ENUMERATION_MAX",
    "EqualMagnitudePrior",
    "OracleEstimate",
    "ThreePointPrior",
    "UniformSupportPrior",
    "bayes_risk_oracle",
    "likelihood_ratio_exact",
    "likelihood_ratio_product",
    "likelihood_ratio_unknown_variance",
    "log_likelihood_ratio_exact",
    "sample_three_point",
    "threshold_tj",
    "unknown_variance_mixture",
]

EXACT_P_MAX = 12
SUPPORT_ENUMERATION_MAX = 10_000
_BLOCK_ROWS = 1 << 16


class ResourceError(DomainError):
    """The requested exact computation exceeds the enumeration limit."""


@dataclass(frozen=True)
class ThreePointPrior:
    """Independent coordinates equal to 0 w.p. 1 - h and +-b w.p. h/2 each.

    ``h = 0`` or ``b = 0`` give the degenerate prior concentrated at zero.
    """

    p: int
    h: float
    b: float
    c: float | None = None

    def __post_init__(self):
        if self.p < 1:
            raise DomainError("p must be at least 1")
        if not 0.0 <= self.h < 1.0:
            raise DomainError(f"atom mass h must lie in [0, 1), got {self.h}")
        if not self.b >= 0.0:
            raise DomainError("atom magnitude b must be nonnegative")

    @classmethod
    def from_radius(cls, p: int, k: int, r: float, c: float = 0.9) -> "ThreePointPrior":
        """h = c k / p and b = r / (c sqrt(k))."""
        if not 0.0 < c < 1.0:
            raise DomainError("c must lie in (0, 1)")
        if not 1 <= k <= p:
            raise DomainError(f"need 1 <= k <= p, got k={k}")
        return cls(p, c * k / p, r / (c * math.sqrt(k)), c)

    @property
    def degenerate(self) -> bool:
        return self.h == 0.0 or self.b == 0.0


@dataclass(frozen=True)
class UniformSupportPrior:
    """theta = b on a uniformly drawn k-subset, paired with noise variance 1 - k b^2."""

    p: int
    k: int
    b: float

    def __post_init__(self):
        if not 1 <= self.k <= self.p:
            raise DomainError(f"need 1 <= k <= p, got k={self.k}")
        if not self.b >= 0.0:
            raise DomainError("b must be nonnegative")
        if not self.k * self.b ** 2 < 1.0:
            raise DomainError("need k b^2 < 1 so that the noise variance stays positive")

    @classmethod
    def from_radius(cls, p: int, k: int, r: float, c: float = 1.0) -> "UniformSupportPrior":
        return cls(p, k, r / (c * math.sqrt(k)))

    @property
    def variance_shrink(self) -> float:
        return 1.0 - self.k * self.b ** 2


@dataclass(frozen=True)
class EqualMagnitudePrior:
    """Law of the boundary alternatives used by the simulator: a uniform
    k-subset, independent fair signs, magnitude r / sqrt(k)."""

    p: int
    k: int
    r: float

    def __post_init__(self):
        if not 1 <= self.k <= self.p:
            raise DomainError(f"need 1 <= k <= p, got k={self.k}")
        if not self.r >= 0.0:
            raise DomainError("r must be nonnegative")


def sample_three_point(prior: ThreePointPrior, rng: np.random.Generator) -> SparseSignal:
    u = rng.random(prior.p)
    eps = np.where(u < prior.h / 2.0, -1.0, np.where(u < prior.h, 1.0, 0.0))
    return SparseSignal(prior.b * eps)


def threshold_tj(a_j: float, h: float) -> float:
    """a_j / 2 + log(1/h) / a_j, the point where h exp(a_j T - a_j^2 / 2) = 1."""
    if not a_j > 0:
        raise DomainError("a_j must be positive")
    if not 0.0 < h < 1.0:
        raise DomainError("h must lie in (0, 1)")
    return a_j / 2.0 + math.log(1.0 / h) / a_j


def _exp(log_value: float) -> float:
    # overflow to inf rather than raising
    with np.errstate(over="ignore"):
        return float(np.exp(log_value))


@lru_cache(maxsize=16)
def _ternary_patterns(p: int) -> np.ndarray:
    pats = np.array(list(itertools.product((0, 1, -1), repeat=p)), dtype=np.int8)
    pats.setflags(write=False)
    return pats


def _patterns(prior) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient patterns (rows) and their log prior weights."""
    if isinstance(prior, ThreePointPrior):
        if prior.p > EXACT_P_MAX:
            raise ResourceError(f"exact enumeration needs p <= {EXACT_P_MAX}, got p={prior.p}")
        eps = _ternary_patterns(prior.p)
        nonzero = np.count_nonzero(eps, axis=1)
        log_zero = math.log1p(-prior.h)
        log_atom = math.log(prior.h / 2.0) if prior.h > 0 else -math.inf
        with np.errstate(invalid="ignore"):
            logw = (prior.p - nonzero) * log_zero + np.where(nonzero > 0, nonzero * log_atom, 0.0)
        return prior.b * eps.astype(float), logw
    if isinstance(prior, EqualMagnitudePrior):
        count = math.comb(prior.p, prior.k) * 2 ** prior.k
        if count > 3 ** EXACT_P_MAX:
            raise ResourceError(f"{count} patterns exceed the enumeration limit")
        mag = prior.r / math.sqrt(prior.k)
        rows = []
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=prior.k)))
        for support in itertools.combinations(range(prior.p), prior.k):
            block = np.zeros((signs.shape[0], prior.p))
            block[:, support] = signs * mag
            rows.append(block)
        pats = np.vstack(rows)
        return pats, np.full(pats.shape[0], -math.log(count))
    raise DomainError(f"no exact enumeration for prior {type(prior).__name__}")


def _log_mixture(gram: np.ndarray, cross: np.ndarray, pats: np.ndarray, logw: np.ndarray,
                 block_rows: int = _BLOCK_ROWS) -> float:
    parts = []
    for start in range(0, pats.shape[0], block_rows):
        th = pats[start:start + block_rows]
        quad = np.einsum("ij,ij->i", th @ gram, th)
        parts.append(logsumexp(logw[start:start + block_rows] + th @ cross - 0.5 * quad))
    return float(logsumexp(parts))


def log_likelihood_ratio_exact(data: Dataset, prior, block_rows: int = _BLOCK_ROWS) -> float:
    """log L_pi(Z) by exhaustive enumeration, reduced blockwise with log-sum-exp."""
    if data.p != prior.p:
        raise DomainError(f"prior has p={prior.p} but data has p={data.p}")
    pats, logw = _patterns(prior)
    return _log_mixture(data.x.T @ data.x, data.x.T @ data.y, pats, logw, block_rows)


def likelihood_ratio_exact(data: Dataset, prior) -> float:
    """L_pi(Z) for a three-point or equal-magnitude prior; at most 3^12 patterns."""
    return _exp(log_likelihood_ratio_exact(data, prior))


def likelihood_ratio_product(data: Dataset, prior: ThreePointPrior) -> float:
    """Product over columns of 1 - h + h exp(-b^2 ||X_j||^2 / 2) cosh(b (X_j, Y)).

    Equals L_pi exactly when the columns of X are orthogonal.
    """
    norms = np.sum(data.x ** 2, axis=0)
    cross = data.x.T @ data.y
    b, h = prior.b, prior.h
    log_cosh = np.logaddexp(b * cross, -b * cross) - math.log(2.0)
    log_terms = np.logaddexp(math.log1p(-h),
                             (math.log(h) if h > 0 else -math.inf) - 0.5 * b * b * norms + log_cosh)
    return _exp(np.sum(log_terms))


def _log_lm(norm_y2: float, cross: np.ndarray, gram: np.ndarray, n: int, b: float,
            k: int, supports: np.ndarray) -> np.ndarray:
    s = 1.0 - k * b * b
    lin = cross[supports].sum(axis=1)
    quad = gram[supports[:, :, None], supports[:, None, :]].sum(axis=(1, 2))
    return (-0.5 * n * math.log(s) - k * b * b * norm_y2 / (2.0 * s)
            + b * lin / s - b * b * quad / (2.0 * s))


def likelihood_ratio_unknown_variance(data: Dataset, prior: UniformSupportPrior,
                                      support) -> float:
    """L_m(Z) for one support m: density of N(X theta_m, (1 - k b^2) I) over N(0, I)."""
    support = np.asarray(sorted(support), dtype=int)
    if support.size != prior.k:
        raise DomainError(f"support must have {prior.k} indices")
    x, y = data.x, data.y
    val = _log_lm(float(y @ y), x.T @ y, x.T @ x, data.n, prior.b, prior.k, support[None, :])
    return _exp(val[0])


def unknown_variance_mixture(data: Dataset, prior: UniformSupportPrior,
                             rng: np.random.Generator | None = None,
                             max_supports: int = SUPPORT_ENUMERATION_MAX,
                             log: bool = False) -> tuple[float, bool]:
    """Average of L_m over supports.

    Exact when C(p, k) <= ``max_supports``; otherwise an average over
    ``max_supports`` uniformly drawn supports.  Returns ``(value, exact)``.
    """
    p, k = prior.p, prior.k
    total = math.comb(p, k)
    exact = total <= max_supports
    if exact:
        supports = np.array(list(itertools.combinations(range(p), k)), dtype=int)
    else:
        if rng is None:
            raise DomainError("sampling supports requires an rng")
        supports = np.sort(np.array([rng.choice(p, size=k, replace=False)
                                     for _ in range(max_supports)]), axis=1)
    x, y = data.x, data.y
    logs = _log_lm(float(y @ y), x.T @ y, x.T @ x, data.n, prior.b, k, supports)
    value = float(logsumexp(logs) - math.log(supports.shape[0]))
    return (value if log else _exp(value)), exact


@dataclass(frozen=True)
class OracleEstimate:
    gamma: float
    stderr: float
    reps: int
    prior: object

    def prior_parameters(self) -> dict:
        return {"kind": type(self.prior).__name__, **self.prior.__dict__}


def _is_degenerate(prior) -> bool:
    if isinstance(prior, ThreePointPrior):
        return prior.degenerate
    if isinstance(prior, EqualMagnitudePrior):
        return prior.r == 0.0
    return prior.b == 0.0


def make_prior(cfg: ProblemConfig, kind: str = "three_point", c: float | None = None):
    if kind == "three_point":
        return ThreePointPrior.from_radius(cfg.p, cfg.k, cfg.r, 0.9 if c is None else c)
    if kind == "boundary":
        return EqualMagnitudePrior(cfg.p, cfg.k, cfg.r)
    if kind == "uniform_support":
        return UniformSupportPrior.from_radius(cfg.p, cfg.k, cfg.r, 1.0 if c is None else c)
    raise DomainError(f"unknown prior {kind!r}")


def bayes_risk_oracle(cfg: ProblemConfig, prior="three_point", reps: int = 1000,
                      rng: np.random.Generator | None = None, c: float | None = None
                      ) -> OracleEstimate:
    """Monte Carlo estimate of the optimal total error between P_0 and P_pi.

    ``prior`` is a prior instance or one of ``"three_point"`` (default,
    c = 0.9), ``"boundary"`` (the simulator's alternative law) or
    ``"uniform_support"`` (mixture with shrunken noise variance).  The
    estimate is the null average of ``min(1, L_pi)``, which lies in [0, 1].
    """
    if reps < 2:
        raise DomainError("need at least two replications")
    if isinstance(prior, str):
        prior = make_prior(cfg, prior, c)
    if prior.p != cfg.p:
        raise DomainError("prior dimension does not match the configuration")
    if _is_degenerate(prior):
        return OracleEstimate(1.0, 0.0, reps, prior)
    rng = np.random.default_rng(cfg.seed) if rng is None else rng

    pats = logw = None
    if not isinstance(prior, UniformSupportPrior):
        pats, logw = _patterns(prior)
    elif math.comb(prior.p, prior.k) > SUPPORT_ENUMERATION_MAX:
        raise ResourceError("unknown-variance oracle requires exact support enumeration")

    mins = np.empty(reps)
    for i in range(reps):
        x = sample_design(cfg.design, cfg.n, cfg.p, rng)
        y = rng.standard_normal(cfg.n)
        if pats is not None:
            log_l = _log_mixture(x.T @ x, x.T @ y, pats, logw)
        else:
            log_l, _ = unknown_variance_mixture(Dataset(x, y), prior, log=True)
        mins[i] = math.exp(min(0.0, log_l))
    return OracleEstimate(float(mins.mean()), float(mins.std(ddof=1) / math.sqrt(reps)),
                          reps, prior)
