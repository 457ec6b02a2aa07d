"""Seeded Monte Carlo estimation of type I, type II and total error.

Every replication draws from its own Philox stream keyed by
``(seed, cell, arm, replication)``, where the cell key is built from
``(n, p, k, r)``.  Results therefore do not depend on the order in which
cells or replications are executed, nor on the number of worker threads.

Two samplers produce the data:

``full``
    draws the whole design X and the noise, then forms Y.
``reduced``
    gaussian designs only, for tests that use Y and the p-value profile but
    not t1.  Columns outside the support are independent of Y, so their
    projections ``(X_j, Y) / ||Y||`` are drawn directly as i.i.d. N(0, 1); only
    the k support columns are materialized.  The joint law of (Y, y_1..y_p)
    is the same as under ``full``.
"""
from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .decisions import TestSpec, decide, known_variance_error, needs_design, requires_known_variance
from .designs import resolve_family, sample_design
from .model import DomainError, ProblemConfig, SparseSignal, place_signal
from .statistics import PValueProfile

__all__ = [
    "CellResult",
    "SweepGrid",
    "UnknownVarianceReport",
    "binomial_stderr",
    "estimate_errors",
    "replication_rng",
    "run_arms",
    "run_sweep",
    "simulate_sample",
    "unknown_variance_sweep",
]

NULL_ARM, ALT_ARM, THETA_ARM = 0, 1, 2


def _float_key(value: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", float(value)))[0]


def cell_key(cfg: ProblemConfig) -> tuple[int, int, int, int]:
    return (cfg.n, cfg.p, cfg.k, _float_key(cfg.r))


def replication_rng(seed: int, cell: tuple[int, ...], arm: int, rep: int) -> np.random.Generator:
    """Counter-based stream for one replication."""
    seq = np.random.SeedSequence(seed & 0xFFFFFFFFFFFFFFFF, spawn_key=(*cell, arm, rep))
    return np.random.Generator(np.random.Philox(seq))


def binomial_stderr(hits: int, reps: int) -> float:
    """Wald standard error; Wilson one-sigma half-width when hits is 0 or reps."""
    phat = hits / reps
    if 0 < hits < reps:
        return math.sqrt(phat * (1.0 - phat) / reps)
    return math.sqrt(phat * (1.0 - phat) / reps + 1.0 / (4.0 * reps * reps)) / (1.0 + 1.0 / reps)


@dataclass(frozen=True)
class ReducedSample:
    """Response plus precomputed p-value profile, without the design."""

    y: np.ndarray
    profile: PValueProfile
    x: None = None


@dataclass(frozen=True)
class FullSample:
    x: np.ndarray
    y: np.ndarray
    profile: PValueProfile | None = None


def _choose_sampler(cfg: ProblemConfig, test: TestSpec, sampler: str) -> str:
    if sampler == "auto":
        if resolve_family(cfg.design) == "gaussian_iid" and not needs_design(test):
            return "reduced"
        return "full"
    if sampler == "reduced":
        if resolve_family(cfg.design) != "gaussian_iid":
            raise DomainError("the reduced sampler is exact only for gaussian designs")
        if needs_design(test):
            raise DomainError(f"{test.name} needs the full design matrix")
    elif sampler != "full":
        raise DomainError(f"unknown sampler {sampler!r}")
    return sampler


def _response(signal_part: np.ndarray, noise: np.ndarray, cfg: ProblemConfig) -> np.ndarray:
    # unknown variance: the alternative is sigma * theta observed with noise sigma
    if cfg.variance_known:
        return signal_part + cfg.sigma * noise
    return cfg.sigma * (signal_part + noise)


def simulate_sample(cfg: ProblemConfig, theta: SparseSignal | None, rng: np.random.Generator,
                    sampler: str = "full"):
    """One dataset under ``theta`` (None means the null)."""
    n, p = cfg.n, cfg.p
    if sampler == "reduced":
        support = np.empty(0, dtype=int) if theta is None else theta.support
        xs = rng.standard_normal((n, support.size))
        noise = rng.standard_normal(n)
        signal = xs @ theta.coefficients[support] if support.size else np.zeros(n)
        y = _response(signal, noise, cfg)
        norm = float(np.linalg.norm(y))
        proj = np.empty(p)
        rest = np.ones(p, dtype=bool)
        rest[support] = False
        proj[rest] = rng.standard_normal(p - support.size)
        proj[support] = xs.T @ y / norm
        return ReducedSample(y, PValueProfile.from_y(proj))
    x = sample_design(cfg.design, n, p, rng)
    noise = rng.standard_normal(n)
    signal = np.zeros(n) if theta is None else x[:, theta.support] @ theta.coefficients[theta.support]
    return FullSample(x, _response(signal, noise, cfg))


def _one(cfg, test, arm, rep, sampler, theta_fixed, calibrated):
    rng = replication_rng(cfg.seed, cell_key(cfg), arm, rep)
    theta = None
    if arm == ALT_ARM:
        theta = theta_fixed if theta_fixed is not None else place_signal(cfg.alternative(), rng)
    sample = simulate_sample(cfg, theta, rng, sampler)
    if calibrated:
        d = decide(sample, test, sigma=cfg.sigma, variance_known=cfg.variance_known, r=cfg.r)
    else:
        d = decide(sample, test, r=cfg.r)
    return d.reject, d.statistic_value


def run_arms(cfg: ProblemConfig, test: TestSpec, reps: int, *, threads: int = 1,
             sampler: str = "auto", fixed_theta: bool = False, calibrated: bool = True,
             executor: ThreadPoolExecutor | None = None) -> dict:
    """Per-replication decisions and statistics for both arms.

    Returns a dict with boolean arrays ``null_reject``/``alt_reject`` and
    float arrays ``null_stat``/``alt_stat``.  ``calibrated=False`` evaluates
    the test on the raw response as if sigma were 1, even when the variance
    is unknown.
    """
    if reps < 1:
        raise DomainError("reps must be at least 1")
    if calibrated and not cfg.variance_known and requires_known_variance(test):
        raise known_variance_error(test)
    sampler = _choose_sampler(cfg, test, sampler)
    theta_fixed = None
    if fixed_theta:
        theta_fixed = place_signal(cfg.alternative(), replication_rng(cfg.seed, cell_key(cfg), THETA_ARM, 0))

    def chunk(arm, lo, hi):
        return [_one(cfg, test, arm, i, sampler, theta_fixed, calibrated) for i in range(lo, hi)]

    out = {}
    own = executor is None and threads > 1
    pool = ThreadPoolExecutor(max_workers=threads) if own else executor
    try:
        for arm, label in ((NULL_ARM, "null"), (ALT_ARM, "alt")):
            if pool is None:
                rows = chunk(arm, 0, reps)
            else:
                size = max(1, math.ceil(reps / 32))
                futures = [pool.submit(chunk, arm, lo, min(lo + size, reps))
                           for lo in range(0, reps, size)]
                rows = [row for f in futures for row in f.result()]
            out[f"{label}_reject"] = np.array([r for r, _ in rows], dtype=bool)
            out[f"{label}_stat"] = np.array([s for _, s in rows], dtype=float)
    finally:
        if own:
            pool.shutdown()
    return out


@dataclass(frozen=True)
class CellResult:
    beta: float
    x: float
    alpha_hat: float
    beta_hat: float
    gamma_hat: float
    stderr_alpha: float
    stderr_beta: float
    n: int = 0
    p: int = 0
    k: int = 0
    test: str = ""
    reps: int = 0
    seed: int = 0

    @property
    def stderr_gamma(self) -> float:
        return math.hypot(self.stderr_alpha, self.stderr_beta)


def _cell_from_arms(cfg: ProblemConfig, test: TestSpec, reps: int, arms: dict) -> CellResult:
    null_hits = int(arms["null_reject"].sum())
    alt_misses = int((~arms["alt_reject"]).sum())
    alpha_hat = null_hits / reps
    beta_hat = alt_misses / reps
    return CellResult(
        beta=cfg.effective_beta, x=cfg.x,
        alpha_hat=alpha_hat, beta_hat=beta_hat, gamma_hat=alpha_hat + beta_hat,
        stderr_alpha=binomial_stderr(null_hits, reps), stderr_beta=binomial_stderr(alt_misses, reps),
        n=cfg.n, p=cfg.p, k=cfg.k, test=test.name, reps=reps, seed=cfg.seed,
    )


def estimate_errors(cfg: ProblemConfig, test: TestSpec, reps: int, *, threads: int = 1,
                    sampler: str = "auto", fixed_theta: bool = False) -> CellResult:
    """Estimate alpha, beta and gamma of ``test`` at ``cfg``.

    Each alternative replication draws a fresh boundary signal (uniform
    support, random signs, magnitude r / sqrt(k)) unless ``fixed_theta``.
    """
    arms = run_arms(cfg, test, reps, threads=threads, sampler=sampler, fixed_theta=fixed_theta)
    return _cell_from_arms(cfg, test, reps, arms)


@dataclass(frozen=True)
class SweepGrid:
    beta_values: tuple[float, ...]
    x_values: tuple[float, ...]
    n: int
    p: int
    reps_per_cell: int
    base_seed: int = 0
    design: str = "gaussian_iid"
    sigma: float = 1.0
    variance_known: bool = True

    def __post_init__(self):
        for label, values in (("beta", self.beta_values), ("x", self.x_values)):
            values = tuple(float(v) for v in values)
            if not values:
                raise DomainError(f"{label} grid is empty")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise DomainError(f"{label} grid must be strictly increasing")
            object.__setattr__(self, f"{label}_values", values)
        if any(not 0.0 < b < 1.0 for b in self.beta_values):
            raise DomainError("beta values must lie in (0, 1)")
        if any(not x > 0.0 for x in self.x_values):
            raise DomainError("x values must be positive")
        if self.reps_per_cell < 1:
            raise DomainError("reps_per_cell must be at least 1")

    def config(self, beta: float, x: float, **changes) -> ProblemConfig:
        base = dict(n=self.n, p=self.p, beta=beta, x=x, sigma=self.sigma,
                    variance_known=self.variance_known, design=self.design, seed=self.base_seed)
        base.update(changes)
        return ProblemConfig(**base)

    def cells(self) -> list[tuple[float, float]]:
        return [(b, x) for b in self.beta_values for x in self.x_values]


def run_sweep(grid: SweepGrid, test: TestSpec, *, threads: int = 1, sampler: str = "auto",
              cells: list[tuple[float, float]] | None = None) -> list[CellResult]:
    """One CellResult per (beta, x) cell, in grid order unless ``cells`` says otherwise."""
    todo = grid.cells() if cells is None else list(cells)
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        results = []
        for beta, x in todo:
            cfg = grid.config(beta, x)
            arms = run_arms(cfg, test, grid.reps_per_cell, sampler=sampler, executor=pool)
            results.append(_cell_from_arms(cfg, test, grid.reps_per_cell, arms))
        return results
    finally:
        if pool is not None:
            pool.shutdown()


@dataclass
class UnknownVarianceReport:
    """Cells per sigma and whether decisions moved with sigma at matched seeds."""

    test: str
    sigma_values: tuple[float, ...]
    cells: dict = field(default_factory=dict)
    decisions: dict = field(default_factory=dict)
    statistics: dict = field(default_factory=dict)
    sigma_sensitive: bool = False
    max_statistic_gap: float = 0.0


def unknown_variance_sweep(grid: SweepGrid, sigma_values, test: TestSpec | None = None, *,
                           threads: int = 1, sampler: str = "auto") -> UnknownVarianceReport:
    """Rerun the grid with noise sd sigma and alternatives sigma * theta.

    Seeds are matched across sigma, so a scale-free test gives identical
    decisions.  Tests calibrated for unit variance are evaluated on the raw
    response and flagged when their decisions change with sigma.
    """
    test = TestSpec("psi_hc") if test is None else test
    sigmas = tuple(float(s) for s in sigma_values)
    if not sigmas or any(not s > 0 for s in sigmas):
        raise DomainError("sigma values must be positive")
    report = UnknownVarianceReport(test.name, sigmas)
    calibrated = not requires_known_variance(test)
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for sigma in sigmas:
            cells, decisions, stats = [], [], []
            for beta, x in grid.cells():
                cfg = grid.config(beta, x, sigma=sigma, variance_known=False)
                arms = run_arms(cfg, test, grid.reps_per_cell, sampler=sampler,
                                calibrated=calibrated, executor=pool)
                cells.append(_cell_from_arms(cfg, test, grid.reps_per_cell, arms))
                decisions.append(np.concatenate([arms["null_reject"], arms["alt_reject"]]))
                stats.append(np.concatenate([arms["null_stat"], arms["alt_stat"]]))
            report.cells[sigma] = cells
            report.decisions[sigma] = np.concatenate(decisions)
            report.statistics[sigma] = np.concatenate(stats)
    finally:
        if pool is not None:
            pool.shutdown()
    ref = sigmas[0]
    for sigma in sigmas[1:]:
        if not np.array_equal(report.decisions[sigma], report.decisions[ref]):
            report.sigma_sensitive = True
        a, b = report.statistics[sigma], report.statistics[ref]
        with np.errstate(invalid="ignore"):
            gap = np.where(a == b, 0.0, np.abs(a - b))
        report.max_statistic_gap = max(report.max_statistic_gap, float(np.max(gap, initial=0.0)))
    return report
