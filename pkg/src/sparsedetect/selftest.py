"""Fast invariant checks run by ``sparsedetect selftest``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import boundary, lowerbound, numerics, statistics
from .model import Dataset

# Phi(t) to 20 digits, from an arbitrary-precision evaluation
_CDF_REFERENCE = (
    (-37.0, 5.7255712225245768227e-300),
    (-20.0, 2.7536241186062336951e-89),
    (-8.0, 6.2209605742717841235e-16),
    (-3.0, 0.0013498980316300945267),
    (-0.5, 0.30853753872598689636),
    (0.0, 0.5),
    (0.3, 0.61791142218895263307),
    (1.0, 0.84134474606854294859),
    (2.5, 0.99379033467422386483),
    (6.0, 0.99999999901341235496),
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def check_cdf():
    worst = 0.0
    for t, ref in _CDF_REFERENCE:
        got = numerics.std_normal_cdf(t)
        err = abs(got - ref) if abs(t) <= 8 else abs(got / ref - 1.0)
        worst = max(worst, err)
    return worst <= 1e-13, f"max error {worst:.3g}"


def check_quantile():
    ts = np.linspace(-6, 6, 241)
    back = numerics.std_normal_quantile(numerics.std_normal_cdf(ts))
    err = float(np.max(np.abs(back - ts)))
    return err <= 1e-8, f"max round-trip error {err:.3g}"


def check_phi():
    a = boundary.phi_boundary(0.75)
    b = math.sqrt(2.0) * (1.0 - math.sqrt(0.25))
    ok = abs(a - math.sqrt(0.5)) <= 1e-12 and abs(a - b) <= 1e-12
    return ok, f"phi(0.75)={a!r}"


def check_closed_forms():
    t0 = statistics.t0_statistic([2.0, 0.0])
    data = Dataset(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]), np.array([1.0, 2.0, 3.0]))
    t1 = statistics.t1_statistic(data)
    prof = statistics.PValueProfile(np.zeros(4), np.array([0.01, 0.2, 0.4, 0.9]),
                                    np.array([0.01, 0.2, 0.4, 0.9]), np.arange(4))
    hc = statistics.hc_statistic(prof)
    ok = (abs(t0 - 1.0) < 1e-12 and abs(t1 - 9.0 / math.sqrt(6.0)) < 1e-12
          and abs(hc - 0.48 / math.sqrt(0.0099)) < 1e-12)
    return ok, f"t0={t0!r} t1={t1!r} hc={hc!r}"


def check_scale_invariance():
    rng = np.random.default_rng(20240101)
    x = rng.standard_normal((60, 40))
    y = rng.standard_normal(60) + x[:, :3].sum(axis=1) * 0.3
    base = statistics.hc_statistic(statistics.pvalue_profile(Dataset(x, y)))
    worst = 0.0
    for c in (1e-3, 0.1, 7.0, 1e4):
        other = statistics.hc_statistic(statistics.pvalue_profile(Dataset(x, c * y)))
        worst = max(worst, abs(other - base))
    return worst <= 1e-12, f"max |t_hc difference| {worst:.3g}"


def check_t1_forms():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        n, p = int(rng.integers(2, 15)), int(rng.integers(1, 8))
        data = Dataset(rng.standard_normal((n, p)), rng.standard_normal(n))
        fast, slow = statistics.t1_statistic(data), statistics.t1_pairwise(data)
        worst = max(worst, abs(fast - slow) / max(1.0, abs(slow)))
    return worst <= 1e-10, f"max relative gap {worst:.3g}"


def check_martingale():
    rng = np.random.default_rng(11)
    prior = lowerbound.ThreePointPrior.from_radius(p=4, k=2, r=0.4, c=0.9)
    vals = []
    for _ in range(2000):
        data = Dataset(rng.standard_normal((20, 4)), rng.standard_normal(20))
        vals.append(lowerbound.likelihood_ratio_exact(data, prior))
    vals = np.asarray(vals)
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    z = (vals.mean() - 1.0) / se
    return abs(z) <= 4.0, f"mean {vals.mean():.4f}, z={z:.2f}"


def check_threshold_identity():
    rng = np.random.default_rng(3)
    worst = 0.0
    for a, h in zip(rng.uniform(0.1, 5, 50), rng.uniform(1e-4, 0.9, 50)):
        t = lowerbound.threshold_tj(a, h)
        worst = max(worst, abs(a * t - a * a / 2 - math.log(1 / h)))
    return worst <= 1e-12, f"max identity gap {worst:.3g}"


CHECKS = (
    ("std_normal_cdf", check_cdf),
    ("std_normal_quantile", check_quantile),
    ("phi_boundary", check_phi),
    ("closed_form_statistics", check_closed_forms),
    ("hc_scale_invariance", check_scale_invariance),
    ("t1_pairwise_equivalence", check_t1_forms),
    ("likelihood_ratio_martingale", check_martingale),
    ("threshold_identity", check_threshold_identity),
)


def run_selftest() -> list[CheckResult]:
    results = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail))
    return results
