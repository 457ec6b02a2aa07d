import math

import numpy as np
import pytest

from sparsedetect.decisions import (
    TEST_NAMES,
    TestSpec,
    critical_value,
    decide,
    decide_combined,
    decide_psi0_T,
    decide_psi0_alpha,
    decide_psi1_alpha,
    decide_psi_hc,
    decide_psi_max,
    needs_design,
    requires_known_variance,
)
from sparsedetect.model import Dataset, DomainError, ProblemConfig
from sparsedetect.montecarlo import estimate_errors, replication_rng, simulate_sample


def gaussian_data(n, p, seed, signal=0.0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    y = rng.standard_normal(n) + signal * x[:, 0]
    return Dataset(x, y)


def test_psi0_alpha_examples():
    assert not decide_psi0_alpha(Dataset(np.ones((10, 2)), np.zeros(10)), 0.05).reject
    # t0 = (sum y^2 - n) / sqrt(2n) = 10 with n = 2: sum y^2 = 22
    y = np.array([math.sqrt(22.0), 0.0])
    d = decide_psi0_alpha(Dataset(np.ones((2, 1)), y), 0.05)
    assert d.statistic_value == pytest.approx(10.0) and d.reject
    assert d.threshold == pytest.approx(1.6448536269514727, abs=1e-14)


def test_psi0_T_examples():
    d = decide_psi0_T(Dataset(np.ones((100, 1)), np.zeros(100)), r=1.0)
    assert d.threshold == 5.0 and not d.reject
    for r in (0.01, 1.0, 10.0):
        assert not decide_psi0_T(Dataset(np.ones((100, 1)), np.zeros(100)), r=r).reject
    with pytest.raises(DomainError):
        decide_psi0_T(Dataset(np.ones((100, 1)), np.zeros(100)), r=0.0)


def test_psi1_examples():
    assert not decide_psi1_alpha(Dataset(np.ones((5, 3)), np.zeros(5)), 0.05).reject
    with pytest.raises(DomainError):
        decide_psi1_alpha(Dataset(np.ones((1, 3)), np.ones(1)), 0.05)


def test_hc_examples():
    with pytest.raises(DomainError):
        decide_psi_hc(gaussian_data(20, 2, 0))
    # every p-value equal to 1 exceeds the cutoff
    x = np.zeros((4, 5))
    x[0, :] = 1.0
    y = np.array([0.0, 1.0, 0.0, 0.0])
    d = decide_psi_hc(Dataset(x, y))
    assert d.statistic_value == -math.inf and not d.reject


def test_psi_max_uses_hc_threshold():
    d = decide_psi_max(gaussian_data(50, 30, 1))
    assert d.threshold == decide_psi_hc(gaussian_data(50, 30, 1)).threshold


def test_spec_validation_and_aliases():
    assert TestSpec("psi0").name == "psi0_alpha"
    assert TestSpec("hc").name == "psi_hc"
    for bad in (dict(name="psi9"), dict(name="psi_hc", alpha=1.0), dict(name="psi_hc", a=0.0),
                dict(name="psi_hc", cutoff=0.0)):
        with pytest.raises(DomainError):
            TestSpec(**bad)


def test_combined_logic():
    quiet = Dataset(np.eye(10)[:, :4], np.full(10, 1e-3))
    for name in ("psi_star", "psi_star_hc", "psi_triple"):
        d = decide_combined(quiet, TestSpec(name))
        assert not d.reject and d.statistic_value == 0.0
        assert all(not c.reject for c in d.components)
    loud = gaussian_data(200, 10, 3, signal=3.0)
    d = decide_combined(loud, TestSpec("psi_star_hc"))
    assert d.reject == any(c.reject for c in d.components)
    assert [c.test_name for c in d.components] == ["psi0_alpha", "psi_hc"]
    star = decide_combined(loud, TestSpec("psi_star", alpha=0.1))
    assert star.components[0].threshold == pytest.approx(critical_value(0.05))


def test_any_component_rejects():
    # psi0 rejects on a huge response while HC sees nothing unusual
    rng = np.random.default_rng(2)
    x = rng.standard_normal((200, 10))
    y = 5.0 * rng.standard_normal(200)
    d = decide(Dataset(x, y), TestSpec("psi_star_hc"))
    assert d.components[0].reject
    assert d.reject


def test_unknown_variance_restrictions():
    data = gaussian_data(30, 5, 0)
    with pytest.raises(DomainError, match="psi0 requires known variance"):
        decide(data, TestSpec("psi0"), variance_known=False)
    with pytest.raises(DomainError, match="psi1 requires known variance"):
        decide(data, TestSpec("psi1"), variance_known=False)
    assert decide(data, TestSpec("psi_hc"), variance_known=False).test_name == "psi_hc"
    assert [requires_known_variance(TestSpec(n)) for n in TEST_NAMES].count(False) == 2
    assert needs_design(TestSpec("psi_triple")) and not needs_design(TestSpec("psi_star_hc"))


def test_known_sigma_standardizes():
    data = gaussian_data(40, 6, 4)
    scaled = Dataset(data.x, 3.0 * data.y)
    a = decide(data, TestSpec("psi0"))
    b = decide(scaled, TestSpec("psi0"), sigma=3.0)
    assert a.statistic_value == pytest.approx(b.statistic_value, rel=1e-12)


def test_psi0_monotone_in_alpha():
    alphas = np.linspace(0.001, 0.5, 60)
    for seed in range(30):
        data = gaussian_data(60, 2, seed, signal=0.2)
        rej = [decide_psi0_alpha(data, a).reject for a in alphas]
        assert rej == sorted(rej)


def test_hc_decision_scale_invariant():
    for seed in range(30):
        data = gaussian_data(80, 40, seed, signal=0.5)
        base = decide_psi_hc(data)
        for c in (1e-3, 0.1, 10.0, 1e3):
            assert decide_psi_hc(Dataset(data.x, c * data.y)).reject == base.reject


def test_psi1_power():
    # r^2 n / sqrt(p) = 16
    cfg = ProblemConfig(n=400, p=100, k=10, r=math.sqrt(0.4), seed=11)
    res = estimate_errors(cfg, TestSpec("psi1", alpha=0.05), 1000)
    assert 1.0 - res.beta_hat >= 0.9


def test_psi0_T_power_far_above():
    cfg = ProblemConfig(n=10000, p=50, k=5, r=math.sqrt(0.5), seed=3)
    res = estimate_errors(cfg, TestSpec("psi0_T"), 1000)
    assert 1.0 - res.beta_hat >= 0.95


@pytest.mark.slow
def test_psi_star_level():
    cfg = ProblemConfig(n=500, p=250, k=1, r=1.0, seed=21)
    spec = TestSpec("psi_star", alpha=0.05)
    hits = 0
    reps = 20000
    for rep in range(reps):
        sample = simulate_sample(cfg, None, replication_rng(cfg.seed, (1,), 0, rep))
        hits += decide(sample, spec).reject
    assert hits / reps <= 0.06


def test_combined_level_below_sum():
    cfg = ProblemConfig(n=200, p=60, k=2, x=1.0, seed=5)
    star = estimate_errors(cfg, TestSpec("psi_star_hc"), 2000)
    psi0 = estimate_errors(cfg, TestSpec("psi0"), 2000)
    hc = estimate_errors(cfg, TestSpec("psi_hc"), 2000)
    assert star.alpha_hat <= psi0.alpha_hat + hc.alpha_hat
    assert star.alpha_hat >= max(psi0.alpha_hat, hc.alpha_hat)


@pytest.mark.parametrize("name", ["psi0", "psi1", "psi_hc", "psi_max", "psi_star"])
def test_power_monotone_in_r(name):
    powers, ses = [], []
    for r in (0.1, 0.3, 0.5, 0.7, 0.9):
        cfg = ProblemConfig(n=200, p=50, k=3, r=r, seed=9)
        res = estimate_errors(cfg, TestSpec(name), 400)
        powers.append(1.0 - res.beta_hat)
        ses.append(res.stderr_beta)
    for i in range(4):
        assert powers[i + 1] >= powers[i] - 2 * math.hypot(ses[i], ses[i + 1])
