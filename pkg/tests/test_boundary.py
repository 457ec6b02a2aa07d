import math

import numpy as np
import pytest

from sparsedetect.boundary import (
    boundary_rate,
    boundary_unit,
    classify_regime,
    hc_detection_threshold,
    phi_boundary,
    sharp_radius,
)
from sparsedetect.model import DomainError, ProblemConfig, k_from_beta


def test_phi_examples():
    assert abs(phi_boundary(0.75) - math.sqrt(0.5)) < 1e-12
    assert abs(math.sqrt(2 * 0.75 - 1) - math.sqrt(2) * (1 - math.sqrt(0.25))) < 1e-12
    assert phi_boundary(0.5 + 1e-9) < 1e-4
    assert abs(phi_boundary(0.99) - 1.2727922061357855) < 1e-12


@pytest.mark.parametrize("beta", [0.5, 1.0, 0.2, 1.2, float("nan")])
def test_phi_domain(beta):
    with pytest.raises(DomainError):
        phi_boundary(beta)


def test_phi_shape_on_grid():
    betas = np.linspace(0.5, 1.0, 10002)[1:-1]
    vals = np.array([phi_boundary(b) for b in betas])
    assert np.all(np.diff(vals) > 0)
    assert np.all((vals > 0) & (vals < math.sqrt(2)))
    left = phi_boundary(np.nextafter(0.75, 0))
    right = phi_boundary(np.nextafter(0.75, 1))
    assert abs(left - right) < 1e-12


def test_rate_examples():
    assert abs(boundary_rate(10000, 100, 10) - 0.0316227766) < 1e-9
    assert abs(boundary_rate(16, 16, 1) - math.sqrt(math.log(16) / 16)) < 1e-15
    assert boundary_rate(10 ** 12, 50, 3) < 1e-5


def test_rate_monotone():
    for p in (16, 100, 1000):
        for k in range(1, p + 1, max(1, p // 10)):
            rates = [boundary_rate(n, p, k) for n in (10, 100, 1000, 10 ** 4, 10 ** 6)]
            assert all(b <= a for a, b in zip(rates, rates[1:]))
        for n in (10, 1000, 10 ** 6):
            # monotone within each branch; the formula drops at the k^2 = p switch
            for branch in (lambda k: k * k < p, lambda k: k * k >= p):
                rates = [boundary_rate(n, p, k) for k in range(1, p + 1) if branch(k)]
                assert all(b >= a for a, b in zip(rates, rates[1:]))


def test_sharp_radius():
    assert abs(sharp_radius(10 ** 4, 256, 0.75) - 0.033302184446307910) < 1e-15
    assert abs(sharp_radius(4 * 10 ** 4, 256, 0.75) - sharp_radius(10 ** 4, 256, 0.75) / 2) < 1e-15
    for beta in np.linspace(0.51, 0.99, 49):
        k = k_from_beta(4096, beta)
        unit = boundary_unit(4000, 4096, k)
        assert sharp_radius(4000, 4096, beta) == phi_boundary(beta) * unit
        ratio = sharp_radius(4000, 4096, beta) / unit
        assert abs(ratio - phi_boundary(beta)) <= math.ulp(phi_boundary(beta))


def test_hc_threshold():
    assert abs(hc_detection_threshold(10 ** 4) - 1.1 * math.sqrt(2 * math.log(math.log(10 ** 4)))) < 1e-15
    with pytest.raises(DomainError):
        hc_detection_threshold(2)


def test_classify_examples():
    rep = classify_regime(ProblemConfig(n=100, p=50, beta=0.3, x=1.0))
    assert rep.regime == "moderately_sparse" and rep.sharp_radius is None
    assert "sharp_radius" not in rep.as_dict()

    rep = classify_regime(ProblemConfig(n=10 ** 6, p=256, beta=0.75, x=1.0))
    assert rep.k == 4 and abs(rep.sharp_condition_ratio - 0.02218070977791825) < 1e-12
    assert rep.sharp_constant_applicable

    n = 50
    k = 10
    p = int(round(math.exp(2 * n / k)))  # k log p = 2n
    rep = classify_regime(ProblemConfig(n=n, p=p, k=k, x=1.0, variance_known=False))
    assert not rep.unknown_variance_detectable
    assert classify_regime(ProblemConfig(n=n, p=p, k=k, x=1.0)).unknown_variance_detectable


def test_half_is_moderate():
    assert classify_regime(ProblemConfig(n=100, p=100, beta=0.5, x=1.0)).regime == "moderately_sparse"
