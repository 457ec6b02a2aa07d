"""Standard Gaussian CDF, quantile and two-sided p-values.

The complementary error function follows W. J. Cody's rational Chebyshev
approximations (CALERF), evaluated with numpy so the same code path is used
for scalars and arrays.  The quantile starts from Acklam's rational
approximation and is polished with Halley steps against the CDF above.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "Q_MIN",
    "erfc",
    "std_normal_cdf",
    "std_normal_sf",
    "std_normal_quantile",
    "two_sided_pvalue",
]

Q_MIN = 1e-300

_SQRT2 = 1.4142135623730950488
_SQRT2PI = 2.5066282746310005024
_SQRPI = 5.6418958354775628695e-1  # 1/sqrt(pi)
_THRESH = 0.46875
_XBIG = 26.543

_A = (3.16112374387056560e00, 1.13864154151050156e02, 3.77485237685302021e02,
      3.20937758913846947e03, 1.85777706184603153e-1)
_B = (2.36012909523441209e01, 2.44024637934444173e02, 1.28261652607737228e03,
      2.84423683343917062e03)
_C = (5.64188496988670089e-1, 8.88314979438837594e00, 6.61191906371416295e01,
      2.98635138197400131e02, 8.81952221241769090e02, 1.71204761263407058e03,
      2.05107837782607147e03, 1.23033935479799725e03, 2.15311535474403846e-8)
_D = (1.57449261107098347e01, 1.17693950891312499e02, 5.37181101862009858e02,
      1.62138957456669019e03, 3.29079923573345963e03, 4.36261909014324716e03,
      3.43936767414372164e03, 1.23033935480374942e03)
_P = (3.05326634961232344e-1, 3.60344899949804439e-1, 1.25781726111229246e-1,
      1.60837851487422766e-2, 6.58749161529837803e-4, 1.63153871373020978e-2)
_Q = (2.56852019228982242e00, 1.87295284992346725e00, 5.27905102951428412e-1,
      6.05183413124413191e-2, 2.33520497626869185e-3)

# Acklam's initial approximation for the inverse CDF
_QA = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
       1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_QB = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
       6.680131188771972e01, -1.328068155288572e01)
_QC = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
       -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_QD = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
       3.754408661907416e00)
_PLOW = 0.02425


def _scalar_or_array(values, was_scalar):
    if was_scalar:
        return float(values)
    return values


def _scaled_gauss(y, ratio):
    # exp(-y^2) * ratio, splitting y^2 to keep the tail accurate
    ysq = np.trunc(y * 16.0) / 16.0
    delta = (y - ysq) * (y + ysq)
    return np.exp(-ysq * ysq) * np.exp(-delta) * ratio


def _erfc_core(x: np.ndarray) -> np.ndarray:
    y = np.abs(x)
    out = np.empty_like(y)

    small = y <= _THRESH
    if small.any():
        ys = y[small]
        ysq = ys * ys
        xnum = _A[4] * ysq
        xden = ysq
        for i in range(3):
            xnum = (xnum + _A[i]) * ysq
            xden = (xden + _B[i]) * ysq
        out[small] = 1.0 - ys * (xnum + _A[3]) / (xden + _B[3])

    mid = (y > _THRESH) & (y <= 4.0)
    if mid.any():
        ym = y[mid]
        xnum = _C[8] * ym
        xden = ym
        for i in range(7):
            xnum = (xnum + _C[i]) * ym
            xden = (xden + _D[i]) * ym
        out[mid] = _scaled_gauss(ym, (xnum + _C[7]) / (xden + _D[7]))

    big = (y > 4.0) & (y < _XBIG)
    if big.any():
        yb = y[big]
        ysq = 1.0 / (yb * yb)
        xnum = _P[5] * ysq
        xden = ysq
        for i in range(4):
            xnum = (xnum + _P[i]) * ysq
            xden = (xden + _Q[i]) * ysq
        ratio = ysq * (xnum + _P[4]) / (xden + _Q[4])
        out[big] = _scaled_gauss(yb, (_SQRPI - ratio) / yb)

    out[y >= _XBIG] = 0.0
    neg = x < 0
    out[neg] = 2.0 - out[neg]
    return out


def erfc(x):
    """Complementary error function, accepting a scalar or an array."""
    arr = np.asarray(x, dtype=float)
    was_scalar = arr.ndim == 0
    return _scalar_or_array(_erfc_core(np.atleast_1d(arr)).reshape(arr.shape), was_scalar)


def std_normal_cdf(t):
    """Phi(t) for the standard normal law.

    Saturates to exactly 0 or 1 beyond the representable tail (|t| > ~37.5).
    """
    arr = np.asarray(t, dtype=float)
    if np.isnan(arr).any():
        raise ValueError("std_normal_cdf requires finite input")
    return _scalar_or_array(0.5 * _erfc_core(np.atleast_1d(-arr / _SQRT2)).reshape(arr.shape),
                            arr.ndim == 0)


def std_normal_sf(t):
    """Upper tail 1 - Phi(t), computed without cancellation."""
    return std_normal_cdf(-np.asarray(t, dtype=float))


def _acklam(p: np.ndarray) -> np.ndarray:
    # valid for 0 < p <= 0.5; the caller reflects the upper half
    out = np.empty_like(p)
    low = p < _PLOW
    if low.any():
        q = np.sqrt(-2.0 * np.log(p[low]))
        num = ((((_QC[0] * q + _QC[1]) * q + _QC[2]) * q + _QC[3]) * q + _QC[4]) * q + _QC[5]
        den = (((_QD[0] * q + _QD[1]) * q + _QD[2]) * q + _QD[3]) * q + 1.0
        out[low] = num / den
    cen = ~low
    if cen.any():
        q = p[cen] - 0.5
        r = q * q
        num = (((((_QA[0] * r + _QA[1]) * r + _QA[2]) * r + _QA[3]) * r + _QA[4]) * r + _QA[5]) * q
        den = ((((_QB[0] * r + _QB[1]) * r + _QB[2]) * r + _QB[3]) * r + _QB[4]) * r + 1.0
        out[cen] = num / den
    return out


def std_normal_quantile(alpha):
    """Lower ``alpha``-quantile of N(0, 1), so that ``std_normal_cdf(result) == alpha``.

    The critical value u_alpha used by the one-sided tests is
    ``std_normal_quantile(1 - alpha)``.

    Raises
    ------
    ValueError
        If any ``alpha`` lies outside the open interval (0, 1).
    """
    arr = np.asarray(alpha, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise ValueError(f"quantile level must lie in (0, 1), got {alpha!r}")
    flat = np.atleast_1d(arr).ravel()
    upper = flat > 0.5
    # 1 - p is exact for p >= 1/2
    lower_p = np.where(upper, 1.0 - flat, flat)
    x = _acklam(lower_p)
    for _ in range(2):
        err = 0.5 * _erfc_core(-x / _SQRT2) - lower_p
        u = err * _SQRT2PI * np.exp(0.5 * x * x)
        x = x - u / (1.0 + 0.5 * x * u)
    x = np.where(lower_p == 0.5, 0.0, x)
    x = np.where(upper, -x, x)
    return _scalar_or_array(x.reshape(arr.shape), arr.ndim == 0)


def two_sided_pvalue(y, floor: float = Q_MIN):
    """P(|N(0,1)| > |y|), clamped below at ``floor``."""
    arr = np.asarray(y, dtype=float)
    q = _erfc_core(np.atleast_1d(np.abs(arr)) / _SQRT2)
    q = np.clip(q, floor, 1.0).reshape(arr.shape)
    return _scalar_or_array(q, arr.ndim == 0)
