"""Closed-form AUC bounds from the CAM spectrum and the divergences.

Lower: Chernoff bound at t = -1/2, where each spectral term of the MGF is
2 / sqrt(4 + alpha).  Upper: any detector whose LLRT has divergence D* has its
(AUC, D) pair inside a feasible region whose boundary is

    AUC(a) = 1/(1 - e^{-a}) - 1/a,
    D(a)   = log a + a/(e^a - 1) - 1 - log(1 - e^{-a}),     a > 0,

so the AUC is at most AUC(a*) where D(a*) = D*.  Every bound is also
reported as its complement 1 - bound, which stays accurate near AUC = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divergences import DivergenceSet
from .errors import OutOfDomain, RootNotBracketed
from .matrix_core import CamSpectrum

# below this the closed forms cancel; the series (through a^8) is exact to rounding
SERIES_BELOW = 1e-2
MAX_BISECTIONS = 200
# D(a) ~ log(a) - 1 for large a, so D* up to ~700 nats is reachable below this
A_CEILING = 1e300


def _alphas(s) -> np.ndarray:
    if isinstance(s, CamSpectrum):
        return s.alphas
    return np.atleast_1d(np.asarray(s, dtype=float))


def chernoff_complement(s) -> float:
    """prod_i 2/sqrt(4 + alpha_i) = exp(-1/2 sum log(1 + alpha_i/4))."""
    return math.exp(-0.5 * float(np.sum(np.log1p(0.25 * _alphas(s)))))


def chernoff_lower(s) -> float:
    return max(0.5, 1.0 - chernoff_complement(s))


def mgf_at_half(alpha) -> np.ndarray:
    """Per-term MGF (1 - alpha t - alpha t^2)^{-1/2} at t = -1/2."""
    a = np.asarray(alpha, dtype=float)
    t = -0.5
    return 1.0 / np.sqrt(1.0 - a * t - a * t * t)


def asymptotic_lower_complement(s) -> float:
    """exp(-sum alpha_i / (8 + alpha_i)), i.e. exp(-n (1 - mean (1 + alpha/8)^{-1}))."""
    a = _alphas(s)
    return math.exp(-float(np.sum(a / (8.0 + a))))


def asymptotic_lower(s, clamp: bool = True) -> float:
    value = 1.0 - asymptotic_lower_complement(s)
    return max(0.5, value) if clamp else value


def _boundary(a: float) -> tuple[float, float, float]:
    """(AUC, 1 - AUC, D) on the feasible-region boundary."""
    if a < SERIES_BELOW:
        a2 = a * a
        odd = a * (1.0 / 12.0 - a2 * (1.0 / 720.0 - a2 * (1.0 / 30240.0 - a2 / 1209600.0)))
        d = a2 * (1.0 / 24.0 - a2 * (1.0 / 960.0 - a2 * (1.0 / 36288.0 - a2 / 1382400.0)))
        return 0.5 + odd, 0.5 - odd, d
    decay = math.exp(-a)
    one_minus_decay = -math.expm1(-a)
    inv_em1 = decay / one_minus_decay  # 1/(e^a - 1) without overflow
    complement = 1.0 / a - inv_em1
    d = math.log(a) + a * inv_em1 - 1.0 - math.log(one_minus_decay)
    return 1.0 - complement, complement, d


def feasible_region_curve(a: float) -> tuple[float, float]:
    """(AUC, D) boundary point for parameter ``a`` > 0."""
    a = float(a)
    if not a > 0.0 or math.isnan(a):
        raise OutOfDomain(f"feasible-region parameter must be positive, got {a!r}")
    auc, _, d = _boundary(a)
    return auc, d


def feasible_region_tail(a: float) -> float:
    """1 - AUC(a), accurate when AUC(a) is close to 1."""
    a = float(a)
    if not a > 0.0 or math.isnan(a):
        raise OutOfDomain(f"feasible-region parameter must be positive, got {a!r}")
    return _boundary(a)[1]


def _solve_parameter(d_star: float) -> float:
    """a with D(a) = d_star, bisecting in log a until the bracket collapses.

    Running to machine precision (rather than a fixed |D - d_star|) keeps the
    relative accuracy of a when d_star is tiny.
    """
    lo, hi = -30.0, 2.0
    while _boundary(math.exp(lo))[2] > d_star:
        lo -= 10.0
        if lo < -700.0:
            raise RootNotBracketed(f"D(a) = {d_star!r} not bracketed from below")
    while _boundary(math.exp(hi))[2] < d_star:
        hi = min(2.0 * hi, math.log(A_CEILING))
        if hi >= math.log(A_CEILING) and _boundary(A_CEILING)[2] < d_star:
            raise RootNotBracketed(
                f"D* = {d_star!r} exceeds the boundary value at a = {A_CEILING:g}"
            )
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        d = _boundary(math.exp(mid))[2]
        if d == d_star:
            return math.exp(mid)
        if d < d_star:
            lo = mid
        else:
            hi = mid
    return math.exp(0.5 * (lo + hi))


def kl_upper_bound(d_star: float) -> tuple[float, float]:
    """(upper AUC, a) with D(a) = d_star; d_star = 0 gives (1/2, 0)."""
    upper, _, a = _upper_with_complement(d_star)
    return upper, a


def _upper_with_complement(d_star: float) -> tuple[float, float, float]:
    d_star = float(d_star)
    if not d_star >= 0.0 or math.isinf(d_star):
        raise OutOfDomain(f"d_star must be finite and >= 0, got {d_star!r}")
    if d_star == 0.0:
        return 0.5, 0.5, 0.0
    a = _solve_parameter(d_star)
    auc, complement, _ = _boundary(a)
    return auc, complement, a


def asymptotic_upper(d_star: float) -> float:
    return 1.0 - math.exp(-float(d_star) - 1.0)


@dataclass(frozen=True)
class BoundReport:
    lower: float
    upper: float
    lower_asymptotic: float
    upper_asymptotic: float
    d_star: float
    a_param: float
    one_minus_lower: float
    one_minus_upper: float


def bound_report(s: CamSpectrum, d: DivergenceSet) -> BoundReport:
    """Tightest bound on each side.

    lower = max(1/2, Chernoff, clamped asymptotic); upper = min(parametric,
    asymptotic).  The asymptotic lower bound never beats Chernoff, so in
    practice lower is the Chernoff value.
    """
    d_star = d.d_star
    lo_cmp = min(0.5, chernoff_complement(s), asymptotic_lower_complement(s))
    up, up_cmp, a = _upper_with_complement(d_star)
    up_asym_cmp = math.exp(-d_star - 1.0)
    # smaller upper bound <=> larger complement
    if up_asym_cmp > up_cmp:
        up, up_cmp = 1.0 - up_asym_cmp, up_asym_cmp
    return BoundReport(
        lower=1.0 - lo_cmp,
        upper=up,
        lower_asymptotic=asymptotic_lower(s),
        upper_asymptotic=asymptotic_upper(d_star),
        d_star=d_star,
        a_param=a,
        one_minus_lower=lo_cmp,
        one_minus_upper=up_cmp,
    )
