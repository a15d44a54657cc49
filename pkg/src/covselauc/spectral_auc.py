"""Exact AUC and CDF of the difference LLRT statistic from the CAM spectrum.

With L = L_1 - L_0 = sum_i L_i, the moment generating function is
M(t) = prod_i (1 - a_i t - a_i t^2)^{-1/2}, a_i the dissimilarities.  The CDF is
recovered by inverting along the vertical line Re s = b (0 < b, s in the
strip where M(-s) is analytic):

    F(l) = (1/pi) int_0^inf Re[ e^{s l} M(-s) / s ] dw,     s = b + j w,

where M(-s) = prod_i (1 + a_i s (1 - s))^{-1/2}.  With b = 1 and l = 0 this is
the familiar form 1/(1 + j w) * prod_i (1 + a_i w^2 - j a_i w)^{-1/2}.

On the line b = 1/2 every factor 1 + a_i (1/4 + w^2) is real, so
F(0) = 1 - AUC has a positive integrand.  Substituting w = tan(theta)/2 gives

    1 - AUC = (1/pi) int_0^{pi/2} prod_i (1 + (a_i/4) sec^2 theta)^{-1/2} dtheta,

which :func:`auc_exact` evaluates; it keeps full relative accuracy when
1 - AUC is tiny.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
import scipy.integrate

from .errors import InvalidBeta, QuadratureNonConvergence
from .matrix_core import ALPHA_FLOOR, CamSpectrum
from .quadrature import QuadratureConfig, gauss_kronrod

DEFAULT_CONFIG = QuadratureConfig()


def _alphas(s) -> np.ndarray:
    if isinstance(s, CamSpectrum):
        a = s.alphas
    else:
        a = np.atleast_1d(np.asarray(s, dtype=float))
    return a[a > ALPHA_FLOOR]


def principal_sqrt_product(nu, alphas) -> complex | np.ndarray:
    """prod_i (1 + a_i nu^2 - j a_i nu)^{-1/2}, one principal root per factor.

    Every factor has real part >= 1, so no root crosses the branch cut.
    Vectorised over ``nu``.
    """
    a = np.asarray(alphas, dtype=float).reshape(-1)
    nu_arr = np.asarray(nu, dtype=float)
    w = nu_arr.reshape(-1, 1)
    factors = 1.0 + a * w * w - 1j * a * w
    out = np.prod(1.0 / np.sqrt(factors), axis=1)
    if nu_arr.ndim == 0:
        return complex(out[0])
    return out.reshape(nu_arr.shape)


def _mgf_factors(s: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Factors 1 + a_i s (1 - s), shape (len(s), len(a))."""
    s = s.reshape(-1, 1)
    return 1.0 + a * (s * (1.0 - s))


def auc_complement(s, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """1 - AUC = Pr(L_1 - L_0 < 0), evaluated to relative accuracy."""
    a = _alphas(s)
    if a.size == 0:
        return 0.5
    q = a / 4.0
    # the integrand is bounded by prod (1 + a/4)^{-1/2}; measure abs_tol against it
    envelope = math.exp(-0.5 * float(np.sum(np.log1p(q))))

    def integrand(theta):
        c = np.cos(np.asarray(theta, dtype=float)).reshape(-1, 1)
        # (1 + q sec^2)^{-1/2} = c / sqrt(c^2 + q); vanishes at theta = pi/2
        with np.errstate(divide="ignore"):
            logs = np.sum(np.log(np.maximum(c, 0.0)) - 0.5 * np.log(c * c + q), axis=1)
        return np.exp(logs)

    val, _ = gauss_kronrod(
        integrand, 0.0, 0.5 * math.pi,
        abs_tol=cfg.abs_tol * envelope, rel_tol=cfg.rel_tol,
        max_halvings=cfg.max_halvings,
    )
    return min(max(val / math.pi, 0.0), 0.5)


def auc_exact(s, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """AUC = Pr(L_1 > L_0) for the LLRT of Sigma_X against its model.

    Returns exactly 0.5 when every dissimilarity is zero.
    """
    return 1.0 - auc_complement(s, cfg)


def _strip(a: np.ndarray) -> tuple[float, float]:
    """Open interval of Re s on which M(-s) is analytic."""
    if a.size == 0:
        return -math.inf, math.inf
    # lam_max over {lam, 1/lam}: alpha = lam + 1/lam - 2  =>  lam_max = 1 + alpha/2 + sqrt(alpha + alpha^2/4)
    amax = float(np.max(a))
    lam_max = 1.0 + 0.5 * amax + math.sqrt(amax + 0.25 * amax * amax)
    return -1.0 / (lam_max - 1.0), lam_max / (lam_max - 1.0)


def _tail_point(a: np.ndarray, scale: float, floor: float) -> float:
    """Smallest w whose modulus tail bound is below ``floor``.

    On Re s = b the factors satisfy |1 + a s(1-s)| >= a w^2, so for the k largest
    a's: int_W^inf |integrand| dw / pi <= scale * prod a^{-1/2} W^{-k} / (k pi).
    """
    srt = np.sort(a)[::-1]
    best = math.inf
    log_c = 0.0
    for k, ak in enumerate(srt, start=1):
        log_c -= 0.5 * math.log(ak)
        # W^k = scale * C_k / (k pi floor)
        log_w = (math.log(scale) + log_c - math.log(k * math.pi * floor)) / k
        best = min(best, math.exp(min(log_w, 700.0)))
        if k >= 64:
            break
    return max(best, 1.0)


def _line_integrand(a: np.ndarray, b: float, l: float):
    """Complex integrand e^{s l} M(-s) / s on Re s = b (without the 1/pi)."""
    def g(w):
        w = np.asarray(w, dtype=float)
        s = b + 1j * w
        fac = _mgf_factors(s, a)
        m = np.prod(1.0 / np.sqrt(fac), axis=1) if a.size else np.ones(s.size, complex)
        return m.reshape(w.shape) / s
    return g


def _line_value(a: np.ndarray, b: float, l: float, cfg: QuadratureConfig) -> float:
    """(1/pi) int_0^inf Re[e^{s l} M(-s)/s] dw on Re s = b."""
    g = _line_integrand(a, b, l)
    scale = math.exp(b * l)
    if l == 0.0:
        vmax = _tail_point(a, 1.0, cfg.truncation_floor)
        edges = [0.0, 1.0]
        while edges[-1] < vmax:
            edges.append(min(2.0 * edges[-1], vmax))
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            v, _ = gauss_kronrod(lambda w: g(w).real, lo, hi,
                                 abs_tol=cfg.abs_tol / len(edges), rel_tol=cfg.rel_tol,
                                 max_halvings=cfg.max_halvings)
            total += v
        return total / math.pi

    # Oscillatory case: finite part by Gauss-Kronrod, tail by QUADPACK's
    # Fourier-integral routine (qawf) on cos/sin components.
    omega = abs(l)
    sgn = 1.0 if l > 0 else -1.0
    w0 = max(1.0, 8.0 * math.pi / omega)

    def head(w):
        z = g(w)
        return (np.cos(l * w) * z.real - np.sin(l * w) * z.imag)

    v_head, _ = gauss_kronrod(head, 0.0, w0, abs_tol=cfg.abs_tol / 4, rel_tol=cfg.rel_tol,
                              max_halvings=cfg.max_halvings)
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.integrate.IntegrationWarning)
        try:
            c_tail, _ = scipy.integrate.quad(lambda w: g(np.array([w]))[0].real, w0, np.inf,
                                             weight="cos", wvar=omega, epsabs=cfg.abs_tol / 4,
                                             limlst=200)
            s_tail, _ = scipy.integrate.quad(lambda w: g(np.array([w]))[0].imag, w0, np.inf,
                                             weight="sin", wvar=omega, epsabs=cfg.abs_tol / 4,
                                             limlst=200)
        except scipy.integrate.IntegrationWarning as exc:
            raise QuadratureNonConvergence(f"Fourier tail integral failed: {exc}") from exc
    # cos(l w) = cos(|l| w), sin(l w) = sgn * sin(|l| w)
    return scale * (v_head + c_tail - sgn * s_tail) / math.pi


def cdf_ldelta(s, l: float, beta: float = 2.0, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """CDF of the difference LLRT statistic at ``l``.

    ``beta`` places the inversion line at Re s = beta/2 and must keep
    I + (beta/2)(Lambda - I) positive definite.  For l > 0 the line is
    mirrored to Re s < 0 (picking up the unit residue at s = 0) so that the
    factor e^{s l} stays bounded; the result does not depend on the choice.
    """
    a = _alphas(s)
    l = float(l)
    beta = float(beta)
    lo, hi = _strip(a)
    b = 0.5 * beta
    if not (0.0 < b < hi):
        raise InvalidBeta(
            f"beta={beta!r} leaves the analytic strip; need 0 < beta < {2 * hi:.6g}"
        )
    if a.size == 0:
        return 0.0 if l < 0 else (1.0 if l > 0 else 0.5)
    if l <= 0.0:
        val = _line_value(a, b, l, cfg)
    else:
        b_neg = -min(b, 0.5 * abs(lo))
        val = 1.0 + _line_value(a, b_neg, l, cfg)
    return min(max(val, 0.0), 1.0)
