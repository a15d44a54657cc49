"""Gaussian divergences between N(0, Sigma_X) and N(0, Sigma_M), in nats."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomain
from .matrix_core import CamSpectrum


@dataclass(frozen=True)
class DivergenceSet:
    kl: float          # D(f_X || f_M)
    reverse_kl: float  # D(f_M || f_X)
    jeffreys: float

    @property
    def d_star(self) -> float:
        return min(self.kl, self.reverse_kl)


def divergences_from_spectrum(s: CamSpectrum) -> DivergenceSet:
    """KL, reverse KL and Jeffreys divergence from the CAM eigenvalues.

    Uses the full trace/log-det form, so it is also right for models that do
    not satisfy the selection rules (where trace != n).
    """
    lam = s.lambdas
    n = lam.size
    # sum(lam - 1 - log lam) is accurate for lam near 1, unlike trace - n - logdet
    kl = 0.5 * float(np.sum((lam - 1.0) - np.log(lam)))
    rkl = 0.5 * float(np.sum((1.0 / lam - 1.0) + np.log(lam)))
    jeff = 0.5 * float(np.sum(s.alphas))
    return DivergenceSet(max(kl, 0.0), max(rkl, 0.0), jeff)


def gaussian_kl(sigma_p, sigma_q) -> float:
    """D(N(0, P) || N(0, Q)) from the matrices directly: 1/2 (tr(Q^-1 P) - n - log|P|/|Q|)."""
    p = np.asarray(getattr(sigma_p, "values", sigma_p), dtype=float)
    q = np.asarray(getattr(sigma_q, "values", sigma_q), dtype=float)
    n = p.shape[0]
    tr = float(np.trace(np.linalg.solve(q, p)))
    _, ldp = np.linalg.slogdet(p)
    _, ldq = np.linalg.slogdet(q)
    return 0.5 * (tr - n - (ldp - ldq))


def _check_toeplitz_domain(n: int, rho: float) -> None:
    if n < 2:
        raise OutOfDomain(f"n must be >= 2, got {n}")
    if not (abs(rho) < 1.0 and rho > -1.0 / (n - 1)):
        raise OutOfDomain(f"rho={rho!r} outside (-1/(n-1), 1) for n={n}")


def star_closed_form(n: int, rho: float) -> tuple[float, float]:
    """(KL, Jeffreys) of the star tree model of an n-dim equicorrelation matrix."""
    _check_toeplitz_domain(n, rho)
    kl = 0.5 * (n - 1) * math.log1p(rho) - 0.5 * math.log1p((n - 1) * rho)
    jeff = (n - 1) * (n - 2) * rho * rho / (2.0 * (1.0 + (n - 1) * rho))
    return kl, jeff


def chain_closed_form(n: int, rho: float) -> tuple[float, float]:
    """(KL, Jeffreys) of the first-order Markov chain model of an equicorrelation matrix.

    KL equals the star value.  The Jeffreys divergence is

        rho^2 / ((1 + (n-1) rho)(1 - rho)) * ( n(n-1)/2 - n(1-rho^n)/(1-rho)
                                               + (1 - (n+1) rho^n + n rho^(n+1)) / (1-rho)^2 )
    """
    _check_toeplitz_domain(n, rho)
    kl, _ = star_closed_form(n, rho)
    if rho == 0.0:
        return kl, 0.0
    q = 1.0 - rho
    rn = rho ** n
    bracket = n * (n - 1) / 2.0 - n * (1.0 - rn) / q + (1.0 - (n + 1) * rn + n * rn * rho) / (q * q)
    jeff = rho * rho / ((1.0 + (n - 1) * rho) * q) * bracket
    return kl, jeff
