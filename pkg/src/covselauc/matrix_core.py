"""Validated correlation matrices and the correlation approximation matrix (CAM).

The CAM of a pair (Sigma_X, Sigma_M) is ``Delta = Sigma_X @ inv(Sigma_M)``.  It is
not symmetric, but it is similar to the SPD matrix
``Sigma_X^{1/2} inv(Sigma_M) Sigma_X^{1/2}``, which is what we diagonalise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    BadDiagonal,
    DimensionMismatch,
    EigenFailure,
    NonPositiveEigenvalue,
    NotPositiveDefinite,
    NotSquare,
    NotSymmetric,
)

SYMMETRY_TOL = 1e-12
SYMMETRIZE_TOL = 1e-9
DIAGONAL_TOL = 1e-12
PD_RELATIVE_TOL = 1e-10
# alpha ~ (lambda - 1)^2, so this is |lambda - 1| ~ 1e-10: eigensolver noise
ALPHA_FLOOR = 1e-20


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """SPD matrix with unit diagonal.

    Construct through :func:`validate_correlation`; the raw constructor does
    no checking.
    """

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def __repr__(self) -> str:
        return f"CorrelationMatrix(n={self.n})"


@dataclass(frozen=True, eq=False)
class CamMatrix:
    """Delta = Sigma_X inv(Sigma_M), with the pair it was built from."""

    values: np.ndarray
    sigma: CorrelationMatrix
    model: CorrelationMatrix

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class CamSpectrum:
    """Eigenvalues of the CAM (descending) and the derived dissimilarities."""

    lambdas: np.ndarray
    alphas: np.ndarray = field(init=False)
    logdet: float = field(init=False)
    trace: float = field(init=False)

    def __post_init__(self):
        lam = np.sort(np.asarray(self.lambdas, dtype=float))[::-1]
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("spectrum needs at least one eigenvalue")
        if not np.all(np.isfinite(lam)) or lam[-1] <= 0.0:
            raise NonPositiveEigenvalue(
                f"CAM eigenvalues must be positive, smallest is {lam[-1]!r}"
            )
        # lambda + 1/lambda - 2 = (lambda - 1)^2 / lambda, exact near 1
        alphas = (lam - 1.0) ** 2 / lam
        object.__setattr__(self, "lambdas", _frozen(lam))
        object.__setattr__(self, "alphas", _frozen(alphas))
        object.__setattr__(self, "logdet", float(np.sum(np.log(lam))))
        object.__setattr__(self, "trace", float(np.sum(lam)))

    @classmethod
    def from_lambdas(cls, lambdas) -> "CamSpectrum":
        return cls(np.atleast_1d(np.asarray(lambdas, dtype=float)))

    @property
    def n(self) -> int:
        return self.lambdas.size

    @property
    def is_degenerate(self) -> bool:
        """True when every dissimilarity is at rounding level."""
        return not np.any(self.alphas > ALPHA_FLOOR)


def validate_correlation(raw) -> CorrelationMatrix:
    """Check and freeze a correlation matrix.

    Entries whose asymmetry is at most 1e-9 are symmetrised as (A + A.T)/2;
    anything larger is rejected.
    """
    a = np.array(raw, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise NotSquare(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotSymmetric("matrix contains non-finite entries")
    skew = np.max(np.abs(a - a.T))
    if skew > SYMMETRIZE_TOL:
        raise NotSymmetric(f"max |A - A.T| = {skew:.3g} exceeds {SYMMETRIZE_TOL:g}")
    if skew > 0.0:
        a = 0.5 * (a + a.T)
    diag_err = np.max(np.abs(np.diag(a) - 1.0))
    if diag_err > DIAGONAL_TOL:
        raise BadDiagonal(f"diagonal deviates from 1 by {diag_err:.3g}")
    off = a[~np.eye(a.shape[0], dtype=bool)]
    if off.size and np.max(np.abs(off)) > 1.0:
        raise NotPositiveDefinite(
            f"off-diagonal entry {off[np.argmax(np.abs(off))]:.6g} outside [-1, 1]"
        )
    try:
        w = np.linalg.eigvalsh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    if w[0] <= PD_RELATIVE_TOL * w[-1]:
        raise NotPositiveDefinite(
            f"smallest eigenvalue {w[0]:.3g} is not above {PD_RELATIVE_TOL:g} x largest ({w[-1]:.3g})"
        )
    return CorrelationMatrix(_frozen(a))


def _as_matrix(m) -> np.ndarray:
    if isinstance(m, CorrelationMatrix):
        return m.values
    base = getattr(m, "base", None)
    if isinstance(base, CorrelationMatrix):
        return base.values
    return np.asarray(m, dtype=float)


def _as_correlation(m) -> CorrelationMatrix:
    if isinstance(m, CorrelationMatrix):
        return m
    base = getattr(m, "base", None)
    if isinstance(base, CorrelationMatrix):
        return base
    return validate_correlation(m)


def spd_sqrt(m) -> np.ndarray:
    """Symmetric square root of an SPD matrix via its eigendecomposition."""
    a = _as_matrix(m)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    if w[0] <= 0.0:
        raise NotPositiveDefinite(f"smallest eigenvalue {w[0]:.3g} is not positive")
    s = (v * np.sqrt(w)) @ v.T
    return 0.5 * (s + s.T)


def cam(sigma, model) -> CamMatrix:
    """Delta = Sigma_X Sigma_M^{-1} via a Cholesky solve, no explicit inverse."""
    sigma = _as_correlation(sigma)
    model = _as_correlation(model)
    if sigma.n != model.n:
        raise DimensionMismatch(f"dimensions differ: {sigma.n} vs {model.n}")
    try:
        cho = scipy.linalg.cho_factor(model.values)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"model covariance is not PD: {exc}") from exc
    # Delta^T = Sigma_M^{-1} Sigma_X since both factors are symmetric
    delta = scipy.linalg.cho_solve(cho, sigma.values).T
    return CamMatrix(_frozen(delta), sigma, model)


def cam_spectrum(delta: CamMatrix) -> CamSpectrum:
    """Eigenvalues of Delta from the similar SPD form S^{1/2} Sigma_M^{-1} S^{1/2}."""
    root = spd_sqrt(delta.sigma)
    try:
        cho = scipy.linalg.cho_factor(delta.model.values)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"model covariance is not PD: {exc}") from exc
    b = root @ scipy.linalg.cho_solve(cho, root)
    b = 0.5 * (b + b.T)
    try:
        lam = np.linalg.eigvalsh(b)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    if lam[0] <= 0.0:
        raise NonPositiveEigenvalue(f"CAM eigenvalue {lam[0]:.3g} is not positive")
    return CamSpectrum(lam)


def spectrum_of(sigma, model) -> CamSpectrum:
    """Shorthand for ``cam_spectrum(cam(sigma, model))``."""
    return cam_spectrum(cam(sigma, model))
