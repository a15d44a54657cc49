"""Monte Carlo reference values for the LLRT detection problem.

Scores are l(x) = -c + x^T K x with K = (inv(Sigma_X) - inv(Sigma_M)) / 2 and
c = -log|Delta| / 2, i.e. log f_M(x) - log f_X(x).  Hypothesis 0 draws
x ~ N(0, Sigma_X), hypothesis 1 draws x ~ N(0, Sigma_M).

Also here: the per-eigenvalue GAL density and a KS check of it against
direct chi-square sampling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.stats

from .errors import DimensionMismatch, EmptyBin, OutOfDomain, ValidationError
from .matrix_core import _as_correlation
from .quadrature import gauss_kronrod
from .special import k0e

MIN_SAMPLES = 1000
CHUNK = 1 << 16


@dataclass(frozen=True, eq=False)
class LlrtSamples:
    h0_scores: np.ndarray
    h1_scores: np.ndarray
    seed: int | None

    def __post_init__(self):
        for name in ("h0_scores", "h1_scores"):
            a = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if a.size == 0:
                raise ValidationError(f"{name} is empty")
            if not np.all(np.isfinite(a)):
                raise ValidationError(f"{name} has non-finite values")
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def swapped(self) -> "LlrtSamples":
        return LlrtSamples(self.h1_scores, self.h0_scores, self.seed)


def _quadratic_scores(rng, factor, kmat, offset, count) -> np.ndarray:
    out = np.empty(count)
    n = factor.shape[0]
    for start in range(0, count, CHUNK):
        stop = min(start + CHUNK, count)
        z = rng.standard_normal((stop - start, n))
        x = z @ factor.T
        out[start:stop] = np.einsum("ij,jk,ik->i", x, kmat, x) - offset
    return out


def sample_llrt(sigma, model, n_samples: int, seed: int | None = None) -> LlrtSamples:
    """Draw ``n_samples`` LLRT scores under each hypothesis.

    Each hypothesis gets its own child stream of ``SeedSequence(seed)``, so
    the result is reproducible bit for bit.
    """
    sigma = _as_correlation(sigma)
    model = _as_correlation(model)
    if sigma.n != model.n:
        raise DimensionMismatch(f"dimensions differ: {sigma.n} vs {model.n}")
    if n_samples < MIN_SAMPLES:
        raise ValidationError(f"need at least {MIN_SAMPLES} samples, got {n_samples}")
    n = sigma.n
    chol_x = scipy.linalg.cholesky(sigma.values, lower=True)
    chol_m = scipy.linalg.cholesky(model.values, lower=True)
    prec_x = scipy.linalg.cho_solve((chol_x, True), np.eye(n))
    prec_m = scipy.linalg.cho_solve((chol_m, True), np.eye(n))
    kmat = 0.5 * (prec_x - prec_m)
    kmat = 0.5 * (kmat + kmat.T)
    # log|Delta| = log|Sigma_X| - log|Sigma_M|
    logdet_delta = 2.0 * (np.sum(np.log(np.diag(chol_x))) - np.sum(np.log(np.diag(chol_m))))
    offset = -0.5 * logdet_delta
    ss0, ss1 = np.random.SeedSequence(seed).spawn(2)
    h0 = _quadratic_scores(np.random.default_rng(ss0), chol_x, kmat, offset, n_samples)
    h1 = _quadratic_scores(np.random.default_rng(ss1), chol_m, kmat, offset, n_samples)
    return LlrtSamples(h0, h1, seed)


@dataclass(frozen=True, eq=False)
class RocEstimate:
    false_alarm: np.ndarray
    detection: np.ndarray
    auc_mw: float
    se: float

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.false_alarm, self.detection])

    def trapezoid_area(self) -> float:
        fa, det = self.false_alarm, self.detection
        return float(np.sum(np.diff(fa) * 0.5 * (det[1:] + det[:-1])))


def mann_whitney_auc(h0: np.ndarray, h1: np.ndarray) -> float:
    """Pr(h1 > h0) + Pr(h1 = h0) / 2 from midranks."""
    n0, n1 = h0.size, h1.size
    ranks = scipy.stats.rankdata(np.concatenate([h1, h0]))
    u = float(np.sum(ranks[:n1])) - n1 * (n1 + 1) / 2.0
    return u / (n0 * n1)


def empirical_roc(samples: LlrtSamples) -> RocEstimate:
    """Full ROC by sweeping the threshold down through every distinct score."""
    h0, h1 = samples.h0_scores, samples.h1_scores
    n0, n1 = h0.size, h1.size
    scores = np.concatenate([h0, h1])
    labels = np.concatenate([np.zeros(n0), np.ones(n1)])
    order = np.argsort(-scores, kind="stable")
    scores, labels = scores[order], labels[order]
    # one ROC point per distinct threshold, so tied scores move diagonally
    last_of_group = np.r_[scores[1:] != scores[:-1], True]
    hits = np.cumsum(labels)[last_of_group]
    alarms = np.cumsum(1.0 - labels)[last_of_group]
    fa = np.r_[0.0, alarms / n0]
    det = np.r_[0.0, hits / n1]
    auc = mann_whitney_auc(h0, h1)
    se = math.sqrt(max(auc * (1.0 - auc), 0.0) / min(n0, n1))
    return RocEstimate(fa, det, auc, se)


class RocKl(NamedTuple):
    kl10: float  # D(f_L1 || f_L0), estimates the reverse KL D(f_M || f_X)
    kl01: float  # D(f_L0 || f_L1), estimates the KL D(f_X || f_M)


def _merge_empty(p0: np.ndarray, p1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fold every bin without hypothesis-1 mass into the next non-empty one.

    A coarser partition can only lower both divergences, so the estimates
    stay below the values they track.
    """
    out0, out1 = [], []
    acc0 = acc1 = 0.0
    for a, b in zip(p0, p1):
        acc0 += a
        acc1 += b
        if acc1 > 0.0:
            out0.append(acc0)
            out1.append(acc1)
            acc0 = acc1 = 0.0
    if acc0 > 0.0 and out0:
        out0[-1] += acc0
    return np.array(out0), np.array(out1)


def _binned_kl(p0: np.ndarray, p1: np.ndarray, merge_empty: bool = False) -> RocKl:
    if merge_empty:
        p0, p1 = _merge_empty(p0, p1)
    if np.any(p1 <= 0.0):
        raise EmptyBin(
            f"{int(np.sum(p1 <= 0))} bin(s) hold no hypothesis-1 mass; use fewer bins or more samples"
        )
    kl10 = float(np.sum(p1 * np.log(p1 / p0)))
    kl01 = float(np.sum(p0 * np.log(p0 / p1)))
    return RocKl(kl10, kl01)


def roc_kl_estimate(roc: RocEstimate, bins: int = 100, merge_empty: bool = False) -> RocKl:
    """(D(f_L1 || f_L0), D(f_L0 || f_L1)) from the slope of the ROC.

    The false-alarm axis is cut into ``bins`` equal pieces (equal-count bins
    of the hypothesis-0 scores); in each piece the detection increment over
    the false-alarm increment estimates h'(z), the likelihood ratio.  Then
    D(f_L0 || f_L1) = -int log h' dz and D(f_L1 || f_L0) = int h' log h' dz.
    Binning merges outcomes, so both values are biased low; the second
    converges much faster than the first, whose mass sits in the top bin.

    A bin with no detection increment makes -log h' infinite and raises
    :class:`EmptyBin`, unless ``merge_empty`` folds it into its neighbour.
    """
    if bins < 20:
        raise ValidationError(f"bins must be >= 20, got {bins}")
    z = np.linspace(0.0, 1.0, bins + 1)
    det = np.interp(z, roc.false_alarm, roc.detection)
    # the curve is vertical at z = 0 (hits above every false alarm); the bin
    # edges are the end points (0, 0) and (1, 1), not the top of that run
    det[0], det[-1] = 0.0, 1.0
    p0 = np.diff(z)
    p1 = np.diff(det)
    return _binned_kl(p0, p1, merge_empty)


def binned_kl_from_scores(h0: np.ndarray, h1: np.ndarray, bins: int = 100,
                          merge_empty: bool = False) -> RocKl:
    """Same estimate as :func:`roc_kl_estimate`, straight from score arrays."""
    if bins < 20:
        raise ValidationError(f"bins must be >= 20, got {bins}")
    edges = np.quantile(h0, np.linspace(0.0, 1.0, bins + 1)[1:-1])
    p0 = np.full(bins, 1.0 / bins)
    counts = np.bincount(np.searchsorted(edges, h1, side="right"), minlength=bins)
    p1 = counts / h1.size
    return _binned_kl(p0, p1, merge_empty)


def bootstrap_kl_se(samples: LlrtSamples, bins: int = 100, replicates: int = 50,
                    seed: int | None = None, merge_empty: bool = False) -> tuple[float, float]:
    """Bootstrap standard errors of the two binned KL estimates."""
    rng = np.random.default_rng(seed)
    h0, h1 = samples.h0_scores, samples.h1_scores
    vals = []
    for _ in range(replicates):
        b0 = h0[rng.integers(0, h0.size, h0.size)]
        b1 = h1[rng.integers(0, h1.size, h1.size)]
        vals.append(binned_kl_from_scores(b0, b1, bins, merge_empty))
    arr = np.array(vals)
    return float(arr[:, 0].std(ddof=1)), float(arr[:, 1].std(ddof=1))


# ---- single-eigenvalue GAL component ----

def _gal_scale(alpha: float) -> float:
    if not (alpha > 0.0 and math.isfinite(alpha)):
        raise OutOfDomain(f"alpha must be positive and finite, got {alpha!r}")
    return math.sqrt(1.0 / alpha + 0.25)


def gal_pdf(alpha: float, l):
    """Density of one CAM-eigenvalue component of the difference LLRT.

    f(l) = e^{l/2} K0(c |l|) / (pi sqrt(alpha)), c = sqrt(1/alpha + 1/4).
    Evaluated as exp(l/2 - c|l|) * k0e(c|l|) so it never overflows.
    """
    c = _gal_scale(float(alpha))
    arr = np.asarray(l, dtype=float)
    if np.any(arr == 0.0):
        raise OutOfDomain("the density has a logarithmic singularity at l = 0")
    x = c * np.abs(arr)
    out = np.exp(0.5 * arr - x) * k0e(x) / (math.pi * math.sqrt(alpha))
    return float(out) if arr.ndim == 0 else out


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)
_GAL_TAIL_DECAY = 40.0  # integrate out to exp(-40) of the tail envelope


def _gal_support(alpha: float) -> tuple[float, float]:
    c = _gal_scale(alpha)
    return -_GAL_TAIL_DECAY / (c + 0.5), _GAL_TAIL_DECAY / (c - 0.5)


def gal_cdf(alpha: float, x) -> np.ndarray | float:
    """CDF of :func:`gal_pdf` by piecewise 20-point Gauss-Legendre.

    Breakpoints are the query points, a 0.5-spaced grid over the effective
    support, and a geometric grid toward the log singularity at 0.
    """
    alpha = float(alpha)
    arr = np.asarray(x, dtype=float)
    lo, hi = _gal_support(alpha)
    q = np.clip(arr.reshape(-1), lo, hi)
    near_zero = 2.0 ** -np.arange(0, 48)
    grid = np.concatenate([
        q, [lo, hi, 0.0], near_zero, -near_zero,
        np.arange(math.ceil(lo / 0.5) * 0.5, hi, 0.5),
    ])
    grid = np.unique(grid[(grid >= lo) & (grid <= hi)])
    a, b = grid[:-1], grid[1:]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * _GL_NODES
    seg = half * (gal_pdf(alpha, nodes) @ _GL_WEIGHTS)
    cum = np.r_[0.0, np.cumsum(seg)]
    out = np.clip(cum[np.searchsorted(grid, q)], 0.0, 1.0)
    out = out.reshape(arr.shape)
    return float(out) if arr.ndim == 0 else out


def gal_moment(alpha: float, weight) -> float:
    """int weight(l) gal_pdf(alpha, l) dl over the effective support."""
    lo, hi = _gal_support(float(alpha))
    total = 0.0
    # geometric panels toward the singularity, then out to the tails
    for sign, end in ((-1.0, -lo), (1.0, hi)):
        edges = [0.0] + list(2.0 ** -np.arange(47, -1, -1))
        while edges[-1] < end:
            edges.append(min(edges[-1] * 2.0, end))
        for e0, e1 in zip(edges[:-1], edges[1:]):
            def f(u, s=sign):
                u = s * np.asarray(u)
                return weight(u) * gal_pdf(alpha, u)
            v, _ = gauss_kronrod(f, max(e0, 1e-300), e1, abs_tol=1e-15, rel_tol=1e-12)
            total += v
    return total


@dataclass(frozen=True)
class GalCheck:
    lam: float
    alpha: float
    n_samples: int
    ks_distance: float
    ks_threshold: float
    mean: float
    mean_se: float

    @property
    def passed(self) -> bool:
        return self.ks_distance < self.ks_threshold


def sample_gal_component(lam: float, n_samples: int, seed: int | None = None) -> np.ndarray:
    """((lam-1)/2) W^2 - ((1-1/lam)/2) Z^2 with W, Z independent standard normals."""
    lam = float(lam)
    if not (lam > 0.0 and math.isfinite(lam)) or lam == 1.0:
        raise OutOfDomain(f"lambda must be positive and != 1, got {lam!r}")
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(n_samples)
    z = rng.standard_normal(n_samples)
    return 0.5 * (lam - 1.0) * w * w - 0.5 * (1.0 - 1.0 / lam) * z * z


def gal_component_check(lam: float, n_samples: int = 100_000, seed: int | None = None) -> GalCheck:
    """KS distance of sampled components against the integrated GAL CDF.

    The threshold 1.63/sqrt(N) is the asymptotic 1% critical value.
    """
    draws = sample_gal_component(lam, n_samples, seed)
    alpha = (lam - 1.0) ** 2 / lam
    stat = scipy.stats.kstest(draws, lambda t: gal_cdf(alpha, t)).statistic
    return GalCheck(
        lam=float(lam), alpha=alpha, n_samples=n_samples,
        ks_distance=float(stat), ks_threshold=1.63 / math.sqrt(n_samples),
        mean=float(draws.mean()), mean_se=float(draws.std(ddof=1) / math.sqrt(n_samples)),
    )
