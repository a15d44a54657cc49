"""Reference matrix families and CSV input/output."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .divergences import _check_toeplitz_domain
from .errors import BadDiagonal, OutOfDomain, ParseError
from .graph_model import ModelCovariance, path_tree, star_tree
from .matrix_core import CorrelationMatrix, _frozen, validate_correlation


def toeplitz_equicorrelation(n: int, rho: float) -> CorrelationMatrix:
    """Unit diagonal, ``rho`` everywhere else."""
    _check_toeplitz_domain(n, rho)
    m = np.full((n, n), float(rho))
    np.fill_diagonal(m, 1.0)
    return validate_correlation(m)


def star_model(n: int, rho: float) -> ModelCovariance:
    """Star-tree model of the equicorrelation matrix: hub entries rho, leaf pairs rho^2."""
    _check_toeplitz_domain(n, rho)
    m = np.full((n, n), float(rho) ** 2)
    m[0, :] = rho
    m[:, 0] = rho
    np.fill_diagonal(m, 1.0)
    return ModelCovariance(CorrelationMatrix(_frozen(m)), star_tree(n))


def chain_model(n: int, rho: float) -> ModelCovariance:
    """First-order Markov chain model: entry (i, j) = rho^|i-j|."""
    _check_toeplitz_domain(n, rho)
    idx = np.arange(n)
    lag = np.abs(idx[:, None] - idx[None, :])
    m = np.power(float(rho), lag.astype(float))
    return ModelCovariance(CorrelationMatrix(_frozen(m)), path_tree(n))


def random_correlation(n: int, seed=None, factors: int | None = None,
                       loading_scale: float = 0.6,
                       dominant_pair: tuple[int, int] | None = None,
                       dominant_strength: float = 3.0) -> CorrelationMatrix:
    """Correlation of a random latent-factor model F F^T + D, rescaled.

    ``dominant_pair`` adds a private factor shared by that pair only, which
    makes its correlation stand out from the rest.
    """
    if n < 2:
        raise OutOfDomain(f"need n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    k = max(1, n // 2) if factors is None else factors
    load = rng.normal(scale=loading_scale, size=(n, k))
    if dominant_pair is not None:
        i, j = dominant_pair
        extra = np.zeros((n, 1))
        extra[[i, j], 0] = dominant_strength
        load = np.hstack([load, extra])
    cov = load @ load.T + np.diag(rng.uniform(0.3, 1.0, size=n))
    scale = 1.0 / np.sqrt(np.diag(cov))
    corr = cov * scale[:, None] * scale[None, :]
    np.fill_diagonal(corr, 1.0)
    return validate_correlation(0.5 * (corr + corr.T))


@dataclass(frozen=True, eq=False)
class SensorLayout:
    coords: np.ndarray
    sigma_kernel: float = 1.0

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        if c.ndim != 2 or c.shape[1] != 2:
            raise OutOfDomain(f"coordinates must be an (n, 2) array, got shape {c.shape}")
        if c.shape[0] < 2:
            raise OutOfDomain("a layout needs at least two sensors")
        if not np.all(np.isfinite(c)):
            raise OutOfDomain("sensor coordinates must be finite")
        if not (self.sigma_kernel > 0 and math.isfinite(self.sigma_kernel)):
            raise OutOfDomain(f"kernel bandwidth must be positive, got {self.sigma_kernel!r}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @classmethod
    def random(cls, n: int, seed=None, sigma_kernel: float = 1.0) -> "SensorLayout":
        """Both coordinates of every sensor drawn from a standard normal."""
        rng = np.random.default_rng(seed)
        return cls(rng.standard_normal((n, 2)), sigma_kernel)

    def min_distance(self) -> float:
        diff = self.coords[:, None, :] - self.coords[None, :, :]
        d = np.sqrt(np.sum(diff * diff, axis=-1))
        return float(np.min(d[np.triu_indices(self.n, 1)]))


def kernel_network(layout: SensorLayout) -> CorrelationMatrix:
    """Gram matrix exp(-d_ij^2 / (2 sigma^2)) of the sensor positions."""
    diff = layout.coords[:, None, :] - layout.coords[None, :, :]
    sq = np.sum(diff * diff, axis=-1)
    return validate_correlation(np.exp(-sq / (2.0 * layout.sigma_kernel ** 2)))


def _parse_rows(path) -> list[tuple[int, list[float]]]:
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            rows.append((lineno, [float(tok) for tok in text.split(",")]))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: non-numeric entry in {line.strip()!r}") from exc
    return rows


def load_matrix_csv(path, normalize: bool = False) -> CorrelationMatrix:
    """Read an n x n comma-separated matrix; '#' comments and blank lines are skipped.

    With ``normalize`` a covariance is rescaled to D^{-1/2} S D^{-1/2} first.
    """
    rows = _parse_rows(path)
    if not rows:
        raise ParseError(f"{path}: no matrix rows found")
    n = len(rows)
    for lineno, vals in rows:
        if len(vals) != n:
            raise ParseError(f"{path}:{lineno}: expected {n} columns, got {len(vals)}")
    m = np.array([vals for _, vals in rows])
    if normalize:
        d = np.diag(m)
        if np.any(~(d > 0)):
            raise BadDiagonal("cannot normalize: diagonal has non-positive entries")
        scale = 1.0 / np.sqrt(d)
        m = m * scale[:, None] * scale[None, :]
        np.fill_diagonal(m, 1.0)
    return validate_correlation(m)


def write_matrix_csv(path, matrix) -> None:
    """17 significant digits, enough for an exact round trip."""
    m = np.asarray(getattr(matrix, "values", matrix), dtype=float)
    lines = [",".join(f"{v:.17g}" for v in row) for row in m]
    Path(path).write_text("\n".join(lines) + "\n")


def load_layout_csv(path, sigma_kernel: float = 1.0) -> SensorLayout:
    """One "x,y" line per sensor."""
    rows = _parse_rows(path)
    for lineno, vals in rows:
        if len(vals) != 2:
            raise ParseError(f"{path}:{lineno}: expected 'x,y', got {len(vals)} values")
    return SensorLayout(np.array([vals for _, vals in rows]), sigma_kernel)
