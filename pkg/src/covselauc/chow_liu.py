"""Chow-Liu tree for a Gaussian: maximum spanning tree under pairwise mutual information."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCorrelation, InvalidStructure
from .graph_model import TreeStructure, _DisjointSet
from .matrix_core import _as_correlation


@dataclass(frozen=True, order=True)
class WeightedEdge:
    u: int
    v: int
    weight: float

    def __post_init__(self):
        if not self.weight >= 0.0:
            raise ValueError(f"mutual information weight must be >= 0, got {self.weight!r}")


def mutual_info_weight(rho: float) -> float:
    """Mutual information (nats) of a bivariate normal with correlation ``rho``."""
    rho = float(rho)
    if not abs(rho) < 1.0:
        raise DegenerateCorrelation(f"|rho| must be below 1, got {rho!r}")
    return -0.5 * math.log1p(-rho * rho)


def pairwise_weights(sigma) -> list[WeightedEdge]:
    s = _as_correlation(sigma).values
    n = s.shape[0]
    out = []
    for u in range(n):
        for v in range(u + 1, n):
            rho = s[u, v] / math.sqrt(s[u, u] * s[v, v])
            try:
                w = mutual_info_weight(rho)
            except DegenerateCorrelation as exc:
                raise DegenerateCorrelation(f"pair ({u},{v}): {exc}") from None
            out.append(WeightedEdge(u, v, w))
    return out


def chow_liu_tree(sigma) -> TreeStructure:
    """Kruskal on descending weight; ties broken by (u, v) ascending.

    With all weights equal (equicorrelation) the result is the star at vertex 0.
    """
    sigma = _as_correlation(sigma)
    n = sigma.n
    if n < 2:
        raise InvalidStructure("Chow-Liu needs at least two variables")
    edges = sorted(pairwise_weights(sigma), key=lambda e: (-e.weight, e.u, e.v))
    ds = _DisjointSet(n)
    chosen = []
    for e in edges:
        if ds.union(e.u, e.v):
            chosen.append((e.u, e.v))
            if len(chosen) == n - 1:
                break
    return TreeStructure(n, tuple(chosen))


def tree_weight(sigma, tree) -> float:
    """Total mutual information of the tree's edges."""
    s = np.asarray(_as_correlation(sigma).values)
    return sum(mutual_info_weight(s[u, v]) for u, v in tree.edges)
