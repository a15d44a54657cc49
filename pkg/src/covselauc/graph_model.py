"""Edge sets, spanning trees and covariance selection onto a structure.

The model covariance for a structure E keeps the diagonal and the entries on E,
and has zero precision entries off E.  For trees (and forests) it is built by
the edge-by-edge precision update

    J_r = J_{r-1} + [Sigma_{ij}^{-1}] - [Sigma_ii^{-1}] - [Sigma_jj^{-1}],

starting from J_0 = diag(Sigma)^{-1}, where [.] pads a principal block with zeros.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    InvalidStructure,
    NotPositiveDefinite,
    ParseError,
    SingularSubmatrix,
)
from .matrix_core import CorrelationMatrix, _as_correlation, _frozen

logger = logging.getLogger(__name__)

RULE_TOL = 1e-8


def _canonical(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


@dataclass(frozen=True)
class EdgeSet:
    """Undirected simple edges over vertices 0..n-1, kept in the given order."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise InvalidStructure(f"vertex count must be positive, got {self.n}")
        seen = set()
        clean = []
        for e in self.edges:
            try:
                u, v = (int(x) for x in e)
            except (TypeError, ValueError) as exc:
                raise InvalidStructure(f"malformed edge {e!r}") from exc
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidStructure(f"edge ({u},{v}) has an endpoint outside [0, {self.n})")
            if u == v:
                raise InvalidStructure(f"self-loop at vertex {u}")
            key = _canonical(u, v)
            if key in seen:
                raise InvalidStructure(f"duplicate edge {key}")
            seen.add(key)
            clean.append((u, v))
        object.__setattr__(self, "edges", tuple(clean))

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.edges)

    def __contains__(self, pair) -> bool:
        u, v = pair
        return _canonical(u, v) in self.edge_keys

    @property
    def edge_keys(self) -> frozenset:
        return frozenset(_canonical(u, v) for u, v in self.edges)

    def canonical(self) -> tuple[tuple[int, int], ...]:
        """Sorted (min, max) pairs; equal for equal edge sets."""
        return tuple(sorted(_canonical(u, v) for u, v in self.edges))

    def is_forest(self) -> bool:
        ds = _DisjointSet(self.n)
        return all(ds.union(u, v) for u, v in self.edges)

    def is_spanning_tree(self) -> bool:
        return len(self.edges) == self.n - 1 and self.is_forest()

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj


@dataclass(frozen=True)
class TreeStructure(EdgeSet):
    """Spanning tree: exactly n-1 edges, connected and acyclic."""

    def __post_init__(self):
        super().__post_init__()
        if len(self.edges) != self.n - 1:
            raise InvalidStructure(
                f"a spanning tree on {self.n} vertices needs {self.n - 1} edges, got {len(self.edges)}"
            )
        if not self.is_forest():
            raise InvalidStructure("edge set contains a cycle, so it is not a spanning tree")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable) -> "TreeStructure":
        return cls(n, tuple(tuple(e) for e in edges))


def star_tree(n: int, hub: int = 0) -> TreeStructure:
    return TreeStructure(n, tuple((hub, v) for v in range(n) if v != hub))


def path_tree(n: int) -> TreeStructure:
    return TreeStructure(n, tuple((i, i + 1) for i in range(n - 1)))


class SelectionViolations(NamedTuple):
    """Largest violation of each covariance-selection rule."""

    diagonal: float
    in_structure: float
    inverse_zero: float

    def max(self) -> float:
        return max(self)

    def holds(self, tol: float = RULE_TOL) -> bool:
        return self.max() <= tol


@dataclass(frozen=True, eq=False)
class ModelCovariance:
    """Covariance-selection model Sigma_M for ``structure``.

    ``violations`` is filled by :func:`covariance_select`; ``conforms`` is False
    only for cyclic structures where the edge recursion does not reproduce the
    selection rules.
    """

    base: CorrelationMatrix
    structure: EdgeSet
    violations: SelectionViolations | None = field(default=None)

    @property
    def values(self) -> np.ndarray:
        return self.base.values

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def conforms(self) -> bool:
        return self.violations is None or self.violations.holds()

    def __array__(self, dtype=None, copy=None):
        return self.base.__array__(dtype)


def _check_structure(sigma: CorrelationMatrix, structure: EdgeSet) -> None:
    if not isinstance(structure, EdgeSet):
        raise InvalidStructure(f"expected an EdgeSet, got {type(structure).__name__}")
    if structure.n != sigma.n:
        raise InvalidStructure(
            f"structure is over {structure.n} vertices but the matrix has dimension {sigma.n}"
        )


def selection_steps(sigma, structure: EdgeSet) -> Iterator[np.ndarray]:
    """Yield the precision matrices J_0, J_1, ..., one per applied edge."""
    sigma = _as_correlation(sigma)
    _check_structure(sigma, structure)
    s = sigma.values
    d = np.diag(s)
    prec = np.diag(1.0 / d)
    yield prec.copy()
    for i, j in structure.edges:
        det = s[i, i] * s[j, j] - s[i, j] * s[j, i]
        if det <= 1e-14 * s[i, i] * s[j, j]:
            raise SingularSubmatrix(
                f"2x2 block on edge ({i},{j}) is singular (|rho| = {abs(s[i, j]) / np.sqrt(s[i, i] * s[j, j]):.6g})"
            )
        prec[i, i] += s[j, j] / det - 1.0 / s[i, i]
        prec[j, j] += s[i, i] / det - 1.0 / s[j, j]
        prec[i, j] -= s[i, j] / det
        prec[j, i] -= s[i, j] / det
        yield prec.copy()


def verify_selection_rules(sigma, model: ModelCovariance) -> SelectionViolations:
    sigma = _as_correlation(sigma)
    s, m = sigma.values, np.asarray(model.base.values)
    if s.shape != m.shape:
        raise DimensionMismatch(f"dimensions differ: {s.shape} vs {m.shape}")
    n = s.shape[0]
    diag = float(np.max(np.abs(np.diag(m) - np.diag(s))))
    inside = np.zeros((n, n), dtype=bool)
    for u, v in model.structure.edges:
        inside[u, v] = inside[v, u] = True
    in_struct = float(np.max(np.abs(m - s)[inside])) if inside.any() else 0.0
    outside = ~inside & ~np.eye(n, dtype=bool)
    if outside.any():
        try:
            prec = scipy.linalg.cho_solve(scipy.linalg.cho_factor(m), np.eye(n))
        except np.linalg.LinAlgError:
            prec = np.linalg.inv(m)
        zero = float(np.max(np.abs(prec[outside])))
    else:
        zero = 0.0
    return SelectionViolations(diag, in_struct, zero)


def covariance_select(sigma, structure: EdgeSet, strict: bool = True) -> ModelCovariance:
    """Covariance-selection model of ``sigma`` on ``structure``.

    Exact for forests.  For cyclic edge sets the recursion is still applied,
    the selection rules are checked, and a violation raises
    :class:`InvalidStructure` (``strict=True``) or is logged and recorded on
    the returned model (``strict=False``).
    """
    sigma = _as_correlation(sigma)
    _check_structure(sigma, structure)
    n = sigma.n
    if len(structure.canonical()) == n * (n - 1) // 2:
        # complete graph: no zero constraints, the model is sigma itself
        return ModelCovariance(sigma, structure, verify_selection_rules(sigma, ModelCovariance(sigma, structure)))
    prec = None
    for prec in selection_steps(sigma, structure):
        pass
    prec = 0.5 * (prec + prec.T)
    try:
        cho = scipy.linalg.cho_factor(prec)
    except np.linalg.LinAlgError as exc:
        raise InvalidStructure(
            f"precision recursion is not positive definite for this structure: {exc}"
        ) from exc
    m = scipy.linalg.cho_solve(cho, np.eye(n))
    m = 0.5 * (m + m.T)
    model = ModelCovariance(CorrelationMatrix(_frozen(m)), structure)
    report = verify_selection_rules(sigma, model)
    if not structure.is_forest() and not report.holds():
        msg = (
            "cyclic structure: edge recursion violates the selection rules "
            f"(diagonal {report.diagonal:.3g}, in-structure {report.in_structure:.3g}, "
            f"inverse-zero {report.inverse_zero:.3g})"
        )
        if strict:
            raise InvalidStructure(msg)
        logger.warning(msg)
    return ModelCovariance(model.base, structure, report)


def tree_path_product(sigma, tree: TreeStructure) -> ModelCovariance:
    """Tree model from path products of edge correlations (closed form).

    Used as an independent check of :func:`covariance_select` on trees.
    """
    sigma = _as_correlation(sigma)
    if not isinstance(tree, EdgeSet) or not tree.is_spanning_tree():
        raise InvalidStructure("tree_path_product needs a spanning tree")
    _check_structure(sigma, tree)
    s = sigma.values
    n = sigma.n
    adj = tree.adjacency()
    m = np.eye(n)
    for root in range(n):
        seen = [False] * n
        seen[root] = True
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    m[root, v] = m[root, u] * s[u, v]
                    queue.append(v)
    return ModelCovariance(CorrelationMatrix(_frozen(m)), tree)


def read_edges(path, n: int | None = None) -> EdgeSet:
    """Read "u,v" lines (0-based).  Blank lines and '#' comments are skipped.

    Returns a :class:`TreeStructure` when the edges span ``n`` vertices as a
    tree, otherwise a plain :class:`EdgeSet`.
    """
    edges = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected 'u,v', got {line!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: non-integer vertex in {line!r}") from exc
    if n is None:
        n = 1 + max((max(e) for e in edges), default=0)
    es = EdgeSet(n, tuple(edges))
    if es.is_spanning_tree():
        return TreeStructure(n, es.edges)
    return es


def write_edges(path, structure: EdgeSet) -> None:
    lines = [f"# {structure.n} vertices, {len(structure)} edges"]
    lines += [f"{u},{v}" for u, v in structure.edges]
    Path(path).write_text("\n".join(lines) + "\n")


def log_det(m) -> float:
    sign, val = np.linalg.slogdet(np.asarray(m, dtype=float))
    if sign <= 0:
        raise NotPositiveDefinite("matrix determinant is not positive")
    return float(val)
