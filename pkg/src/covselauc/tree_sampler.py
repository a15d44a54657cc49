"""Spanning trees of the complete graph: exact uniform draws, an edge-swap
chain, exhaustive enumeration, and per-tree quality metrics."""
from __future__ import annotations

import csv
import itertools
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .divergences import divergences_from_spectrum
from .errors import CovselError, InvalidStructure, TooLarge
from .graph_model import TreeStructure, _canonical, covariance_select
from .matrix_core import _as_correlation, spectrum_of
from .spectral_auc import auc_complement

logger = logging.getLogger(__name__)

MAX_ENUMERATE = 8


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def uniform_spanning_tree(n: int, seed=None) -> TreeStructure:
    """Uniform draw over all n^(n-2) labelled trees (Wilson's loop-erased walks).

    Edges are returned as (child, parent) pairs toward vertex 0.
    """
    if n < 2:
        raise InvalidStructure(f"need n >= 2, got {n}")
    rng = _rng(seed)
    in_tree = [False] * n
    in_tree[0] = True
    nxt = [-1] * n
    for start in range(1, n):
        u = start
        while not in_tree[u]:
            # uniform neighbour on the complete graph: any vertex but u
            v = int(rng.integers(n - 1))
            nxt[u] = v + (v >= u)
            u = nxt[u]
        # retrace; overwritten pointers have already erased the loops
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = nxt[u]
    return TreeStructure(n, tuple((u, nxt[u]) for u in range(1, n)))


def _component(adj: list[set], root: int, banned: tuple[int, int]) -> set:
    seen = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if (u, v) == banned or (v, u) == banned or v in seen:
                continue
            seen.add(v)
            stack.append(v)
    return seen


def edge_swap_chain(n: int, count: int, seed=None, burn_in: int | None = None,
                    thin: int | None = None) -> list[TreeStructure]:
    """Markov chain over spanning trees with a uniform stationary law.

    A move deletes a uniform edge and reconnects the two halves by a uniform
    cross edge.  The reverse move cuts the same partition, so the proposal is
    symmetric and every move is accepted.  Defaults: burn-in 10 n, thinning n.
    """
    rng = _rng(seed)
    burn_in = 10 * n if burn_in is None else burn_in
    thin = n if thin is None else thin
    edges = [(i, i + 1) for i in range(n - 1)]
    adj = [set() for _ in range(n)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)

    def step():
        k = int(rng.integers(len(edges)))
        u, v = edges[k]
        side = _component(adj, u, (u, v))
        other = [w for w in range(n) if w not in side]
        side = sorted(side)
        a = side[int(rng.integers(len(side)))]
        b = other[int(rng.integers(len(other)))]
        adj[u].discard(v)
        adj[v].discard(u)
        adj[a].add(b)
        adj[b].add(a)
        edges[k] = _canonical(a, b)

    out = []
    if n < 2:
        raise InvalidStructure(f"need n >= 2, got {n}")
    for _ in range(burn_in):
        step()
    while len(out) < count:
        for _ in range(thin):
            step()
        out.append(TreeStructure(n, tuple(edges)))
    return out


def prufer_decode(seq, n: int) -> TreeStructure:
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = next(i for i in range(n) if degree[i] == 1)
        edges.append(_canonical(leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = (i for i in range(n) if degree[i] == 1)
    edges.append((u, v))
    return TreeStructure(n, tuple(edges))


def enumerate_spanning_trees(n: int) -> list[TreeStructure]:
    """Every labelled tree on n <= 8 vertices once, via Prufer sequences."""
    if n > MAX_ENUMERATE:
        raise TooLarge(f"enumeration is limited to n <= {MAX_ENUMERATE} ({n}^{n - 2} trees requested)")
    if n < 2:
        raise InvalidStructure(f"need n >= 2, got {n}")
    return [prufer_decode(seq, n) for seq in itertools.product(range(n), repeat=n - 2)]


@dataclass
class TreeEnsemble:
    n: int
    trees: list = field(default_factory=list)
    kl: list = field(default_factory=list)
    auc: list = field(default_factory=list)
    log10_one_minus_auc: list = field(default_factory=list)
    failures: int = 0

    def __len__(self) -> int:
        return len(self.trees)

    def write_csv(self, path_or_stream) -> None:
        def emit(fh):
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["tree_id", "edges", "kl", "auc", "log10_one_minus_auc"])
            for i, (t, kl, auc, lg) in enumerate(zip(self.trees, self.kl, self.auc,
                                                     self.log10_one_minus_auc)):
                edges = ";".join(f"{u}-{v}" for u, v in t.canonical())
                w.writerow([i, edges, repr(kl), repr(auc), repr(lg)])

        if hasattr(path_or_stream, "write"):
            emit(path_or_stream)
        else:
            with open(Path(path_or_stream), "w", newline="") as fh:
                emit(fh)


def ensemble_metrics(sigma, trees, seed=None) -> TreeEnsemble:
    """KL and AUC of the covariance-selection model on each tree.

    Trees whose model cannot be built are skipped, logged and counted.  The
    computation is deterministic, so ``seed`` is accepted only for interface
    symmetry with the samplers.
    """
    sigma = _as_correlation(sigma)
    out = TreeEnsemble(sigma.n)
    for idx, tree in enumerate(trees):
        try:
            model = covariance_select(sigma, tree)
            spec = spectrum_of(sigma, model)
            kl = divergences_from_spectrum(spec).kl
            tail = auc_complement(spec)
        except CovselError as exc:
            out.failures += 1
            logger.warning("tree %d skipped: %s", idx, exc)
            continue
        out.trees.append(tree)
        out.kl.append(kl)
        out.auc.append(1.0 - tail)
        out.log10_one_minus_auc.append(math.log10(tail) if tail > 0 else -math.inf)
    if out.failures:
        logger.warning("%d of %d trees skipped", out.failures, out.failures + len(out.trees))
    return out
