"""Small generators of graph path metrics and trees used as fixtures and chart sources."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

from .hyperbolicity import ConnectivityError
from .metric import FiniteMetricSpace


def path_metric(n: int, edges: Sequence, labels: Optional[Sequence[str]] = None) -> FiniteMetricSpace:
    """Shortest-path metric of an undirected weighted graph.

    ``edges`` holds ``(u, v)`` or ``(u, v, weight)`` index tuples.
    """
    rows, cols, vals = [], [], []
    for e in edges:
        u, v = int(e[0]), int(e[1])
        wt = float(e[2]) if len(e) > 2 else 1.0
        rows.append(u)
        cols.append(v)
        vals.append(wt)
    adj = coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    d = shortest_path(adj, method="D", directed=False)
    if not np.all(np.isfinite(d)):
        raise ConnectivityError("graph is disconnected")
    if labels is None:
        labels = [f"v{i}" for i in range(n)]
    return FiniteMetricSpace(labels=labels, dist=d)


def tree_space(parents: Sequence[int], weights: Optional[Sequence[float]] = None, labels=None) -> FiniteMetricSpace:
    """Tree metric from a parent array (``parents[0]`` is ignored; node 0 is the root)."""
    n = len(parents)
    if weights is None:
        weights = [1.0] * n
    edges = [(i, parents[i], weights[i]) for i in range(1, n)]
    return path_metric(n, edges, labels)


def random_tree(n: int, rng: np.random.Generator, weighted: bool = False) -> FiniteMetricSpace:
    parents = [0] + [int(rng.integers(0, i)) for i in range(1, n)]
    weights = rng.uniform(0.5, 2.0, size=n).tolist() if weighted else None
    return tree_space(parents, weights)


def binary_tree(depth: int) -> tuple[FiniteMetricSpace, list[str]]:
    """Complete rooted binary tree with unit edges; returns the space and its leaf labels.

    Node labels are bit strings of the path from the root, which is ``"r"``.
    """
    labels = ["r"]
    parents = [0]
    for level in range(1, depth + 1):
        start = 2 ** (level - 1) - 1
        for k in range(2**level):
            parent = 0 if level == 1 else start + k // 2
            parents.append(parent)
            labels.append(format(k, f"0{level}b"))
    space = tree_space(parents, labels=labels)
    leaves = [l for l in labels if len(l) == depth and l != "r"]
    return space, leaves


def star(n_leaves: int, leg: float = 1.0) -> FiniteMetricSpace:
    edges = [(0, i, leg) for i in range(1, n_leaves + 1)]
    return path_metric(n_leaves + 1, edges, ["c"] + [f"l{i}" for i in range(n_leaves)])


def cycle(n: int) -> FiniteMetricSpace:
    return path_metric(n, [(i, (i + 1) % n) for i in range(n)])
