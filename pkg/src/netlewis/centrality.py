"""Node centrality scores used to bias pair sampling."""

from __future__ import annotations

import enum
from collections import deque

import numpy as np

from .graphs import Graph


class CentralityKind(str, enum.Enum):
    DEGREE = "degree"
    BETWEENNESS = "betweenness"
    PAGERANK = "pagerank"
    UNIFORM = "uniform"


class ConvergenceError(RuntimeError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(f"PageRank did not converge in {iterations} iterations (L1 residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


def degree_centrality(g: Graph) -> np.ndarray:
    if g.n < 2:
        raise ValueError("degree centrality needs at least 2 nodes")
    return g.degrees() / (g.n - 1)


def betweenness_centrality(g: Graph) -> np.ndarray:
    """Brandes' algorithm for unweighted graphs, normalized by 2/((n-1)(n-2)).

    Returns zeros for n < 3 where the normalization is undefined.
    """
    n = g.n
    bc = np.zeros(n)
    if n < 3:
        return bc
    adj = g.adjacency
    for s in range(n):
        stack = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = np.zeros(n)
        sigma[s] = 1.0
        dist = np.full(n, -1, dtype=np.int64)
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = np.zeros(n)
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    # every unordered pair was counted from both ends
    return bc / ((n - 1) * (n - 2))


def pagerank(g: Graph, damping: float = 0.85, tol: float = 1e-10, max_iter: int = 10_000) -> np.ndarray:
    """Power iteration with isolated nodes spreading their mass uniformly."""
    if not 0.0 < damping < 1.0:
        raise ValueError(f"damping must lie in (0, 1), got {damping}")
    n = g.n
    deg = g.degrees().astype(float)
    src = np.repeat(np.arange(n), g.degrees())
    dst = np.fromiter((w for a in g.adjacency for w in a), dtype=np.int64, count=src.size)
    dangling = deg == 0
    inv_deg = np.divide(1.0, deg, out=np.zeros(n), where=~dangling)
    x = np.full(n, 1.0 / n)
    residual = np.inf
    for _ in range(max_iter):
        spread = np.bincount(dst, weights=(x * inv_deg)[src], minlength=n)
        new = damping * (spread + x[dangling].sum() / n) + (1.0 - damping) / n
        residual = np.abs(new - x).sum()
        x = new
        if residual < tol:
            return x / x.sum()
    raise ConvergenceError(max_iter, residual)


def uniform_scores(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one node")
    return np.full(n, 1.0 / n)


def compute(kind: CentralityKind | str, g: Graph, damping: float = 0.85, tol: float = 1e-10,
            max_iter: int = 10_000) -> np.ndarray:
    kind = CentralityKind(kind)
    if kind is CentralityKind.DEGREE:
        return degree_centrality(g)
    if kind is CentralityKind.BETWEENNESS:
        return betweenness_centrality(g)
    if kind is CentralityKind.PAGERANK:
        return pagerank(g, damping, tol, max_iter)
    return uniform_scores(g.n)
