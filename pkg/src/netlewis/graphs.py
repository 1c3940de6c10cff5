"""Random graph generators with controlled node and edge counts.

Three families are supported: Erdos-Renyi (ER), Watts-Strogatz (WS) and
Barabasi-Albert (BA). Each generator takes its free parameter directly;
``er_param``, ``ws_param`` and ``ba_param`` map a target ``(n, e)`` onto
those parameters.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ConfigurationError(ValueError):
    """Raised when a requested (n, e) cannot be realized by a generator."""


class TopologyKind(str, enum.Enum):
    ER = "er"
    WS = "ws"
    BA = "ba"
    RANDOM = "random"  # no graph, uniform pairing


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph over nodes ``0..n-1``."""

    n: int
    adjacency: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs))

    @classmethod
    def from_unique_edges(cls, n: int, u: np.ndarray, v: np.ndarray) -> "Graph":
        """Fast path for edge arrays already free of loops and duplicates."""
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        order = np.lexsort((dst, src))
        bounds = np.cumsum(np.bincount(src, minlength=n))[:-1]
        return cls(n, tuple(tuple(a.tolist()) for a in np.split(dst[order], bounds)))

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    def edges(self) -> list[tuple[int, int]]:
        """Edge list with ``u < v``, in ascending order."""
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]


@dataclass
class GraphParams:
    n: int
    e: int
    p_er: float | None = None
    k_ws: int | None = None
    p_rewire_ws: float = 0.1
    m_ba: int | None = None
    warnings: list[str] = field(default_factory=list)


def er_param(n: int, e: int) -> float:
    """Edge probability ``p = e / (n^2 / 2)``.

    The denominator approximates C(n, 2) by n^2/2, so the realized expected
    edge count is ``e * (n - 1) / n``, slightly below ``e``.
    """
    if n < 2 or e < 0:
        raise ConfigurationError(f"ER needs n >= 2 and e >= 0, got (n={n}, e={e})")
    p = e / (n * n / 2)
    if p > 1:
        raise ConfigurationError(f"ER probability {p:.4g} > 1 for (n={n}, e={e})")
    return p


def ws_param(n: int, e: int) -> int:
    """Ring degree ``k = 2e / n``; must be an even integer below n."""
    if n < 3:
        raise ConfigurationError(f"WS needs n >= 3, got (n={n}, e={e})")
    if (2 * e) % n:
        raise ConfigurationError(f"WS degree 2e/n is not an integer for (n={n}, e={e})")
    k = 2 * e // n
    if k % 2 or not 0 < k < n:
        raise ConfigurationError(f"WS degree k={k} must be even and in (0, n) for (n={n}, e={e})")
    return k


def ba_param(n: int, e: int) -> int:
    """Floor of the smaller root of ``m^2 - n m + e = 0``.

    A BA graph with attachment count m has ``m (n - m)`` edges, which is at
    most ``e`` once the root is floored.
    """
    if n < 2:
        raise ConfigurationError(f"BA needs n >= 2, got (n={n}, e={e})")
    disc = n * n - 4 * e
    if disc < 0:
        raise ConfigurationError(f"BA has no real attachment count for (n={n}, e={e}): n^2 < 4e")
    m = math.floor((n - math.sqrt(disc)) / 2)
    # guard against sqrt rounding when the root is an exact integer
    while (m + 1) * (n - (m + 1)) <= e and m + 1 <= n / 2:
        m += 1
    if not 1 <= m < n:
        raise ConfigurationError(f"BA attachment count m={m} out of range for (n={n}, e={e})")
    return m


def resolve_params(kind: TopologyKind | str, n: int, e: int, p_rewire_ws: float = 0.1) -> GraphParams:
    """Compute generator parameters for ``kind`` and note any edge-count mismatch."""
    kind = TopologyKind(kind)
    params = GraphParams(n=n, e=e, p_rewire_ws=p_rewire_ws)
    if kind is TopologyKind.ER:
        params.p_er = er_param(n, e)
        expected = params.p_er * n * (n - 1) / 2
        params.warnings.append(
            f"ER: p={params.p_er:.6g} from e/(n^2/2); expected edges {expected:.4g} instead of {e}"
        )
    elif kind is TopologyKind.WS:
        params.k_ws = ws_param(n, e)
    elif kind is TopologyKind.BA:
        params.m_ba = ba_param(n, e)
        realized = params.m_ba * (n - params.m_ba)
        if realized != e:
            params.warnings.append(f"BA: m={params.m_ba} gives {realized} edges instead of {e}")
    return params


def generate_er(n: int, p: float, rng: np.random.Generator) -> Graph:
    if not 0.0 <= p <= 1.0:
        raise ConfigurationError(f"ER probability must lie in [0, 1], got {p}")
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return Graph.from_unique_edges(n, iu[keep], ju[keep])


def generate_ws(n: int, k: int, p_rewire: float, rng: np.random.Generator) -> Graph:
    """Ring lattice of degree k with each lattice edge rewired with probability p_rewire.

    A rewired edge ``(u, v)`` keeps ``u`` and moves its other end to a node
    drawn uniformly among those that are neither ``u`` nor already adjacent
    to it, so the edge count stays ``n k / 2``.
    """
    if k % 2 or not 0 < k < n:
        raise ConfigurationError(f"WS degree k={k} must be even and in (0, n)")
    if not 0.0 <= p_rewire <= 1.0:
        raise ConfigurationError(f"WS rewiring probability must lie in [0, 1], got {p_rewire}")
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for u in range(n):
        for j in range(1, k // 2 + 1):
            v = (u + j) % n
            nbrs[u].add(v)
            nbrs[v].add(u)
    for j in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + j) % n
            if v not in nbrs[u] or rng.random() >= p_rewire:
                continue
            if len(nbrs[u]) >= n - 1:
                continue
            choices = [w for w in range(n) if w != u and w not in nbrs[u]]
            w = choices[int(rng.integers(len(choices)))]
            nbrs[u].discard(v)
            nbrs[v].discard(u)
            nbrs[u].add(w)
            nbrs[w].add(u)
    return Graph(n, tuple(tuple(sorted(s)) for s in nbrs))


def generate_ba(n: int, m: int, rng: np.random.Generator) -> Graph:
    """Preferential attachment from ``m`` isolated seed nodes.

    Node ``m`` joins every seed node; each later node picks ``m`` distinct
    targets with probability proportional to their current degree.
    """
    if not 1 <= m < n:
        raise ConfigurationError(f"BA attachment count m={m} must satisfy 1 <= m < n={n}")
    edges: list[tuple[int, int]] = []
    # each node appears once per incident edge endpoint
    endpoints: list[int] = []
    targets = list(range(m))
    for new in range(m, n):
        for t in targets:
            edges.append((t, new))
        endpoints.extend(targets)
        endpoints.extend([new] * m)
        chosen: set[int] = set()
        picked: list[int] = []
        while len(picked) < m:
            t = endpoints[int(rng.integers(len(endpoints)))]
            if t not in chosen:
                chosen.add(t)
                picked.append(t)
        targets = picked
    return Graph.from_edges(n, edges)


def generate(kind: TopologyKind | str, params: GraphParams, rng: np.random.Generator) -> Graph:
    kind = TopologyKind(kind)
    if kind is TopologyKind.ER:
        return generate_er(params.n, params.p_er, rng)
    if kind is TopologyKind.WS:
        return generate_ws(params.n, params.k_ws, params.p_rewire_ws, rng)
    if kind is TopologyKind.BA:
        return generate_ba(params.n, params.m_ba, rng)
    raise ConfigurationError("the random baseline has no graph")


def degree_distribution(g: Graph) -> dict[int, int]:
    """Histogram mapping degree to the number of nodes with that degree."""
    return dict(sorted(Counter(len(a) for a in g.adjacency).items()))


def dump_graph(g: Graph, path: str | Path) -> None:
    edges = g.edges()
    lines = [f"{g.n} {len(edges)}"] + [f"{u} {v}" for u, v in edges]
    Path(path).write_text("\n".join(lines) + "\n")


def load_graph(path: str | Path) -> Graph:
    lines = Path(path).read_text().split("\n")
    n, e = (int(x) for x in lines[0].split())
    edges = [tuple(int(x) for x in line.split()) for line in lines[1:] if line.strip()]
    if len(edges) != e:
        raise ValueError(f"{path}: header announces {e} edges, found {len(edges)}")
    return Graph.from_edges(n, edges)
