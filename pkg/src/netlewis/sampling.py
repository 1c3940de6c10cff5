"""Training schedules: ordered lists of agent pairs."""

from __future__ import annotations

import numpy as np

from .graphs import Graph


def softmax(scores) -> np.ndarray:
    s = np.asarray(scores, dtype=float)
    if s.size == 0:
        raise ValueError("softmax of an empty vector")
    if not np.all(np.isfinite(s)):
        raise ValueError("softmax needs finite scores")
    z = np.exp(s - s.max())
    return z / z.sum()


def first_endpoint_probs(g: Graph, scores) -> np.ndarray:
    """Softmax of the scores restricted to non-isolated nodes, renormalized."""
    scores = np.asarray(scores, dtype=float)
    if scores.shape != (g.n,):
        raise ValueError(f"expected {g.n} scores, got shape {scores.shape}")
    active = g.degrees() > 0
    if not active.any():
        raise ValueError("cannot sample pairs from an edgeless graph")
    probs = np.zeros(g.n)
    probs[active] = softmax(scores[active])
    return probs


def sample_schedule(g: Graph, scores, count: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Draw ``count`` edges with replacement.

    The first endpoint follows the softmaxed centrality; the second is a
    uniform neighbour of the first.
    """
    probs = first_endpoint_probs(g, scores)
    firsts = rng.choice(g.n, size=count, p=probs)
    pairs = []
    for u in firsts:
        nbrs = g.adjacency[u]
        v = nbrs[int(rng.integers(len(nbrs)))]
        pairs.append((int(u), int(v)))
    return pairs


def random_baseline_schedule(n: int, count: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Uniform unordered pairs over all ``n`` agents, ignoring any graph."""
    if n < 2:
        raise ValueError("random pairing needs at least 2 agents")
    iu, ju = np.triu_indices(n, k=1)
    idx = rng.integers(iu.size, size=count)
    return [(int(iu[i]), int(ju[i])) for i in idx]
