"""Static undirected graphs and the structural measures built on them.

All functions are pure: they take an immutable :class:`Graph` and return
fresh (read-only) arrays, so they are safe to call from any number of
workers. The iterative measures (eigenvector centrality, pagerank) are
cached per graph because benchmark runs re-request them every day on the
same static structure.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np

from .exceptions import ConvergenceError

UNREACHABLE = -1

CENTRALITY_METRICS = (
    "degree",
    "betweenness",
    "closeness",
    "eigenvector",
    "harmonic",
    "load",
    "pagerank",
    "clustering_coefficient",
)


def _frozen(values: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(values, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph on nodes ``0..node_count-1``.

    ``edges`` is the canonical edge set: unique ``(u, v)`` pairs with
    ``u < v``, sorted. No self-loops. Use :meth:`from_edges` to build one
    from raw edge pairs.
    """

    node_count: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(
        init=False, compare=False, repr=False
    )

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise ValueError("graph needs at least one node")
        seen = set()
        neighbors: list[list[int]] = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise ValueError(f"edge ({u},{v}) references an unknown node")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if u > v:
                raise ValueError(f"edge ({u},{v}) is not in canonical (u<v) order")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u},{v})")
            seen.add((u, v))
            neighbors[u].append(v)
            neighbors[v].append(u)
        object.__setattr__(
            self, "adjacency", tuple(tuple(sorted(ns)) for ns in neighbors)
        )

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build a graph from raw pairs, canonicalizing order and dropping duplicates."""
        canon = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            canon.add((min(u, v), max(u, v)))
        return cls(node_count=int(node_count), edges=tuple(sorted(canon)))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        return np.array([len(ns) for ns in self.adjacency], dtype=int)

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.node_count, self.node_count))
        for u, v in self.edges:
            a[u, v] = 1.0
            a[v, u] = 1.0
        return a


@dataclass(frozen=True)
class CentralityVector:
    """A per-node structural score (one value per node, read-only)."""

    metric: str
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _frozen(self.values))


@dataclass(frozen=True)
class Partition:
    """Disjoint community assignment with contiguous ids ``0..community_count-1``."""

    community_of: np.ndarray
    community_count: int

    def __post_init__(self) -> None:
        com = np.ascontiguousarray(self.community_of, dtype=int)
        com.setflags(write=False)
        object.__setattr__(self, "community_of", com)
        present = np.unique(com)
        if self.community_count < 1 or not np.array_equal(
            present, np.arange(self.community_count)
        ):
            raise ValueError("community ids must be contiguous 0..count-1")

    def members(self, community: int) -> np.ndarray:
        return np.flatnonzero(self.community_of == community)


# ---------------------------------------------------------------------------
# Shortest paths
# ---------------------------------------------------------------------------


def shortest_path_distances(g: Graph, source: int) -> np.ndarray:
    """Hop distances from ``source``; unreachable nodes get ``UNREACHABLE``."""
    if not 0 <= source < g.node_count:
        raise ValueError(f"source {source} out of range")
    dist = np.full(g.node_count, UNREACHABLE, dtype=int)
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in g.adjacency[v]:
            if dist[w] == UNREACHABLE:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def _bfs_paths(g: Graph, source: int):
    """BFS bookkeeping for Brandes-style accumulation.

    Returns (visit order, distances, shortest-path counts, predecessor lists).
    """
    n = g.node_count
    dist = np.full(n, UNREACHABLE, dtype=int)
    sigma = np.zeros(n)
    preds: list[list[int]] = [[] for _ in range(n)]
    dist[source] = 0
    sigma[source] = 1.0
    order: list[int] = []
    queue = deque([source])
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in g.adjacency[v]:
            if dist[w] == UNREACHABLE:
                dist[w] = dist[v] + 1
                queue.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    return order, dist, sigma, preds


def _all_pairs_counts(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Distance matrix and shortest-path-count matrix (sigma) for all pairs."""
    n = g.node_count
    dist = np.full((n, n), UNREACHABLE, dtype=int)
    sigma = np.zeros((n, n))
    for s in range(n):
        _, d, sg, _ = _bfs_paths(g, s)
        dist[s] = d
        sigma[s] = sg
    return dist, sigma


# ---------------------------------------------------------------------------
# Centralities
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def degree_centrality(g: Graph) -> CentralityVector:
    """Fraction of other nodes each node is directly connected to."""
    if g.node_count < 2:
        raise ValueError("degree centrality is undefined on a single-node graph")
    return CentralityVector("degree", g.degrees() / (g.node_count - 1))


@lru_cache(maxsize=64)
def betweenness_centrality(g: Graph) -> CentralityVector:
    """Unnormalized betweenness over unordered node pairs (Brandes accumulation)."""
    n = g.node_count
    bc = np.zeros(n)
    for s in range(n):
        order, _, sigma, preds = _bfs_paths(g, s)
        delta = np.zeros(n)
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    # each unordered pair was counted from both endpoints
    return CentralityVector("betweenness", bc / 2.0)


@lru_cache(maxsize=64)
def closeness_centrality(g: Graph) -> CentralityVector:
    """Reciprocal of the summed distances to the reachable nodes (0 if isolated)."""
    values = np.zeros(g.node_count)
    for v in range(g.node_count):
        dist = shortest_path_distances(g, v)
        total = dist[dist > 0].sum()
        values[v] = 1.0 / total if total > 0 else 0.0
    return CentralityVector("closeness", values)


@lru_cache(maxsize=64)
def harmonic_centrality(g: Graph) -> CentralityVector:
    """Sum of reciprocal distances to every reachable node."""
    values = np.zeros(g.node_count)
    for v in range(g.node_count):
        dist = shortest_path_distances(g, v)
        reach = dist > 0
        values[v] = (1.0 / dist[reach]).sum() if reach.any() else 0.0
    return CentralityVector("harmonic", values)


@lru_cache(maxsize=64)
def eigenvector_centrality(
    g: Graph, max_iter: int = 1000, tol: float = 1e-9
) -> CentralityVector:
    """Principal-eigenvector scores via normalized power iteration.

    Iterates on A + I rather than A itself: the identity shift leaves the
    principal eigenvector unchanged but keeps the iteration from oscillating
    on bipartite structures (stars, trees), where the raw adjacency matrix
    has a matching negative eigenvalue.
    """
    if g.edge_count == 0:
        raise ValueError("eigenvector centrality needs at least one edge")
    a = g.adjacency_matrix()
    x = np.full(g.node_count, 1.0 / np.sqrt(g.node_count))
    for _ in range(max_iter):
        y = x + a @ x
        y /= np.linalg.norm(y)
        if np.max(np.abs(y - x)) < tol:
            return CentralityVector("eigenvector", y)
        x = y
    raise ConvergenceError(
        f"eigenvector centrality did not converge in {max_iter} iterations", last=x
    )


@lru_cache(maxsize=64)
def load_centrality(g: Graph) -> CentralityVector:
    """Share of all shortest paths (over unordered pairs) routed through each node.

    Every distinct shortest path of every connected pair counts once in the
    denominator; the numerator counts the paths with the node strictly inside.
    """
    n = g.node_count
    dist, sigma = _all_pairs_counts(g)
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    connected = upper & (dist > 0)
    total = sigma[connected].sum()
    values = np.zeros(n)
    if total == 0:
        return CentralityVector("load", values)
    for v in range(n):
        dv = dist[v]
        on_path = (
            (dist > 0)
            & (dv[:, None] > 0)
            & (dv[None, :] > 0)
            & (dv[:, None] + dv[None, :] == dist)
        )
        through = sigma[:, v][:, None] * sigma[v, :][None, :]
        values[v] = through[on_path & upper].sum() / total
    return CentralityVector("load", values)


@lru_cache(maxsize=64)
def pagerank(
    g: Graph, damping: float = 0.85, max_iter: int = 1000, tol: float = 1e-9
) -> CentralityVector:
    """Stationary random-surfer scores; undirected edges act as two links.

    Degree-zero nodes are dangling and spread their mass uniformly over the
    whole graph each step, so the scores always sum to 1.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError("damping must lie strictly between 0 and 1")
    n = g.node_count
    a = g.adjacency_matrix()
    deg = g.degrees().astype(float)
    dangling = deg == 0
    inv_deg = np.where(dangling, 0.0, 1.0 / np.where(dangling, 1.0, deg))
    p = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        spread = a @ (p * inv_deg) + p[dangling].sum() / n
        new = (1.0 - damping) / n + damping * spread
        if np.max(np.abs(new - p)) < tol:
            return CentralityVector("pagerank", new)
        p = new
    raise ConvergenceError(
        f"pagerank did not converge in {max_iter} iterations", last=p
    )


@lru_cache(maxsize=64)
def clustering_coefficient(g: Graph) -> CentralityVector:
    """Local triangle density: 2 T(v) / (deg(v) (deg(v) - 1)); 0 when deg < 2."""
    neighbor_sets = [set(ns) for ns in g.adjacency]
    values = np.zeros(g.node_count)
    for v, ns in enumerate(g.adjacency):
        d = len(ns)
        if d < 2:
            continue
        triangles = 0
        for i in range(d):
            for j in range(i + 1, d):
                if ns[j] in neighbor_sets[ns[i]]:
                    triangles += 1
        values[v] = 2.0 * triangles / (d * (d - 1))
    return CentralityVector("clustering_coefficient", values)


def centrality(g: Graph, metric: str) -> CentralityVector:
    """Compute any of the supported centralities by name."""
    try:
        fn = _CENTRALITY_FUNCTIONS[metric]
    except KeyError:
        raise ValueError(
            f"unknown centrality {metric!r}; expected one of {CENTRALITY_METRICS}"
        ) from None
    return fn(g)


_CENTRALITY_FUNCTIONS = {
    "degree": degree_centrality,
    "betweenness": betweenness_centrality,
    "closeness": closeness_centrality,
    "eigenvector": eigenvector_centrality,
    "harmonic": harmonic_centrality,
    "load": load_centrality,
    "pagerank": pagerank,
    "clustering_coefficient": clustering_coefficient,
}


# ---------------------------------------------------------------------------
# Community detection
# ---------------------------------------------------------------------------


def modularity(g: Graph, community_of: np.ndarray) -> float:
    """Newman modularity of a community assignment."""
    m = g.edge_count
    if m == 0:
        raise ValueError("modularity is undefined on an edgeless graph")
    community_of = np.asarray(community_of, dtype=int)
    deg = g.degrees()
    q = 0.0
    for c in np.unique(community_of):
        members = community_of == c
        internal = sum(
            1 for u, v in g.edges if members[u] and members[v]
        )
        deg_sum = deg[members].sum()
        q += internal / m - (deg_sum / (2.0 * m)) ** 2
    return q


@lru_cache(maxsize=64)
def modularity_partition(g: Graph) -> Partition:
    """Greedy modularity agglomeration (CNM-style), deterministic.

    Starts from singleton communities and repeatedly merges the connected
    pair with the largest positive modularity gain; ties go to the smallest
    community-id pair. Community ids during agglomeration are the smallest
    member node id, and the result is relabeled to contiguous ids ordered
    by smallest member. An edgeless graph yields singletons.
    """
    n = g.node_count
    owner = list(range(n))  # node -> community id (smallest member id)
    if g.edge_count == 0:
        return Partition(np.arange(n), n)

    m = float(g.edge_count)
    deg = g.degrees().astype(float)
    deg_sum = {c: deg[c] for c in range(n)}
    # between[a][b] = number of edges between communities a and b (a != b)
    between: dict[int, dict[int, float]] = {c: {} for c in range(n)}
    for u, v in g.edges:
        between[u][v] = between[u].get(v, 0.0) + 1.0
        between[v][u] = between[v].get(u, 0.0) + 1.0

    alive = set(range(n))
    while len(alive) > 1:
        best_gain = 0.0
        best_pair = None
        # pairs are scanned in lexicographic order, so on equal gain the
        # smallest (a, b) pair wins by keeping the first maximum
        for a in sorted(alive):
            for b in sorted(between[a]):
                if b <= a:
                    continue
                gain = between[a][b] / m - 2.0 * deg_sum[a] * deg_sum[b] / (2.0 * m) ** 2
                if gain > best_gain:
                    best_gain = gain
                    best_pair = (a, b)
        if best_pair is None or best_gain <= 0.0:
            break
        a, b = best_pair
        # fold b into a
        for c, w in between[b].items():
            if c == a:
                continue
            between[a][c] = between[a].get(c, 0.0) + w
            between[c][a] = between[c].get(a, 0.0) + w
            del between[c][b]
        between[a].pop(b, None)
        del between[b]
        deg_sum[a] += deg_sum[b]
        del deg_sum[b]
        alive.remove(b)
        for node in range(n):
            if owner[node] == b:
                owner[node] = a

    ids = sorted(alive)
    relabel = {c: i for i, c in enumerate(ids)}
    community_of = np.array([relabel[owner[v]] for v in range(n)], dtype=int)
    return Partition(community_of, len(ids))
