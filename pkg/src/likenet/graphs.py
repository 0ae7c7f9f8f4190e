"""Undirected graph construction and structural metrics.

Graphs here are small (tens of nodes), immutable, and always indexed
0..n-1. Generators cover the two topologies used by the ensemble
experiments: preferential-attachment graphs and stars. Metrics are
exact (per-node breadth-first search, direct triangle counting).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "Graph",
    "GraphMetrics",
    "GraphError",
    "DisconnectedGraphError",
    "generate_ba",
    "generate_star",
    "mean_path_length",
    "mean_local_clustering",
    "degree_stddev",
    "degree_histogram",
    "compute_metrics",
    "write_edge_list",
    "read_edge_list",
]


class GraphError(ValueError):
    """Invalid graph construction or incompatible graph arguments."""


class DisconnectedGraphError(GraphError):
    """Raised when an operation requires a connected graph."""


@dataclass(frozen=True)
class Graph:
    """Undirected, unweighted graph on nodes 0..n-1.

    Edges are stored once as (i, j) with i < j, sorted. Instances are
    immutable and safe to share between worker processes.
    """

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise GraphError(f"node count must be positive, got {self.n}")
        seen = set()
        canonical = []
        for edge in self.edges:
            i, j = edge
            if i == j:
                raise GraphError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise GraphError(f"edge {edge} out of range for n={self.n}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen.add(key)
            canonical.append(key)
        object.__setattr__(self, "edges", tuple(sorted(canonical)))

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Dense symmetric 0/1 adjacency matrix (float, read-only)."""
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i, j] = 1.0
            a[j, i] = 1.0
        a.flags.writeable = False
        return a

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return tuple(tuple(sorted(b)) for b in nbrs)

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.array([len(b) for b in self.neighbors], dtype=np.int64)
        d.flags.writeable = False
        return d

    def has_edge(self, i: int, j: int) -> bool:
        return j in self.neighbors[i]

    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        return bool((_bfs_distances(self, 0) >= 0).all())


def generate_ba(n: int, k: int, seed) -> Graph:
    """Grow a preferential-attachment graph on n nodes.

    Starts from a complete graph on the first k nodes (a single edge
    for k=2). Each subsequent node attaches to k distinct existing
    nodes, drawn sequentially without replacement with probability
    proportional to current degree. Deterministic for a given seed.
    """
    if k < 1 or n < k:
        raise GraphError(f"require n >= k >= 1, got n={n}, k={k}")
    rng = np.random.default_rng(seed)
    degrees = np.zeros(n, dtype=np.int64)
    edges = []
    for i in range(k):
        for j in range(i + 1, k):
            edges.append((i, j))
            degrees[i] += 1
            degrees[j] += 1
    for new in range(k, n):
        pool = list(range(new))
        targets = []
        for _ in range(k):
            weights = degrees[pool].astype(float)
            total = weights.sum()
            if total <= 0.0:
                # all-zero degrees (k=1 seed): fall back to uniform
                probs = np.full(len(pool), 1.0 / len(pool))
            else:
                probs = weights / total
            pick = int(rng.choice(len(pool), p=probs))
            targets.append(pool.pop(pick))
        for t in targets:
            edges.append((min(new, t), max(new, t)))
            degrees[new] += 1
            degrees[t] += 1
    return Graph(n=n, edges=tuple(edges))


def generate_star(n: int) -> Graph:
    """Star on n nodes: node 0 is the hub, nodes 1..n-1 are leaves."""
    if n < 2:
        raise GraphError(f"star requires n >= 2, got n={n}")
    return Graph(n=n, edges=tuple((0, i) for i in range(1, n)))


def _bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Geodesic distances from source; -1 marks unreachable nodes."""
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = [source]
    while frontier:
        nxt = []
        for u in frontier:
            for v in g.neighbors[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist


def mean_path_length(g: Graph) -> float:
    """Average geodesic distance over all unordered distinct pairs."""
    if g.n < 2:
        raise GraphError("mean path length undefined for n < 2")
    total = 0
    for source in range(g.n):
        dist = _bfs_distances(g, source)
        if (dist < 0).any():
            raise DisconnectedGraphError("graph is disconnected")
        total += int(dist.sum())
    # each unordered pair counted twice
    return total / (g.n * (g.n - 1))


def mean_local_clustering(g: Graph) -> float:
    """Mean local clustering coefficient; degree-<2 nodes contribute 0."""
    coeffs = []
    for node in range(g.n):
        nbrs = g.neighbors[node]
        d = len(nbrs)
        if d < 2:
            coeffs.append(0.0)
            continue
        links = 0
        for a in range(d):
            for b in range(a + 1, d):
                if g.has_edge(nbrs[a], nbrs[b]):
                    links += 1
        coeffs.append(links / (d * (d - 1) / 2))
    return float(np.mean(coeffs))


def degree_stddev(g: Graph) -> float:
    """Population standard deviation of the degree sequence."""
    return float(np.std(g.degrees))


def degree_histogram(g: Graph) -> list[int]:
    """Count of nodes per degree value, indexed 0..n-1."""
    hist = [0] * g.n
    for d in g.degrees:
        hist[int(d)] += 1
    return hist


@dataclass(frozen=True)
class GraphMetrics:
    """Structural summary used by the ensemble records."""

    degree_histogram: tuple[int, ...]
    degree_stddev: float
    mean_path_length: float
    mean_local_clustering: float
    connected: bool


def compute_metrics(g: Graph) -> GraphMetrics:
    connected = g.is_connected()
    return GraphMetrics(
        degree_histogram=tuple(degree_histogram(g)),
        degree_stddev=degree_stddev(g),
        mean_path_length=mean_path_length(g) if connected and g.n > 1 else float("inf"),
        mean_local_clustering=mean_local_clustering(g),
        connected=connected,
    )


def write_edge_list(g: Graph, path) -> None:
    """Write the text edge-list format: header 'n=<N>', one 'i j' per line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"n={g.n}\n")
        for i, j in g.edges:
            fh.write(f"{i} {j}\n")


def read_edge_list(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("n="):
            raise GraphError(f"expected 'n=<N>' header, got {header!r}")
        n = int(header[2:])
        edges = []
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            i, j = line.split()
            edges.append((int(i), int(j)))
    return Graph(n=n, edges=tuple(edges))
