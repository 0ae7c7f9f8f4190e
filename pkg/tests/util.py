"""Shared helpers for the test suite: random instances and the
independent fixed-point oracle used to cross-check the solver."""

import numpy as np

from likenet.centrality import RateMatrix
from likenet.graphs import Graph


def random_connected_graph(n, rng):
    """Random connected graph: spanning tree plus a few extra edges."""
    while True:
        edges = set()
        order = list(rng.permutation(n))
        for idx in range(1, n):
            a, b = order[idx], order[int(rng.integers(idx))]
            edges.add((min(a, b), max(a, b)))
        for _ in range(int(rng.integers(0, n))):
            a, b = int(rng.integers(n)), int(rng.integers(n))
            if a != b:
                edges.add((min(a, b), max(a, b)))
        g = Graph(n=n, edges=tuple(sorted(edges)))
        if g.is_connected():
            return g


def random_rates(g, rng, low=0.05, high=3.0):
    values = np.zeros((g.n, g.n))
    for i, j in g.edges:
        values[i, j] = rng.uniform(low, high)
        values[j, i] = rng.uniform(low, high)
    return RateMatrix(n=g.n, values=values)


def undamped_fixed_point(g, rates, tol, max_iter=500_000):
    """Independent oracle: plain substitution, no damping, no batching.

    Returns (raw_values, converged). Deliberately written as a direct
    translation of the defining equation.
    """
    adj = g.adjacency
    values = np.full(g.n, 1.0 / g.n)
    values[g.degrees == 0] = 0.0
    for _ in range(max_iter):
        numer = rates.values @ values
        denom = adj @ values
        nxt = np.where(denom > 0, numer / np.where(denom > 0, denom, 1.0), 0.0)
        nxt[g.degrees == 0] = 0.0
        if np.abs(nxt - values).max() <= tol:
            return nxt, True
        values = nxt
    return values, False
