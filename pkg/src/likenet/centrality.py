"""Likedness centrality solver and the eigenvector-centrality contrast model.

Likedness centrality is the fixed point of

    value[i] = sum_j rates[i, j] * value[j] / sum_j adjacency[i, j] * value[j]

where rates[i, j] is the rate at which agent j "likes" agent i. The
right-hand side is invariant to rescaling the whole vector, but the
equation itself pins the raw magnitudes to rate units; the reported
vector is normalized to sum to 1.

No closed form is available in general, so the solver runs damped
successive substitution. A batched variant solves many rate matrices
over one graph simultaneously, which is what makes finite-difference
stability sweeps cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph

__all__ = [
    "RateMatrix",
    "CentralityVector",
    "SolverOptions",
    "SolverError",
    "DegenerateSystemError",
    "NonConvergenceError",
    "likedness_centrality",
    "eigenvector_centrality",
    "solve_rate_batch",
    "write_rates_dense",
    "write_rates_triplets",
    "read_rates",
]


class SolverError(ValueError):
    """Invalid solver inputs."""


class DegenerateSystemError(SolverError):
    """Every candidate denominator is zero (graph has no edges)."""


class NonConvergenceError(RuntimeError):
    """Iteration budget exhausted where the contract requires convergence."""


@dataclass(frozen=True)
class SolverOptions:
    """Damped successive-substitution controls.

    tolerance bounds the fixed-point residual max|F(v) - v| at the
    returned raw iterate; the successive-iterate step is `relaxation`
    times that residual, so both readings agree up to the damping
    factor.
    """

    tolerance: float = 1e-10
    max_iterations: int = 10_000
    relaxation: float = 0.5

    def __post_init__(self):
        if not self.tolerance > 0:
            raise SolverError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_iterations < 1:
            raise SolverError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not 0.0 < self.relaxation <= 1.0:
            raise SolverError(f"relaxation must be in (0, 1], got {self.relaxation}")


@dataclass(eq=False)
class RateMatrix:
    """Nonnegative directed like-rates supported on a companion graph's edges.

    values[i, j] is the rate at which agent j likes agent i. The
    diagonal is zero and entries off the companion edge set must be
    zero; zero rates on edges are allowed.
    """

    n: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.n, self.n):
            raise SolverError(f"rate matrix shape {v.shape} != ({self.n}, {self.n})")
        if (v < 0).any():
            raise SolverError("rate matrix entries must be nonnegative")
        if np.diag(v).any():
            raise SolverError("rate matrix diagonal must be zero")
        v = v.copy()
        v.flags.writeable = False
        self.values = v

    def check_support(self, g: Graph) -> None:
        """Raise unless entries are confined to g's edges."""
        if g.n != self.n:
            raise SolverError(f"graph has {g.n} nodes, rate matrix has {self.n}")
        off_support = self.values * (1.0 - g.adjacency)
        if off_support.any():
            i, j = np.argwhere(off_support)[0]
            raise SolverError(f"nonzero rate at non-edge ({i}, {j})")

    def replace_entry(self, row: int, col: int, value: float) -> "RateMatrix":
        v = self.values.copy()
        v[row, col] = value
        return RateMatrix(n=self.n, values=v)


@dataclass(frozen=True)
class CentralityVector:
    """Per-node centrality values.

    `values` is normalized to sum to 1 (all-zero vectors stay zero);
    `raw` carries the unnormalized fixed-point iterate in rate units,
    which is what the solver's residual guarantee refers to.
    """

    values: np.ndarray
    raw: np.ndarray
    converged: bool
    iterations: int


def _normalize(raw: np.ndarray) -> np.ndarray:
    total = raw.sum()
    if total > 0:
        return raw / total
    return np.zeros_like(raw)


def solve_rate_batch(
    g: Graph, rate_stack: np.ndarray, opts: SolverOptions
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Solve the likedness fixed point for a stack of rate matrices.

    rate_stack has shape (batch, n, n), all sharing the graph g.
    Returns (raw_values, converged, iterations) with shapes
    (batch, n), (batch,), (batch,). Rows are frozen as soon as their
    residual max|F(v) - v| drops to opts.tolerance, so each row equals
    the corresponding single solve.
    """
    if not g.edges:
        raise DegenerateSystemError("graph has no edges; every denominator is zero")
    adj = g.adjacency
    n = g.n
    batch = rate_stack.shape[0]
    isolated = g.degrees == 0

    values = np.full((batch, n), 1.0 / n)
    values[:, isolated] = 0.0
    active = np.ones(batch, dtype=bool)
    converged = np.zeros(batch, dtype=bool)
    iterations = np.zeros(batch, dtype=np.int64)
    omega = opts.relaxation

    for _ in range(opts.max_iterations + 1):
        numer = np.einsum("bij,bj->bi", rate_stack, values)
        denom = values @ adj.T
        safe = denom > 0.0
        fixed = np.where(safe, numer / np.where(safe, denom, 1.0), 0.0)
        fixed[:, isolated] = 0.0

        residual = np.abs(fixed - values).max(axis=1)
        settled = active & (residual <= opts.tolerance)
        converged |= settled
        active &= ~settled

        step = active & (iterations < opts.max_iterations)
        if not step.any():
            break
        updated = (1.0 - omega) * values + omega * fixed
        values = np.where(step[:, None], updated, values)
        iterations = np.where(step, iterations + 1, iterations)

    return values, converged, iterations


def likedness_centrality(
    g: Graph, rates: RateMatrix, opts: SolverOptions | None = None
) -> CentralityVector:
    """Solve for likedness centrality by damped successive substitution.

    Starts from the uniform vector, holds isolated nodes at exactly
    zero, and normalizes the reported values to sum to 1. When the
    iteration budget runs out the best iterate is returned with
    converged=False rather than raising; ensemble records carry the
    flag.
    """
    opts = opts or SolverOptions()
    rates.check_support(g)
    raw, conv, iters = solve_rate_batch(g, rates.values[None, :, :], opts)
    raw0 = raw[0]
    return CentralityVector(
        values=_normalize(raw0),
        raw=raw0,
        converged=bool(conv[0]),
        iterations=int(iters[0]),
    )


def eigenvector_centrality(
    g: Graph, rates: RateMatrix, opts: SolverOptions | None = None
) -> CentralityVector:
    """Dominant-eigenvector centrality of the rate matrix, by power iteration.

    This is the inflation-prone reference model that likedness
    centrality replaces. The iteration runs on rates + shift*I (shift
    equal to the largest entry) so that periodic structures such as
    bipartite graphs cannot stall it; the shift leaves eigenvectors
    unchanged. Raises NonConvergenceError at the iteration cap.
    """
    opts = opts or SolverOptions()
    rates.check_support(g)
    matrix = rates.values
    shift = float(matrix.max())
    if shift <= 0.0:
        raise DegenerateSystemError("rate matrix is zero; no dominant eigenvector")
    shifted = matrix + shift * np.eye(g.n)
    vec = np.full(g.n, 1.0 / g.n)
    for it in range(1, opts.max_iterations + 1):
        nxt = shifted @ vec
        total = nxt.sum()
        if total <= 0.0:
            raise DegenerateSystemError("power iteration collapsed to zero")
        nxt /= total
        if np.abs(nxt - vec).max() <= opts.tolerance:
            return CentralityVector(values=nxt, raw=nxt, converged=True, iterations=it)
        vec = nxt
    raise NonConvergenceError(
        f"power iteration did not converge in {opts.max_iterations} iterations"
    )


def write_rates_dense(rates: RateMatrix, path) -> None:
    """Dense CSV: n rows of n comma-separated entries."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in rates.values:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def write_rates_triplets(rates: RateMatrix, path) -> None:
    """Sparse text: one 'i j rate' line per nonzero entry, plus header."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"n={rates.n}\n")
        rows, cols = np.nonzero(rates.values)
        for i, j in zip(rows, cols):
            fh.write(f"{i} {j} {float(rates.values[i, j])!r}\n")


def read_rates(path) -> RateMatrix:
    """Read a rate matrix from dense CSV (.csv) or sparse triplet text."""
    path = str(path)
    if path.endswith(".csv"):
        rows = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rows.append([float(x) for x in line.split(",")])
        values = np.array(rows)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise SolverError(f"dense rate CSV must be square, got {values.shape}")
        return RateMatrix(n=values.shape[0], values=values)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("n="):
            raise SolverError(f"expected 'n=<N>' header in triplet file, got {header!r}")
        n = int(header[2:])
        values = np.zeros((n, n))
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            i, j, rate = line.split()
            values[int(i), int(j)] = float(rate)
    return RateMatrix(n=n, values=values)
