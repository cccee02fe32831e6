"""Weighted and binary adjacency matrices, plus the differentiable acyclicity score.

The central quantity is ``tr(exp(A o A)) - d`` for a weighted adjacency matrix
A with zero diagonal (``o`` is the elementwise product): it is zero exactly
when the weighted graph is acyclic, strictly positive otherwise, and smooth in
A, so a gradient-based learner can push a candidate structure onto the DAG
manifold. ``is_acyclic`` is the exact combinatorial oracle used to validate
the continuous score.

Conventions: entry ``A[i, j]`` is the weight of the edge from variable ``i``
to variable ``j``; binary graphs are sets of ``(tail, head)`` pairs with
0-based node indices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


def _as_square_matrix(m, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise InvalidInputError(f"{name} must be square and non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def _require_adjacency(a) -> np.ndarray:
    arr = _as_square_matrix(a, "adjacency")
    if np.any(np.diagonal(arr) != 0.0):
        raise InvalidInputError("adjacency matrix must have an exactly zero diagonal")
    return arr


def matrix_exp(m, *, max_terms: int = 40, term_tol: float = 1e-16) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with a truncated Taylor series.

    The argument is halved until its 1-norm is at most 0.5, the Taylor series
    is summed until the next term falls below ``term_tol`` relative to the
    running sum (at most ``max_terms`` terms), and the result is squared back
    up. Relative error is ~1e-12 or better for 1-norms up to ~50, which covers
    every matrix this package feeds it.
    """
    a = _as_square_matrix(m)
    d = a.shape[0]
    norm = np.linalg.norm(a, 1)
    squarings = 0
    if norm > 0.5:
        squarings = int(np.ceil(np.log2(norm / 0.5)))
        a = a / (2.0**squarings)
    result = np.eye(d)
    term = np.eye(d)
    for k in range(1, max_terms + 1):
        term = term @ a / k
        result = result + term
        if np.linalg.norm(term, 1) <= term_tol * np.linalg.norm(result, 1):
            break
    for _ in range(squarings):
        result = result @ result
    return result


def acyclicity_penalty(a) -> float:
    """``tr(exp(A o A)) - d``: zero iff the weighted graph is acyclic.

    The elementwise square makes the penalty insensitive to weight signs and
    keeps it nonnegative up to floating-point noise (no worse than -1e-10).
    """
    arr = _require_adjacency(a)
    e = matrix_exp(arr * arr)
    return float(np.trace(e) - arr.shape[0])


def acyclicity_penalty_grad(a) -> np.ndarray:
    """Exact gradient of :func:`acyclicity_penalty`: ``exp(A o A)^T o 2A``.

    The diagonal of the result is zero because the diagonal of a valid
    adjacency matrix is.
    """
    arr = _require_adjacency(a)
    e = matrix_exp(arr * arr)
    return e.T * (2.0 * arr)


@dataclass(frozen=True)
class BinaryGraph:
    """Directed graph on ``d`` nodes as a set of ``(tail, head)`` pairs.

    May contain cycles; :class:`BinaryDag` is the certified acyclic variant.
    """

    d: int
    edges: frozenset

    def __post_init__(self):
        if int(self.d) < 1:
            raise InvalidInputError("graph needs at least one node")
        object.__setattr__(self, "d", int(self.d))
        clean = frozenset((int(i), int(j)) for i, j in self.edges)
        for i, j in clean:
            if not (0 <= i < self.d and 0 <= j < self.d):
                raise InvalidInputError(f"edge ({i}, {j}) out of range for d={self.d}")
            if i == j:
                raise InvalidInputError(f"self-loop ({i}, {i}) not allowed")
        object.__setattr__(self, "edges", clean)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> np.ndarray:
        out = np.zeros((self.d, self.d))
        for i, j in self.edges:
            out[i, j] = 1.0
        return out

    def to_dict(self) -> dict:
        return {"d": self.d, "edges": sorted([i, j] for i, j in self.edges)}

    @classmethod
    def from_dict(cls, payload: dict) -> "BinaryGraph":
        return cls(d=payload["d"], edges=frozenset((i, j) for i, j in payload["edges"]))


@dataclass(frozen=True)
class BinaryDag(BinaryGraph):
    """A :class:`BinaryGraph` whose constructor certifies acyclicity."""

    def __post_init__(self):
        super().__post_init__()
        if not is_acyclic(self):
            raise InvalidInputError("graph contains a directed cycle")

    @classmethod
    def from_graph(cls, graph: BinaryGraph) -> "BinaryDag":
        return cls(d=graph.d, edges=graph.edges)


def is_acyclic(graph: BinaryGraph) -> bool:
    """True iff a topological order exists (Kahn's algorithm)."""
    indegree = [0] * graph.d
    children = [[] for _ in range(graph.d)]
    for i, j in graph.edges:
        children[i].append(j)
        indegree[j] += 1
    stack = [v for v in range(graph.d) if indegree[v] == 0]
    visited = 0
    while stack:
        v = stack.pop()
        visited += 1
        for w in children[v]:
            indegree[w] -= 1
            if indegree[w] == 0:
                stack.append(w)
    return visited == graph.d


def threshold_edges(a, omega: float) -> BinaryGraph:
    """Keep edge (i, j) iff ``|A[i, j]| > omega``; the result may be cyclic."""
    arr = _as_square_matrix(a, "adjacency")
    if not np.isfinite(omega) or omega < 0:
        raise InvalidInputError("threshold must be a nonnegative real")
    d = arr.shape[0]
    edges = frozenset(
        (i, j) for i in range(d) for j in range(d) if i != j and abs(arr[i, j]) > omega
    )
    return BinaryGraph(d=d, edges=edges)


def topological_order(graph: BinaryGraph) -> list:
    """A topological order with ascending-index tie-breaking; raises on cycles."""
    indegree = [0] * graph.d
    children = [[] for _ in range(graph.d)]
    for i, j in graph.edges:
        children[i].append(j)
        indegree[j] += 1
    ready = sorted(v for v in range(graph.d) if indegree[v] == 0)
    order = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        added = False
        for w in sorted(children[v]):
            indegree[w] -= 1
            if indegree[w] == 0:
                ready.append(w)
                added = True
        if added:
            ready.sort()
    if len(order) != graph.d:
        raise InvalidInputError("graph contains a directed cycle")
    return order
