"""The ensemble learner: K parallel score functions trained on K data subsets,
tied together by an agreement regularizer on their adjacency matrices.

Each learner carries its own dual-ascent state (penalty weight ``rho_k`` and
Lagrange multiplier ``lambda2_k``). The agreement term penalizes the squared
Frobenius distance between a learner's adjacency and the ensemble mean; the
mean is detached, i.e. treated as a constant in every gradient, so each
learner is pulled toward the (frozen) consensus rather than the consensus
chasing the learner. A zero agreement sum is equivalent to all adjacency
matrices being equal, which is exactly the agreement-across-subsets property
the ensemble exists to enforce.

After training, the K adjacency matrices are averaged and thresholded into a
single binary graph; a deterministic repair drops the weakest cycle edge until
the result is certifiably acyclic.
"""

from __future__ import annotations

import numpy as np

from .adjacency import BinaryDag, BinaryGraph, is_acyclic, threshold_edges
from .errors import InvalidInputError
from .metrics import shd
from .scores import ScoreHyper, make_score, score_from_dict
from .seeding import derive_seed

CHECKPOINT_FORMAT = "transdag-ensemble-1"


def mean_adjacency(learners) -> np.ndarray:
    """Elementwise mean of the learners' adjacency matrices (a plain constant array)."""
    if not learners:
        raise InvalidInputError("need at least one learner")
    return np.mean([learner.adjacency() for learner in learners], axis=0)


def mse_regularizer(a_k, a_bar):
    """Squared Frobenius distance to the (detached) mean, with its gradient.

    Returns ``(value, grad)`` where ``grad = 2 (A_k - A_bar)`` flows to the
    learner only; the mean is a constant here.
    """
    a_k = np.asarray(a_k, dtype=float)
    a_bar = np.asarray(a_bar, dtype=float)
    if a_k.shape != a_bar.shape:
        raise InvalidInputError(f"shape mismatch: {a_k.shape} vs {a_bar.shape}")
    diff = a_k - a_bar
    return float(np.sum(diff * diff)), 2.0 * diff


class DagEnsemble:
    """K score functions plus ensemble hyperparameters and dual-ascent state."""

    def __init__(self, learners, *, alpha=1.0, omega=0.3, rho=None, lam2=None):
        if not learners:
            raise InvalidInputError("ensemble needs at least one learner")
        d = learners[0].d
        variant = learners[0].variant
        for learner in learners:
            if learner.d != d or learner.variant != variant:
                raise InvalidInputError("all learners must share d and variant")
        if not np.isfinite(alpha) or alpha < 0:
            raise InvalidInputError("alpha must be a nonnegative real")
        if not np.isfinite(omega) or omega < 0:
            raise InvalidInputError("omega must be a nonnegative real")
        self.learners = list(learners)
        self.alpha = float(alpha)
        self.omega = float(omega)
        k = len(self.learners)
        self.rho = np.ones(k) if rho is None else np.asarray(rho, dtype=float).copy()
        self.lam2 = np.zeros(k) if lam2 is None else np.asarray(lam2, dtype=float).copy()
        if self.rho.shape != (k,) or self.lam2.shape != (k,):
            raise InvalidInputError("dual state must have one entry per learner")

    @classmethod
    def create(cls, *, variant="mlp", d, K, hyper=None, alpha=1.0, omega=0.3, seed=0):
        """Build K fresh learners with per-learner derived init seeds."""
        if K < 1:
            raise InvalidInputError("K must be at least 1")
        hyper = hyper if hyper is not None else ScoreHyper()
        learners = [
            make_score(variant, d, hyper=hyper, seed=derive_seed(seed, f"learner-{k}"))
            for k in range(K)
        ]
        return cls(learners, alpha=alpha, omega=omega)

    @property
    def size(self) -> int:
        return len(self.learners)

    @property
    def d(self) -> int:
        return self.learners[0].d

    def mean_adjacency(self) -> np.ndarray:
        return mean_adjacency(self.learners)

    def combined_loss(self, k: int, batch):
        """Learner k's full loss at its current parameters, with gradient.

        The ensemble mean is recomputed from the current learners and then
        frozen for this gradient.
        """
        learner = self.learners[k]
        value, grad = learner.objective(batch, self.rho[k], self.lam2[k])
        if self.alpha > 0:
            a_bar = self.mean_adjacency()
            reg, upstream = mse_regularizer(learner.adjacency(), a_bar)
            value += self.alpha * reg
            grad = grad + learner.adjacency_backward(self.alpha * upstream)
        return value, grad

    def subproblem_fun(self, k: int, batch, a_bar):
        """Objective closure over learner k's flat parameters, mean held at ``a_bar``."""
        learner = self.learners[k]

        def fun(x):
            learner.set_params_vector(x)
            value, grad = learner.objective(batch, self.rho[k], self.lam2[k])
            if self.alpha > 0:
                reg, upstream = mse_regularizer(learner.adjacency(), a_bar)
                value += self.alpha * reg
                grad = grad + learner.adjacency_backward(self.alpha * upstream)
            return value, grad

        return fun

    def mean_graph(self, omega: float | None = None) -> BinaryGraph:
        """Thresholded mean adjacency before any cycle repair; may be cyclic."""
        omega = self.omega if omega is None else omega
        return threshold_edges(self.mean_adjacency(), omega)

    def to_checkpoint(self) -> dict:
        return {
            "format": CHECKPOINT_FORMAT,
            "alpha": self.alpha,
            "omega": self.omega,
            "hyper": self.learners[0].hyper.to_dict(),
            "rho": self.rho.tolist(),
            "lambda2": self.lam2.tolist(),
            "init_seeds": [learner.init_seed for learner in self.learners],
            "learners": [learner.to_dict() for learner in self.learners],
        }

    @classmethod
    def from_checkpoint(cls, payload: dict) -> "DagEnsemble":
        if payload.get("format") != CHECKPOINT_FORMAT:
            raise InvalidInputError(f"unrecognized checkpoint format {payload.get('format')!r}")
        hyper = ScoreHyper.from_dict(payload["hyper"])
        learners = [score_from_dict(entry, hyper=hyper) for entry in payload["learners"]]
        return cls(
            learners,
            alpha=payload["alpha"],
            omega=payload["omega"],
            rho=payload["rho"],
            lam2=payload["lambda2"],
        )


def _cycle_edges(graph: BinaryGraph):
    """Edges lying on at least one directed cycle (head reaches tail)."""
    children = {v: [] for v in range(graph.d)}
    for i, j in graph.edges:
        children[i].append(j)

    def reaches(src, dst):
        stack = [src]
        seen = {src}
        while stack:
            v = stack.pop()
            if v == dst:
                return True
            for w in children[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False

    return [(i, j) for i, j in graph.edges if reaches(j, i)]


def combine_graphs(model: DagEnsemble, omega: float | None = None) -> BinaryDag:
    """Average the learners' adjacencies, threshold, and certify a DAG.

    If thresholding leaves cycles, the smallest-magnitude edge participating
    in a cycle is dropped (ties broken lexicographically) until none remain.
    """
    omega = model.omega if omega is None else omega
    a_bar = model.mean_adjacency()
    graph = threshold_edges(a_bar, omega)
    edges = set(graph.edges)
    while True:
        current = BinaryGraph(d=graph.d, edges=frozenset(edges))
        if is_acyclic(current):
            return BinaryDag.from_graph(current)
        cyclic = _cycle_edges(current)
        edges.remove(min(cyclic, key=lambda e: (abs(a_bar[e[0], e[1]]), e)))


def transportability_check(model: DagEnsemble, omega: float | None = None):
    """Threshold each learner's adjacency and compare the binary graphs.

    Returns ``(identical, pairwise)`` where ``pairwise`` is the K x K matrix of
    structural Hamming distances between learner graphs.
    """
    omega = model.omega if omega is None else omega
    graphs = [threshold_edges(learner.adjacency(), omega) for learner in model.learners]
    k = len(graphs)
    pairwise = np.zeros((k, k), dtype=int)
    for i in range(k):
        for j in range(i + 1, k):
            pairwise[i, j] = pairwise[j, i] = shd(graphs[i], graphs[j])
    identical = all(g.edges == graphs[0].edges for g in graphs[1:])
    return identical, pairwise
