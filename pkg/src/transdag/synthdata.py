"""Ground-truth generation: random DAGs, index-model structural equations,
and ancestral data simulation.

Graphs come in two flavors: Erdos-Renyi (a uniform random topological order,
then independent Bernoulli edges over the order-respecting pairs at a rate
matching the requested expected edge count) and scale-free (preferential
attachment with exponent 1, one attachment per arriving node, edges oriented
from new to old so hubs collect in-edges).

Each child variable follows an index model: three bounded basis functions
(tanh, cos, sin) applied to separate linear combinations of the parents, with
coefficients drawn from +-[0.5, 2] and additive Gaussian noise. Parentless
variables are pure noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adjacency import BinaryDag, topological_order
from .errors import InvalidInputError
from .seeding import derive_seed


@dataclass(frozen=True)
class GraphSpec:
    kind: str  # "er" | "sf"
    d: int
    expected_edges: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("er", "sf"):
            raise InvalidInputError(f"unknown graph kind {self.kind!r}")
        if self.d < 2:
            raise InvalidInputError("need at least two variables")
        if self.kind == "er":
            max_edges = self.d * (self.d - 1) / 2
            if not 0 < self.expected_edges <= max_edges:
                raise InvalidInputError(
                    f"expected_edges must lie in (0, {max_edges}] for d={self.d}"
                )


def sample_er_dag(spec: GraphSpec) -> BinaryDag:
    """Random topological order + independent order-respecting edges."""
    if spec.kind != "er":
        raise InvalidInputError("spec.kind must be 'er'")
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(spec.d)
    pairs = [(order[a], order[b]) for a in range(spec.d) for b in range(a + 1, spec.d)]
    p = spec.expected_edges / len(pairs)
    keep = rng.random(len(pairs)) < p
    edges = frozenset(pair for pair, kept in zip(pairs, keep) if kept)
    return BinaryDag(d=spec.d, edges=edges)


def sample_sf_dag(d: int, seed: int = 0) -> BinaryDag:
    """Scale-free DAG: degree-proportional attachment, one edge per arrival.

    Starts from the seed pair {0, 1}; node t >= 2 attaches to one existing
    node chosen with probability proportional to its (undirected) degree, so
    the result is a tree with d - 1 edges, acyclic by arrival order.
    """
    if d < 2:
        raise InvalidInputError("need at least two nodes")
    rng = np.random.default_rng(seed)
    degree = np.zeros(d)
    degree[0] = degree[1] = 1.0
    edges = {(1, 0)}
    for new in range(2, d):
        weights = degree[:new] / degree[:new].sum()
        target = int(rng.choice(new, p=weights))
        edges.add((new, target))
        degree[new] += 1.0
        degree[target] += 1.0
    return BinaryDag(d=d, edges=frozenset(edges))


@dataclass(frozen=True)
class SemSystem:
    """Ground-truth DAG plus index-model coefficients and the noise scale.

    ``coeffs[j]`` is a (3, len(parents[j])) array: one coefficient row per
    basis function. Only variables with parents appear in ``parents``.
    """

    dag: BinaryDag
    parents: dict
    coeffs: dict
    noise_scale: float = 1.0

    def __post_init__(self):
        if not self.noise_scale >= 0:
            raise InvalidInputError("noise scale must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "dag": self.dag.to_dict(),
            "noise_scale": self.noise_scale,
            "equations": {
                str(j): {"parents": list(self.parents[j]), "theta": self.coeffs[j].tolist()}
                for j in sorted(self.parents)
            },
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "SemSystem":
        dag = BinaryDag.from_dict(payload["dag"])
        parents = {}
        coeffs = {}
        for key, entry in payload["equations"].items():
            j = int(key)
            parents[j] = tuple(entry["parents"])
            coeffs[j] = np.asarray(entry["theta"], dtype=float)
        return cls(dag=dag, parents=parents, coeffs=coeffs, noise_scale=payload["noise_scale"])


def sample_index_model(dag: BinaryDag, seed: int = 0, noise_scale: float = 1.0) -> SemSystem:
    """Draw index-model coefficients: sign Bernoulli(1/2), magnitude U[0.5, 2].

    The two-sided range keeps every coefficient bounded away from zero, so no
    edge is vacuous. Draw order is fixed (ascending child index, magnitudes
    then signs) for reproducibility.
    """
    rng = np.random.default_rng(seed)
    parents = {}
    coeffs = {}
    for j in range(dag.d):
        pa = tuple(sorted(i for i, child in dag.edges if child == j))
        if not pa:
            continue
        magnitude = rng.uniform(0.5, 2.0, size=(3, len(pa)))
        sign = np.where(rng.random(size=(3, len(pa))) < 0.5, -1.0, 1.0)
        parents[j] = pa
        coeffs[j] = sign * magnitude
    return SemSystem(dag=dag, parents=parents, coeffs=coeffs, noise_scale=noise_scale)


def simulate(sem: SemSystem, n: int, seed: int = 0) -> np.ndarray:
    """Ancestral sampling: children get tanh/cos/sin of parent indices plus noise.

    The deterministic part is bounded by 3 in magnitude (three basis functions,
    each bounded by 1); parentless variables are pure noise.
    """
    if n < 1:
        raise InvalidInputError("need at least one sample")
    rng = np.random.default_rng(seed)
    d = sem.dag.d
    x = np.zeros((n, d))
    for j in topological_order(sem.dag):
        noise = rng.normal(0.0, sem.noise_scale, size=n) if sem.noise_scale > 0 else np.zeros(n)
        if j not in sem.parents:
            x[:, j] = noise
            continue
        parent_values = x[:, list(sem.parents[j])]
        theta = sem.coeffs[j]
        index = parent_values @ theta.T  # (n, 3)
        x[:, j] = np.tanh(index[:, 0]) + np.cos(index[:, 1]) + np.sin(index[:, 2]) + noise
    return x


def sample_system(kind: str, d: int, expected_edges: float, seed: int, noise_scale: float = 1.0):
    """Convenience: draw a graph of the requested kind plus its index model.

    The graph and the coefficients use independent streams derived from
    ``seed``.
    """
    graph_seed = derive_seed(seed, "graph")
    if kind == "er":
        dag = sample_er_dag(
            GraphSpec(kind="er", d=d, expected_edges=expected_edges, seed=graph_seed)
        )
    elif kind == "sf":
        dag = sample_sf_dag(d, seed=graph_seed)
    else:
        raise InvalidInputError(f"unknown graph kind {kind!r}")
    sem = sample_index_model(dag, seed=derive_seed(seed, "sem"), noise_scale=noise_scale)
    return dag, sem
