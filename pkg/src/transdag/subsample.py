"""Construct K differently-distributed subsets from a single-origin dataset.

The trick is one-dimensional: sort the rows so the row index correlates with
the covariate values, place K beta distributions over the normalized index
range, and run an independent Bernoulli draw per (index, distribution) with
the max-normalized PDF value as the inclusion probability. The beta family
sweeps its mass from the low-index end to the high-index end, so the K
subsets overlap but follow visibly different distributions. A repair pass
guarantees that the subsets cover every row and that none is empty, which the
Bernoulli draws alone cannot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class BetaSpec:
    """Shape parameters of one beta distribution; the family keeps both >= 1."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise InvalidInputError("beta shape parameters must be positive")

    def pdf_kernel(self, x) -> np.ndarray:
        # unnormalized density x^(a-1) (1-x)^(b-1); the constant cancels in
        # the max-normalization downstream
        x = np.asarray(x, dtype=float)
        return np.power(x, self.alpha - 1.0) * np.power(1.0 - x, self.beta - 1.0)


@dataclass(frozen=True)
class SubsetPartition:
    """K index sets into the reindexed dataset plus the sort permutation."""

    K: int
    index_sets: tuple
    permutation: tuple
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "index_sets", tuple(tuple(int(i) for i in s) for s in self.index_sets)
        )
        object.__setattr__(self, "permutation", tuple(int(i) for i in self.permutation))
        if len(self.index_sets) != self.K:
            raise InvalidInputError("need exactly K index sets")
        n = len(self.permutation)
        covered = set()
        for s in self.index_sets:
            if not s:
                raise InvalidInputError("every subset must be non-empty")
            covered.update(s)
        if covered != set(range(n)):
            raise InvalidInputError("index sets must cover every row exactly")

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "permutation": list(self.permutation),
            "index_sets": [list(s) for s in self.index_sets],
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "SubsetPartition":
        return cls(
            K=payload["K"],
            index_sets=tuple(tuple(s) for s in payload["index_sets"]),
            permutation=tuple(payload["permutation"]),
            seed=payload.get("seed"),
        )


def reindex_sort(x_data):
    """Sort rows lexicographically (column 0 primary) and return the permutation.

    ``permutation[new_index] = original_index``; ties fall back to later
    columns and finally to the stable original order.
    """
    x = np.asarray(x_data, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise InvalidInputError("dataset must be a non-empty 2-D array")
    perm = np.lexsort(tuple(x[:, c] for c in reversed(range(x.shape[1]))))
    return x[perm], perm


def beta_family(K: int):
    """The K-member beta family sweeping mass from low to high indices.

    floor(K/2) left-skewed specs (i, K) with i evenly spaced over [1, K-1]
    (a single point collapses to 1), the centered (K, K) only when K is odd,
    and the mirrored right-skewed specs (K, j).
    """
    if K < 2:
        raise InvalidInputError("the beta family needs K >= 2")
    half = K // 2
    if half == 1:
        points = [1.0]
    else:
        points = list(np.linspace(1.0, K - 1.0, half))
    family = [BetaSpec(alpha=i, beta=float(K)) for i in points]
    if K % 2 == 1:
        family.append(BetaSpec(alpha=float(K), beta=float(K)))
    family.extend(BetaSpec(alpha=float(K), beta=j) for j in reversed(points))
    return family


def subset_probabilities(spec: BetaSpec, n: int) -> np.ndarray:
    """Per-row inclusion probabilities: the beta PDF at i/n, scaled to max 1.

    Evaluated at i in {1, ..., n}; the best-matching index always gets
    probability exactly 1.
    """
    if n < 1:
        raise InvalidInputError("dataset size must be at least 1")
    grid = np.arange(1, n + 1, dtype=float) / n
    raw = spec.pdf_kernel(grid)
    peak = raw.max()
    if peak == 0.0:
        return np.zeros(n)
    return raw / peak


def draw_subsets(probabilities, seed: int, permutation=None) -> SubsetPartition:
    """Independent Bernoulli draws per (index, subset), then coverage repair.

    Rows selected by no subset go to the subset giving them the highest
    probability (lowest subset index on ties); a subset that ends up empty
    receives its own highest-probability row. Deterministic under the seed:
    draws happen subset-by-subset in index order.
    """
    probs = np.asarray(probabilities, dtype=float)
    if probs.ndim != 2 or probs.shape[0] < 2:
        raise InvalidInputError("need a K x N probability matrix with K >= 2")
    if np.any(probs < 0) or np.any(probs > 1):
        raise InvalidInputError("probabilities must lie in [0, 1]")
    K, n = probs.shape
    rng = np.random.default_rng(seed)
    selected = [rng.random(n) < probs[k] for k in range(K)]

    covered = np.zeros(n, dtype=bool)
    for mask in selected:
        covered |= mask
    backstop = np.argmax(probs, axis=0)
    for i in np.flatnonzero(~covered):
        selected[backstop[i]][i] = True
    for k in range(K):
        if not selected[k].any():
            selected[k][int(np.argmax(probs[k]))] = True

    if permutation is None:
        permutation = tuple(range(n))
    return SubsetPartition(
        K=K,
        index_sets=tuple(tuple(np.flatnonzero(mask)) for mask in selected),
        permutation=tuple(permutation),
        seed=seed,
    )


def beta_partition(x_data, K: int, seed: int):
    """Full pipeline: sort, build the beta family, draw. Returns (sorted_data, partition)."""
    x_sorted, perm = reindex_sort(x_data)
    probs = np.stack([subset_probabilities(spec, x_sorted.shape[0]) for spec in beta_family(K)])
    return x_sorted, draw_subsets(probs, seed, permutation=perm)


def random_split(n: int, K: int, seed: int) -> SubsetPartition:
    """Uniform random partition into K disjoint near-equal parts (the ablation baseline)."""
    if K < 1 or K > n:
        raise InvalidInputError("need 1 <= K <= n for a random split")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    parts = np.array_split(order, K)
    return SubsetPartition(
        K=K,
        index_sets=tuple(tuple(sorted(int(i) for i in part)) for part in parts),
        permutation=tuple(range(n)),
        seed=seed,
    )


def extract_subsets(data, partition: SubsetPartition):
    """Materialize the row subsets of ``data`` described by ``partition``."""
    arr = np.asarray(data, dtype=float)
    if arr.shape[0] != len(partition.permutation):
        raise InvalidInputError("partition was built for a different number of rows")
    return [arr[list(idx)] for idx in partition.index_sets]
