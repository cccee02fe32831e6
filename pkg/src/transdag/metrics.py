"""Structural evaluation of an estimated graph against a ground-truth DAG."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .adjacency import BinaryGraph
from .errors import InvalidInputError

CSV_FIELDS = [
    "shd",
    "fdr",
    "fpr",
    "tpr",
    "true_edges",
    "pred_edges",
    "correct_edges",
    "reversed_edges",
    "extra_edges",
    "missing_edges",
    "non_edges",
]


@dataclass(frozen=True)
class MetricsReport:
    shd: int
    fdr: float
    fpr: float
    tpr: float
    true_edges: int
    pred_edges: int
    correct_edges: int
    reversed_edges: int
    extra_edges: int
    missing_edges: int
    non_edges: int

    def to_dict(self) -> dict:
        return asdict(self)

    def csv_row(self) -> list:
        return [getattr(self, name) for name in CSV_FIELDS]


def _check_pair(pred: BinaryGraph, truth: BinaryGraph):
    if pred.d != truth.d:
        raise InvalidInputError(f"graph sizes differ: {pred.d} vs {truth.d}")


def shd(pred: BinaryGraph, truth: BinaryGraph) -> int:
    """Edge additions, deletions and reversals to turn ``pred`` into ``truth``.

    Counted over unordered node pairs: a pair linked in exactly one of the
    graphs costs one edit (addition/deletion), a pair linked in both but with
    different orientations costs one edit (a reversal counts once).
    """
    _check_pair(pred, truth)
    count = 0
    for i in range(pred.d):
        for j in range(i + 1, pred.d):
            p = ((i, j) in pred.edges, (j, i) in pred.edges)
            t = ((i, j) in truth.edges, (j, i) in truth.edges)
            linked_p = p[0] or p[1]
            linked_t = t[0] or t[1]
            if linked_p != linked_t:
                count += 1
            elif linked_p and p != t:
                count += 1
    return count


def confusion_rates(pred: BinaryGraph, truth: BinaryGraph) -> MetricsReport:
    """SHD plus edge-level rates.

    TPR is the fraction of true edges recovered with the right orientation;
    reversed edges count as wrong. FDR divides reversed+extra predicted edges
    by the number of predictions (zero when nothing is predicted). FPR divides
    the same numerator by the number of ordered non-edges of the truth,
    ``d*(d-1) - |E_true|``.
    """
    _check_pair(pred, truth)
    correct = sum(1 for e in pred.edges if e in truth.edges)
    reversed_edges = sum(
        1 for (i, j) in pred.edges if (j, i) in truth.edges and (i, j) not in truth.edges
    )
    extra = sum(
        1 for (i, j) in pred.edges if (i, j) not in truth.edges and (j, i) not in truth.edges
    )
    missing = sum(
        1 for (i, j) in truth.edges if (i, j) not in pred.edges and (j, i) not in pred.edges
    )
    true_edges = truth.num_edges
    pred_edges = pred.num_edges
    non_edges = pred.d * (pred.d - 1) - true_edges
    wrong = reversed_edges + extra
    return MetricsReport(
        shd=shd(pred, truth),
        fdr=wrong / pred_edges if pred_edges else 0.0,
        fpr=wrong / non_edges if non_edges else 0.0,
        tpr=correct / true_edges if true_edges else 0.0,
        true_edges=true_edges,
        pred_edges=pred_edges,
        correct_edges=correct,
        reversed_edges=reversed_edges,
        extra_edges=extra,
        missing_edges=missing,
        non_edges=non_edges,
    )
