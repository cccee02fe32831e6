"""Experiment configuration: one JSON document, every field overridable by a
command-line flag of the same dotted name.

Defaults follow the standard benchmark setting: n=1000, d=5, K=3, expected
edges 2d, MLP score functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidInputError
from .optim import DualAscentConfig
from .scores import ScoreHyper

SUBSAMPLE_MODES = ("beta", "random", "files")


@dataclass(frozen=True)
class GraphConfig:
    kind: str = "er"
    d: int = 5
    edges_per_node: float = 2.0  # expected edge count as a multiple of d

    def __post_init__(self):
        if self.kind not in ("er", "sf"):
            raise InvalidInputError(f"unknown graph kind {self.kind!r}")
        if self.d < 2:
            raise InvalidInputError("graph.d must be at least 2")
        if self.edges_per_node <= 0:
            raise InvalidInputError("graph.edges_per_node must be positive")

    @property
    def expected_edges(self) -> float:
        return self.edges_per_node * self.d


@dataclass(frozen=True)
class ScoreConfig:
    variant: str = "mlp"
    lambda1: float = 0.01
    hidden: tuple = (10,)

    def __post_init__(self):
        if self.variant not in ("linear", "mlp"):
            raise InvalidInputError(f"unknown score variant {self.variant!r}")
        object.__setattr__(self, "hidden", tuple(int(w) for w in self.hidden))

    def hyper(self) -> ScoreHyper:
        return ScoreHyper(lambda1=self.lambda1, hidden=self.hidden)


@dataclass(frozen=True)
class ExperimentConfig:
    graph: GraphConfig = field(default_factory=GraphConfig)
    n: int = 1000
    K: int = 3
    alpha: float = 1.0
    omega: float = 0.3
    score: ScoreConfig = field(default_factory=ScoreConfig)
    train: DualAscentConfig = field(default_factory=DualAscentConfig)
    subsample_mode: str = "beta"
    noise_scale: float = 1.0
    standardize: bool = False
    seed: int = 0
    repeats: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("n must be positive")
        if self.K < 1:
            raise InvalidInputError("K must be positive")
        if self.alpha < 0:
            raise InvalidInputError("alpha must be nonnegative")
        if self.omega < 0:
            raise InvalidInputError("omega must be nonnegative")
        if self.subsample_mode not in SUBSAMPLE_MODES:
            raise InvalidInputError(f"subsample.mode must be one of {SUBSAMPLE_MODES}")
        if self.repeats < 1:
            raise InvalidInputError("repeats must be at least 1")

    def to_dict(self) -> dict:
        return {
            "graph": {
                "kind": self.graph.kind,
                "d": self.graph.d,
                "edges_per_node": self.graph.edges_per_node,
            },
            "n": self.n,
            "K": self.K,
            "alpha": self.alpha,
            "omega": self.omega,
            "score": {
                "variant": self.score.variant,
                "lambda1": self.score.lambda1,
                "hidden": list(self.score.hidden),
            },
            "train": self.train.to_dict(),
            "subsample": {"mode": self.subsample_mode},
            "noise_scale": self.noise_scale,
            "standardize": self.standardize,
            "seed": self.seed,
            "repeats": self.repeats,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        payload = dict(payload)
        graph = GraphConfig(**payload.pop("graph", {}))
        score_payload = dict(payload.pop("score", {}))
        if "hidden" in score_payload:
            score_payload["hidden"] = tuple(score_payload["hidden"])
        score = ScoreConfig(**score_payload)
        train = DualAscentConfig.from_dict(payload.pop("train", {}))
        subsample = payload.pop("subsample", {})
        mode = subsample.get("mode", "beta")
        return cls(graph=graph, score=score, train=train, subsample_mode=mode, **payload)


# dotted flag name -> (parser, help); paths into the nested config dict
OVERRIDE_FIELDS = {
    "graph.kind": (str, "graph family: er | sf"),
    "graph.d": (int, "number of variables"),
    "graph.edges_per_node": (float, "expected edge count as a multiple of d"),
    "n": (int, "sample size"),
    "K": (int, "number of learners / subsets"),
    "alpha": (float, "agreement-regularizer weight"),
    "omega": (float, "edge threshold for binarizing adjacencies"),
    "score.variant": (str, "score function: linear | mlp"),
    "score.lambda1": (float, "L1 weight"),
    "score.hidden": (lambda s: [int(w) for w in s.split(",")], "MLP hidden widths, comma-separated"),
    "train.h_tol": (float, "acyclicity tolerance for convergence"),
    "train.rho_max": (float, "penalty weight cap"),
    "train.rho_growth": (float, "penalty escalation factor"),
    "train.h_decrease_factor": (float, "required per-step penalty shrink factor"),
    "train.max_epochs": (int, "epoch budget"),
    "train.update_multiplier": (lambda s: s.lower() in ("1", "true", "yes"), "enable the multiplier update"),
    "train.guard_on_global_rho": (lambda s: s.lower() in ("1", "true", "yes"), "escalation guard reads min_k rho_k"),
    "train.batch_size": (int, "mini-batch size (default: full batch)"),
    "train.inner_max_iter": (int, "inner solver iteration cap"),
    "train.inner_grad_tol": (float, "inner solver projected-gradient tolerance"),
    "subsample.mode": (str, "beta | random | files"),
    "noise_scale": (float, "SEM noise standard deviation"),
    "standardize": (lambda s: s.lower() in ("1", "true", "yes"), "z-score columns before learning"),
    "seed": (int, "master seed"),
    "repeats": (int, "number of repeats"),
}


def apply_overrides(payload: dict, overrides: dict) -> dict:
    """Set dotted-name overrides into a nested config dict."""
    result = {k: (dict(v) if isinstance(v, dict) else v) for k, v in payload.items()}
    for dotted, value in overrides.items():
        if dotted not in OVERRIDE_FIELDS:
            raise InvalidInputError(f"unknown config field {dotted!r}")
        parts = dotted.split(".")
        node = result
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return result


def load_config(path=None, overrides=None) -> ExperimentConfig:
    payload = {}
    if path is not None:
        from .fileio import read_json

        payload = read_json(path)
    if overrides:
        payload = apply_overrides(payload, overrides)
    return ExperimentConfig.from_dict(payload)
