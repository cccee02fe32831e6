"""Differentiable score functions: per-dataset regression losses over a
continuous adjacency parameterization, with analytic gradients.

Two variants:

* ``LinearScore`` — every variable is predicted as a linear combination of the
  others; the weight matrix is the adjacency.
* ``MlpScore`` — one small feed-forward network per variable (sigmoid hidden
  layers, affine output); adjacency entry (i, j) is the Euclidean norm of the
  first-layer weights from input i into variable j's network.

Linear weights and MLP first layers are stored as differences of two
nonnegative parts, so the L1 penalty becomes a *linear* function of the
parameters and a box-constrained optimizer handles it exactly. Entries that
would feed a variable from itself are pinned to zero through their bounds,
which keeps the adjacency diagonal identically zero at every reachable
parameter state.

The full training objective of one learner is

    fit_loss + lambda1 * sum(positive parts + negative parts)
             + (rho / 2) * penalty^2 + lambda2 * penalty

with ``penalty = acyclicity_penalty(adjacency)``; ``objective`` returns its
value and exact gradient with respect to the flat parameter vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adjacency import matrix_exp
from .errors import InvalidInputError
from .optim import BoxBounds


@dataclass(frozen=True)
class ScoreHyper:
    """Shared hyperparameters: L1 weight and MLP hidden widths."""

    lambda1: float = 0.01
    hidden: tuple = (10,)

    def __post_init__(self):
        if not np.isfinite(self.lambda1) or self.lambda1 < 0:
            raise InvalidInputError("lambda1 must be a nonnegative real")
        widths = tuple(int(w) for w in self.hidden)
        if not widths or any(w < 1 for w in widths):
            raise InvalidInputError("hidden widths must be positive integers")
        object.__setattr__(self, "hidden", widths)

    def to_dict(self) -> dict:
        return {"lambda1": self.lambda1, "hidden": list(self.hidden)}

    @classmethod
    def from_dict(cls, payload: dict) -> "ScoreHyper":
        return cls(lambda1=payload["lambda1"], hidden=tuple(payload["hidden"]))


def _sigmoid(z):
    # exp overflow at very negative z saturates to the correct limit 0.0
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


def _check_data(x, d) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != d or arr.shape[0] < 1:
        raise InvalidInputError(f"data must be n x {d} with n >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("data contains non-finite values")
    return arr


class LinearScore:
    """Linear structural equations; adjacency = W_pos - W_neg."""

    variant = "linear"

    def __init__(self, d: int, hyper: ScoreHyper | None = None, seed: int | None = None):
        if int(d) < 1:
            raise InvalidInputError("d must be a positive integer")
        self.d = int(d)
        self.hyper = hyper if hyper is not None else ScoreHyper()
        # linear parts start at zero; seed kept only for checkpoint metadata
        self.init_seed = seed
        self.w_pos = np.zeros((self.d, self.d))
        self.w_neg = np.zeros((self.d, self.d))

    @property
    def num_params(self) -> int:
        return 2 * self.d * self.d

    def adjacency(self) -> np.ndarray:
        return self.w_pos - self.w_neg

    def params_vector(self) -> np.ndarray:
        return np.concatenate([self.w_pos.ravel(), self.w_neg.ravel()])

    def set_params_vector(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.num_params,):
            raise InvalidInputError(f"expected {self.num_params} parameters, got {x.shape}")
        dd = self.d * self.d
        self.w_pos = x[:dd].reshape(self.d, self.d).copy()
        self.w_neg = x[dd:].reshape(self.d, self.d).copy()

    def bounds(self) -> BoxBounds:
        lower = np.zeros(self.num_params)
        upper = np.full(self.num_params, np.inf)
        diag = np.arange(self.d) * self.d + np.arange(self.d)
        dd = self.d * self.d
        upper[diag] = 0.0
        upper[dd + diag] = 0.0
        return BoxBounds(lower=lower, upper=upper)

    def fit_loss(self, x_data) -> float:
        x = _check_data(x_data, self.d)
        resid = x @ self.adjacency() - x
        return float(np.sum(resid * resid)) / (2.0 * x.shape[0])

    def objective(self, x_data, rho: float, lam2: float):
        """Value and gradient of the full single-learner objective."""
        if not rho > 0:
            raise InvalidInputError("rho must be positive")
        x = _check_data(x_data, self.d)
        n = x.shape[0]
        w = self.adjacency()

        resid = x @ w - x
        fit = float(np.sum(resid * resid)) / (2.0 * n)
        grad_w = x.T @ resid / n

        e = matrix_exp(w * w)
        penalty = float(np.trace(e) - self.d)
        grad_w = grad_w + (rho * penalty + lam2) * (e.T * (2.0 * w))

        value = (
            fit
            + self.hyper.lambda1 * float(np.sum(self.w_pos) + np.sum(self.w_neg))
            + 0.5 * rho * penalty * penalty
            + lam2 * penalty
        )
        grad = np.concatenate(
            [
                (grad_w + self.hyper.lambda1).ravel(),
                (-grad_w + self.hyper.lambda1).ravel(),
            ]
        )
        return value, grad

    def adjacency_backward(self, upstream) -> np.ndarray:
        """Map a gradient w.r.t. the adjacency onto the flat parameter vector."""
        u = np.asarray(upstream, dtype=float)
        if u.shape != (self.d, self.d):
            raise InvalidInputError("upstream gradient has wrong shape")
        return np.concatenate([u.ravel(), -u.ravel()])

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "d": self.d,
            "init_seed": self.init_seed,
            "w_pos": self.w_pos.tolist(),
            "w_neg": self.w_neg.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict, hyper: ScoreHyper | None = None) -> "LinearScore":
        score = cls(payload["d"], hyper=hyper, seed=payload.get("init_seed"))
        score.w_pos = np.asarray(payload["w_pos"], dtype=float)
        score.w_neg = np.asarray(payload["w_neg"], dtype=float)
        return score


class MlpScore:
    """One per-variable MLP; first-layer weight norms define the adjacency.

    ``w1_pos`` / ``w1_neg`` have shape (d, d, H): axis 0 is the predicted
    variable j, axis 1 the input variable i, axis 2 the hidden unit. Deeper
    layers are stored per variable as (weights, bias) pairs; the last layer is
    affine, all earlier ones pass through a sigmoid.
    """

    variant = "mlp"

    def __init__(self, d: int, hyper: ScoreHyper | None = None, seed: int | None = None):
        if int(d) < 1:
            raise InvalidInputError("d must be a positive integer")
        self.d = int(d)
        self.hyper = hyper if hyper is not None else ScoreHyper()
        self.init_seed = seed
        rng = np.random.default_rng(seed)
        h1 = self.hyper.hidden[0]
        self.w1_pos = np.zeros((self.d, self.d, h1))
        self.w1_neg = np.zeros((self.d, self.d, h1))
        self.b1 = rng.uniform(-0.1, 0.1, size=(self.d, h1))
        dims = (*self.hyper.hidden, 1)
        self.layers = [
            (
                rng.uniform(-0.1, 0.1, size=(self.d, dims[i], dims[i + 1])),
                rng.uniform(-0.1, 0.1, size=(self.d, dims[i + 1])),
            )
            for i in range(len(dims) - 1)
        ]

    @property
    def num_params(self) -> int:
        n = self.w1_pos.size + self.w1_neg.size + self.b1.size
        for w, b in self.layers:
            n += w.size + b.size
        return n

    def adjacency(self) -> np.ndarray:
        w1 = self.w1_pos - self.w1_neg
        norms = np.sqrt(np.sum(w1 * w1, axis=2))  # [j, i]
        return norms.T

    def params_vector(self) -> np.ndarray:
        parts = [self.w1_pos.ravel(), self.w1_neg.ravel(), self.b1.ravel()]
        for w, b in self.layers:
            parts.append(w.ravel())
            parts.append(b.ravel())
        return np.concatenate(parts)

    def set_params_vector(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.num_params,):
            raise InvalidInputError(f"expected {self.num_params} parameters, got {x.shape}")
        pos = 0

        def take(shape):
            nonlocal pos
            size = int(np.prod(shape))
            out = x[pos : pos + size].reshape(shape).copy()
            pos += size
            return out

        self.w1_pos = take(self.w1_pos.shape)
        self.w1_neg = take(self.w1_neg.shape)
        self.b1 = take(self.b1.shape)
        self.layers = [(take(w.shape), take(b.shape)) for w, b in self.layers]

    def bounds(self) -> BoxBounds:
        lower = np.full(self.num_params, -np.inf)
        upper = np.full(self.num_params, np.inf)
        part = self.w1_pos.size
        lower[: 2 * part] = 0.0
        # pin self-loop rows of both split parts to zero
        mask = np.zeros(self.w1_pos.shape, dtype=bool)
        idx = np.arange(self.d)
        mask[idx, idx, :] = True
        flat = mask.ravel()
        upper_first = upper[: 2 * part]
        upper_first[np.concatenate([flat, flat])] = 0.0
        upper[: 2 * part] = upper_first
        return BoxBounds(lower=lower, upper=upper)

    def _forward(self, x):
        n = x.shape[0]
        h1 = self.b1.shape[1]
        w1 = self.w1_pos - self.w1_neg
        # contraction over the input axis as one BLAS call: [n,i] @ [i, j*h]
        z1 = (x @ w1.transpose(1, 0, 2).reshape(self.d, self.d * h1)).reshape(n, self.d, h1)
        z1 += self.b1
        acts = [_sigmoid(z1)]
        last = len(self.layers) - 1
        for idx, (w, b) in enumerate(self.layers):
            z = np.einsum("njh,jhg->njg", acts[-1], w) + b
            acts.append(z if idx == last else _sigmoid(z))
        return acts

    def predict(self, x_data) -> np.ndarray:
        x = _check_data(x_data, self.d)
        return self._forward(x)[-1][..., 0]

    def fit_loss(self, x_data) -> float:
        x = _check_data(x_data, self.d)
        resid = self._forward(x)[-1][..., 0] - x
        return float(np.sum(resid * resid)) / (2.0 * x.shape[0])

    def objective(self, x_data, rho: float, lam2: float):
        """Value and gradient of the full single-learner objective."""
        if not rho > 0:
            raise InvalidInputError("rho must be positive")
        x = _check_data(x_data, self.d)
        n = x.shape[0]

        acts = self._forward(x)
        resid = acts[-1][..., 0] - x
        fit = float(np.sum(resid * resid)) / (2.0 * n)

        # backprop through the per-variable networks
        delta = (resid / n)[..., None]  # grad w.r.t. the affine output
        grads_layers = [None] * len(self.layers)
        for idx in range(len(self.layers) - 1, -1, -1):
            w, _ = self.layers[idx]
            a_in = acts[idx]
            g_w = np.einsum("njh,njg->jhg", a_in, delta)
            g_b = delta.sum(axis=0)
            grads_layers[idx] = (g_w, g_b)
            da_in = np.einsum("njg,jhg->njh", delta, w)
            delta = da_in * a_in * (1.0 - a_in)  # a_in is always a sigmoid output
        h1 = self.b1.shape[1]
        # [i, n] @ [n, j*h] via BLAS, then split the (j, h) axes back out
        g_w1 = (x.T @ delta.reshape(n, self.d * h1)).reshape(self.d, self.d, h1).transpose(1, 0, 2)
        g_b1 = delta.sum(axis=0)

        # acyclicity penalty through the first-layer norms
        w1 = self.w1_pos - self.w1_neg
        sq = np.sum(w1 * w1, axis=2)  # [j, i] = adjacency[i, j] squared
        e = matrix_exp(sq.T)
        penalty = float(np.trace(e) - self.d)
        coef = rho * penalty + lam2
        g_w1 = g_w1 + (2.0 * coef) * e[:, :, None] * w1

        value = (
            fit
            + self.hyper.lambda1 * float(np.sum(self.w1_pos) + np.sum(self.w1_neg))
            + 0.5 * rho * penalty * penalty
            + lam2 * penalty
        )
        parts = [
            (g_w1 + self.hyper.lambda1).ravel(),
            (-g_w1 + self.hyper.lambda1).ravel(),
            g_b1.ravel(),
        ]
        for g_w, g_b in grads_layers:
            parts.append(g_w.ravel())
            parts.append(g_b.ravel())
        return value, np.concatenate(parts)

    def adjacency_backward(self, upstream) -> np.ndarray:
        """Map a gradient w.r.t. the adjacency onto the flat parameter vector.

        Uses d||w||/dw = w/||w||, with zero chosen at ||w|| = 0 (a valid
        subgradient; the norm is non-differentiable there).
        """
        u = np.asarray(upstream, dtype=float)
        if u.shape != (self.d, self.d):
            raise InvalidInputError("upstream gradient has wrong shape")
        w1 = self.w1_pos - self.w1_neg
        norms = np.sqrt(np.sum(w1 * w1, axis=2))  # [j, i]
        ratio = np.zeros_like(norms)
        np.divide(u.T, norms, out=ratio, where=norms > 0)
        g_w1 = ratio[:, :, None] * w1
        zeros = [np.zeros(self.b1.size)]
        for w, b in self.layers:
            zeros.append(np.zeros(w.size + b.size))
        return np.concatenate([g_w1.ravel(), -g_w1.ravel(), *zeros])

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "d": self.d,
            "init_seed": self.init_seed,
            "hidden": list(self.hyper.hidden),
            "w1_pos": self.w1_pos.tolist(),
            "w1_neg": self.w1_neg.tolist(),
            "b1": self.b1.tolist(),
            "layers": [{"w": w.tolist(), "b": b.tolist()} for w, b in self.layers],
        }

    @classmethod
    def from_dict(cls, payload: dict, hyper: ScoreHyper | None = None) -> "MlpScore":
        if hyper is None:
            hyper = ScoreHyper(hidden=tuple(payload["hidden"]))
        score = cls(payload["d"], hyper=hyper, seed=payload.get("init_seed"))
        score.w1_pos = np.asarray(payload["w1_pos"], dtype=float)
        score.w1_neg = np.asarray(payload["w1_neg"], dtype=float)
        score.b1 = np.asarray(payload["b1"], dtype=float)
        score.layers = [
            (np.asarray(layer["w"], dtype=float), np.asarray(layer["b"], dtype=float))
            for layer in payload["layers"]
        ]
        return score


VARIANTS = {"linear": LinearScore, "mlp": MlpScore}


def make_score(variant: str, d: int, hyper: ScoreHyper | None = None, seed: int | None = None):
    if variant not in VARIANTS:
        raise InvalidInputError(f"unknown score variant {variant!r}; expected one of {sorted(VARIANTS)}")
    return VARIANTS[variant](d, hyper=hyper, seed=seed)


def score_from_dict(payload: dict, hyper: ScoreHyper | None = None):
    variant = payload.get("variant")
    if variant not in VARIANTS:
        raise InvalidInputError(f"unknown score variant {variant!r}")
    return VARIANTS[variant].from_dict(payload, hyper=hyper)
