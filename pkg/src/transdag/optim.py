"""Box-constrained limited-memory quasi-Newton minimizer and the dual-ascent
training loop for the constrained structure-learning problem.

The minimizer is a projected L-BFGS: search directions come from the standard
two-loop recursion, trial points are projected onto the box, and steps are
accepted under an Armijo condition evaluated on the projected displacement.
Curvature pairs failing the positivity test are skipped; if the quasi-Newton
direction yields no acceptable step the memory is dropped and a projected
steepest-descent step is tried before giving up. Convergence is declared on
the sup-norm of the projected gradient or on relative objective stagnation.

Training sweeps the learners round-robin. Each visit solves a bound-constrained
subproblem at the learner's current penalty weight; if the acyclicity penalty
did not shrink by the configured factor, the weight is escalated and the
subproblem re-solved from the same starting point. After the escalation loop
the Lagrange multiplier takes the standard augmented-Lagrangian update (can be
disabled to reproduce plain penalty behavior). The outer loop stops when the
worst learner's penalty reaches ``h_tol``, every penalty weight hits
``rho_max``, or the epoch budget runs out.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .adjacency import acyclicity_penalty
from .errors import InvalidInputError, OptimizationDiverged


@dataclass(frozen=True)
class BoxBounds:
    """Per-parameter lower/upper bounds; +-inf allowed, equal pins a constant."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise InvalidInputError("bounds must be equally sized vectors")
        if np.any(lo > hi):
            raise InvalidInputError("lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def unbounded(cls, n: int) -> "BoxBounds":
        return cls(lower=np.full(n, -np.inf), upper=np.full(n, np.inf))

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.minimum(np.maximum(x, self.lower), self.upper)


@dataclass(frozen=True)
class LbfgsSettings:
    max_iter: int = 500
    grad_tol: float = 1e-5  # sup-norm of the projected gradient
    f_tol: float = 2.2e-9  # relative objective decrease between iterates
    history: int = 10
    max_linesearch: int = 40


_ARMIJO = 1e-4
_CURVATURE_EPS = 1e-10


def _two_loop(grad, memory):
    q = grad.copy()
    alphas = []
    for s, y, inv_sy in reversed(memory):
        a = inv_sy * (s @ q)
        q -= a * y
        alphas.append(a)
    s_last, y_last, _ = memory[-1]
    q *= (s_last @ y_last) / (y_last @ y_last)
    for (s, y, inv_sy), a in zip(memory, reversed(alphas)):
        b = inv_sy * (y @ q)
        q += (a - b) * s
    return q


def _linesearch(fun, x, f, grad, direction, bounds, step0, max_trials):
    step = step0
    for _ in range(max_trials):
        xt = bounds.clip(x + step * direction)
        dx = xt - x
        if not dx.any():
            return None
        gdx = float(grad @ dx)
        ft, gt = fun(xt)
        if (
            gdx < 0
            and np.isfinite(ft)
            and np.all(np.isfinite(gt))
            and ft <= f + _ARMIJO * gdx
        ):
            return xt, float(ft), np.asarray(gt, dtype=float)
        step *= 0.5
    return None


def minimize_lbfgsb(fun, x0, bounds: BoxBounds, settings: LbfgsSettings | None = None):
    """Minimize ``fun`` (returning value and gradient) inside a box.

    Returns ``(x, f)`` with ``x`` feasible and ``f <= f(x0)``. Raises
    :class:`OptimizationDiverged` if the objective is non-finite at the
    (projected) starting point; non-finite trial points during the line
    search are simply rejected.
    """
    st = settings if settings is not None else LbfgsSettings()
    x = bounds.clip(np.asarray(x0, dtype=float))
    f, grad = fun(x)
    f = float(f)
    grad = np.asarray(grad, dtype=float)
    if not np.isfinite(f) or not np.all(np.isfinite(grad)):
        raise OptimizationDiverged("objective non-finite at the starting point", last_x=x)

    memory = deque(maxlen=st.history)
    f_prev = None
    for _ in range(st.max_iter):
        projected = x - bounds.clip(x - grad)
        if np.max(np.abs(projected)) <= st.grad_tol:
            break
        if f_prev is not None and (f_prev - f) <= st.f_tol * max(abs(f_prev), abs(f), 1.0):
            break

        accepted = None
        for attempt in range(2):
            if attempt == 0 and memory:
                direction = -_two_loop(grad, memory)
                if not np.all(np.isfinite(direction)) or float(grad @ direction) >= 0:
                    continue
                step0 = 1.0
            else:
                direction = -grad
                gnorm = float(np.max(np.abs(grad)))
                step0 = min(1.0, 1.0 / gnorm) if gnorm > 1.0 else 1.0
            accepted = _linesearch(fun, x, f, grad, direction, bounds, step0, st.max_linesearch)
            if accepted is not None:
                break
            memory.clear()
        if accepted is None:
            break

        x_new, f_new, grad_new = accepted
        s = x_new - x
        y = grad_new - grad
        sy = float(s @ y)
        if sy > _CURVATURE_EPS * float(np.linalg.norm(s) * np.linalg.norm(y)):
            memory.append((s, y, 1.0 / sy))
        f_prev, x, f, grad = f, x_new, f_new, grad_new
    return x, f


@dataclass(frozen=True)
class DualAscentConfig:
    """Settings for the outer training loop and its inner solver."""

    h_tol: float = 1e-8
    rho_max: float = 1e16
    rho_growth: float = 10.0
    h_decrease_factor: float = 0.25
    max_epochs: int = 100
    update_multiplier: bool = True
    guard_on_global_rho: bool = False  # escalation guard reads min_k rho_k instead of rho_k
    batch_size: int | None = None  # None = full batch
    batch_seed: int = 0
    inner: LbfgsSettings = field(default_factory=LbfgsSettings)

    def __post_init__(self):
        if not self.h_tol > 0:
            raise InvalidInputError("h_tol must be positive")
        if not self.rho_max >= 1:
            raise InvalidInputError("rho_max must be at least 1")
        if not self.rho_growth > 0:
            raise InvalidInputError("rho_growth must be positive")
        if not 0 < self.h_decrease_factor < 1:
            raise InvalidInputError("h_decrease_factor must lie in (0, 1)")
        if self.max_epochs < 0:
            raise InvalidInputError("max_epochs must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "h_tol": self.h_tol,
            "rho_max": self.rho_max,
            "rho_growth": self.rho_growth,
            "h_decrease_factor": self.h_decrease_factor,
            "max_epochs": self.max_epochs,
            "update_multiplier": self.update_multiplier,
            "guard_on_global_rho": self.guard_on_global_rho,
            "batch_size": self.batch_size,
            "batch_seed": self.batch_seed,
            "inner_max_iter": self.inner.max_iter,
            "inner_grad_tol": self.inner.grad_tol,
            "inner_f_tol": self.inner.f_tol,
            "inner_history": self.inner.history,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "DualAscentConfig":
        payload = dict(payload)
        inner = LbfgsSettings(
            max_iter=payload.pop("inner_max_iter", LbfgsSettings.max_iter),
            grad_tol=payload.pop("inner_grad_tol", LbfgsSettings.grad_tol),
            f_tol=payload.pop("inner_f_tol", LbfgsSettings.f_tol),
            history=payload.pop("inner_history", LbfgsSettings.history),
        )
        return cls(inner=inner, **payload)


def training_step(model, k: int, batch, config: DualAscentConfig, *, h_prev: float = math.inf):
    """One learner visit: solve-and-escalate, then update the multiplier.

    Mutates ``model`` (learner k's parameters, rho_k, lambda2_k) and returns a
    log record, or None when rho_k already exceeds the cap and nothing ran.
    Re-solves triggered by an escalation restart from the parameters the step
    entered with; the final solve is accepted even when the loop exits through
    the rho cap.
    """
    learner = model.learners[k]
    mean_adj = model.mean_adjacency()
    theta0 = learner.params_vector()
    bounds = learner.bounds()

    x_new = None
    h_new = None
    f_new = None
    while (min(model.rho) if config.guard_on_global_rho else model.rho[k]) < config.rho_max:
        fun = model.subproblem_fun(k, batch, mean_adj)
        x_new, f_new = minimize_lbfgsb(fun, theta0, bounds, config.inner)
        learner.set_params_vector(x_new)
        h_new = acyclicity_penalty(learner.adjacency())
        if h_new > config.h_decrease_factor * h_prev:
            model.rho[k] = model.rho[k] * config.rho_growth
            learner.set_params_vector(theta0)
        else:
            break
    if x_new is None:
        return None

    learner.set_params_vector(x_new)
    if config.update_multiplier:
        model.lam2[k] = model.lam2[k] + model.rho[k] * h_new
    from .ensemble import mse_regularizer

    l_mse, _ = mse_regularizer(learner.adjacency(), mean_adj)
    return {
        "rho_k": float(model.rho[k]),
        "lambda2_k": float(model.lam2[k]),
        "objective": float(f_new),
        "l_mse": float(l_mse),
    }


def _iter_batches(data, config: DualAscentConfig, rng):
    if config.batch_size is None or config.batch_size >= data.shape[0]:
        yield data
        return
    order = rng.permutation(data.shape[0])
    for start in range(0, data.shape[0], config.batch_size):
        yield data[order[start : start + config.batch_size]]


def dual_ascent_train(model, subsets, config: DualAscentConfig | None = None):
    """Train the ensemble on K data subsets; returns ``(model, log_records)``.

    Stops when ``max_k h`` falls below ``h_tol``, every rho_k reaches
    ``rho_max``, or ``max_epochs`` elapse; the checks run after each full
    epoch. On divergence the partial log is attached to the raised error.
    """
    config = config if config is not None else DualAscentConfig()
    if len(subsets) != model.size:
        raise InvalidInputError(f"expected {model.size} subsets, got {len(subsets)}")
    arrays = []
    for subset in subsets:
        arr = np.asarray(subset, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise InvalidInputError("each subset must be a non-empty 2-D array")
        if arr.shape[1] != model.d:
            raise InvalidInputError(f"subset has {arr.shape[1]} columns, model expects {model.d}")
        arrays.append(arr)

    records = []
    if config.max_epochs == 0:
        return model, records
    rng = np.random.default_rng(config.batch_seed)
    h_global = math.inf
    try:
        for epoch in range(config.max_epochs):
            for k in range(model.size):
                for batch in _iter_batches(arrays[k], config, rng):
                    record = training_step(model, k, batch, config, h_prev=h_global)
                    h_global = max(
                        acyclicity_penalty(learner.adjacency()) for learner in model.learners
                    )
                    if record is not None:
                        record.update(epoch=epoch, k=k, h=float(h_global))
                        records.append(record)
            if h_global <= config.h_tol or min(model.rho) >= config.rho_max:
                break
    except OptimizationDiverged as err:
        err.log = records
        raise
    return model, records
