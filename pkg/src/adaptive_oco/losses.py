"""Online loss functions and the surrogate losses built from one gradient.

Every round the learner queries a single gradient ``g_t`` of the true loss at
its decision ``w_t``. Experts never see ``f_t`` itself; they minimize one of
two surrogates of that observation, parameterized by a learning rate ``eta``:

* ``surrogate_exp``: ``-eta <g, w_t - w> + eta^2 <g, w_t - w>^2`` (exp-concave)
* ``surrogate_sc``: ``-eta <g, w_t - w> + eta^2 |g|^2 |w_t - w|^2`` (strongly convex)

Both vanish at ``w = w_t``.

All three true-loss families are quadratic in ``w``, so each exposes
``quadratic_form()`` returning ``(A, h, c)`` with ``f(w) = w^T A w - 2 h^T w + c``.
Interval comparators use this to sum losses through prefix sums.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LossObservation:
    """Gradient ``g`` of the round-``t`` loss, queried at the decision ``w``."""

    t: int
    w: np.ndarray
    g: np.ndarray
    g_norm_sq: float

    @classmethod
    def make(cls, t, w, g):
        w = np.asarray(w, dtype=float)
        g = np.asarray(g, dtype=float)
        if w.shape != g.shape or w.ndim != 1:
            raise InvalidArgumentError(f"decision {w.shape} and gradient {g.shape} shapes differ")
        return cls(int(t), w, g, float(g @ g))


def max_learning_rate(diameter, gradient_bound) -> float:
    """Largest learning rate for which the surrogate guarantees hold, 1/(5DG)."""
    return 1.0 / (5.0 * diameter * gradient_bound)


def check_learning_rate(eta, diameter, gradient_bound):
    """Warn (do not fail) when ``eta`` exceeds 1/(5DG)."""
    if eta <= 0:
        raise InvalidArgumentError(f"learning rate must be positive, got {eta}")
    cap = max_learning_rate(diameter, gradient_bound)
    if eta > cap * (1 + 1e-12):
        logger.warning("learning rate %.6g exceeds 1/(5DG) = %.6g; surrogate bounds void", eta, cap)


def _displacement(obs: LossObservation, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != obs.w.shape:
        raise InvalidArgumentError(f"point has shape {w.shape}, observation has {obs.w.shape}")
    return obs.w - w


def surrogate_exp(eta, obs: LossObservation, w) -> float:
    """Exp-concave surrogate ``-eta x + eta^2 x^2`` with ``x = <g, w_t - w>``."""
    x = float(obs.g @ _displacement(obs, w))
    return -eta * x + eta * eta * x * x


def surrogate_exp_grad(eta, obs: LossObservation, w) -> np.ndarray:
    x = float(obs.g @ _displacement(obs, w))
    # d/dw of -eta x + eta^2 x^2 with dx/dw = -g
    return (eta - 2.0 * eta * eta * x) * obs.g


def surrogate_sc(eta, obs: LossObservation, w) -> float:
    """Strongly convex surrogate ``-eta <g, w_t - w> + eta^2 |g|^2 |w_t - w|^2``."""
    diff = _displacement(obs, w)
    return -eta * float(obs.g @ diff) + eta * eta * obs.g_norm_sq * float(diff @ diff)


def surrogate_sc_grad(eta, obs: LossObservation, w) -> np.ndarray:
    diff = _displacement(obs, w)
    return eta * obs.g - 2.0 * eta * eta * obs.g_norm_sq * diff


def surrogate_exp_quadratic(eta, obs: LossObservation):
    """``(A, h, c)`` with ``surrogate_exp(eta, obs, w) = w^T A w - 2 h^T w + c``."""
    g = obs.g
    m = float(g @ obs.w)
    # x = m - <g, w>;  -eta x + eta^2 x^2
    A = eta * eta * np.outer(g, g)
    h = -0.5 * eta * g + eta * eta * m * g
    c = -eta * m + eta * eta * m * m
    return A, h, c


def surrogate_sc_quadratic(eta, obs: LossObservation):
    """``(A, h, c)`` with ``surrogate_sc(eta, obs, w) = w^T A w - 2 h^T w + c``."""
    g, wt = obs.g, obs.w
    k = eta * eta * obs.g_norm_sq
    d = wt.size
    A = k * np.eye(d)
    h = -0.5 * eta * g + k * wt
    c = -eta * float(g @ wt) + k * float(wt @ wt)
    return A, h, c


class TrueLoss:
    """Base class of the scenario-side loss families."""

    family = "abstract"

    def value_and_grad(self, w):
        raise NotImplementedError

    def quadratic_form(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class LinearLoss(TrueLoss):
    """``f(w) = <a, w>``."""

    a: np.ndarray
    family = "linear"

    def value_and_grad(self, w):
        return float(self.a @ w), self.a.copy()

    def quadratic_form(self):
        d = self.a.size
        return np.zeros((d, d)), -0.5 * self.a, 0.0


@dataclass(frozen=True, eq=False)
class QuadraticLoss(TrueLoss):
    """``f(w) = (lam / 2) |w - center|^2``, which is ``lam``-strongly convex."""

    center: np.ndarray
    lam: float
    family = "quadratic"

    def value_and_grad(self, w):
        diff = w - self.center
        return 0.5 * self.lam * float(diff @ diff), self.lam * diff

    def quadratic_form(self):
        d = self.center.size
        half = 0.5 * self.lam
        return half * np.eye(d), half * self.center, half * float(self.center @ self.center)


@dataclass(frozen=True, eq=False)
class SquaredErrorLoss(TrueLoss):
    """``f(w) = (<x, w> - y)^2``; exp-concave on bounded domains."""

    x: np.ndarray
    y: float
    family = "squared_error"

    def value_and_grad(self, w):
        r = float(self.x @ w) - self.y
        return r * r, 2.0 * r * self.x

    def quadratic_form(self):
        return np.outer(self.x, self.x), self.y * self.x, self.y * self.y


def true_loss_eval(loss: TrueLoss, w):
    """Value and gradient of a scenario loss at ``w``."""
    w = np.asarray(w, dtype=float)
    expected = _loss_dimension(loss)
    if w.ndim != 1 or w.size != expected:
        raise InvalidArgumentError(f"point has shape {w.shape}, loss expects ({expected},)")
    return loss.value_and_grad(w)


def _loss_dimension(loss):
    if isinstance(loss, LinearLoss):
        return loss.a.size
    if isinstance(loss, QuadraticLoss):
        return loss.center.size
    if isinstance(loss, SquaredErrorLoss):
        return loss.x.size
    raise InvalidArgumentError(f"unsupported loss {type(loss).__name__}")


def squared_error_exp_concavity(max_abs_residual) -> float:
    """Exp-concavity modulus of ``(<x,w> - y)^2`` when ``|<x,w> - y| <= B``.

    ``exp(-alpha (z - y)^2)`` is concave in ``z`` iff ``alpha <= 1 / (2 (z - y)^2)``,
    so the modulus on the domain is ``1 / (2 B^2)``.
    """
    return 1.0 / (2.0 * max_abs_residual**2)
