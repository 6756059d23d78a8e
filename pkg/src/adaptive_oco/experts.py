"""Expert algorithms run on a single interval.

``OnsExpert`` runs online Newton step on the exp-concave surrogate and
``AogdExpert`` runs adaptive online gradient descent on the strongly convex
surrogate. Each expert lives on one interval ``[r, s]`` with one learning
rate, starts from the domain midpoint and keeps the running sum of its own
surrogate losses, which the meta-learner uses for weighting.
"""

from __future__ import annotations

import numpy as np

from .domain import DomainSpec, project, project_generalized
from .exceptions import ContractViolationError
from .losses import (
    LossObservation,
    check_learning_rate,
    surrogate_exp,
    surrogate_exp_grad,
    surrogate_sc,
    surrogate_sc_grad,
)
from .schedule import IntervalKey

# 1/2 * min(1 / (4 D * 7/(25 D)), 1): curvature constant of the exp-concave
# surrogate, whose gradients are bounded by 7/(25 D).
ONS_BETA = 25.0 / 56.0


class _Expert:
    family = "abstract"

    def __init__(self, interval: IntervalKey, eta: float, domain: DomainSpec):
        check_learning_rate(eta, domain.diameter, domain.gradient_bound)
        self.interval = interval
        self.eta = float(eta)
        self.domain = domain
        self.w = domain.midpoint
        self.cumulative_loss = 0.0

    def _check_round(self, obs: LossObservation):
        if obs.t not in self.interval:
            raise ContractViolationError(
                f"{self.family} expert on {self.interval} received round {obs.t}"
            )

    def __repr__(self):
        return (
            f"{type(self).__name__}(interval={self.interval}, eta={self.eta:.4g}, "
            f"L={self.cumulative_loss:.4g})"
        )


class OnsExpert(_Expert):
    """Online Newton step on ``surrogate_exp`` with a fixed learning rate.

    ``sigma`` starts at ``I / (beta^2 D^2)`` and gains the outer product of
    each surrogate gradient. The Newton step is projected back in the
    ``sigma``-norm.
    """

    family = "ons"

    def __init__(self, interval, eta, domain, projection_tol=1e-8):
        super().__init__(interval, eta, domain)
        d = domain.dimension
        self.beta = ONS_BETA
        self.sigma = np.eye(d) / (ONS_BETA**2 * domain.diameter**2)
        self.projection_tol = projection_tol

    def step(self, obs: LossObservation) -> float:
        """Charge the surrogate loss at the current iterate and update.

        Returns the surrogate loss that was charged.
        """
        self._check_round(obs)
        loss = surrogate_exp(self.eta, obs, self.w)
        grad = surrogate_exp_grad(self.eta, obs, self.w)
        self.cumulative_loss += loss
        self.sigma = self.sigma + np.outer(grad, grad)
        direction = np.linalg.solve(self.sigma, grad)
        self.w = project_generalized(
            self.domain, self.sigma, self.w - direction / self.beta,
            tol=self.projection_tol,
            check=False,
        )
        return loss


class AogdExpert(_Expert):
    """Adaptive online gradient descent on ``surrogate_sc``.

    The step size is ``1 / alpha_t`` with
    ``alpha_t = 2 eta^2 G^2 + 2 eta^2 sum_{i <= t} |g_i|^2``, the accumulated
    strong-convexity moduli of the surrogates seen so far (plus a ``G^2`` prior).
    """

    family = "aogd"

    def __init__(self, interval, eta, domain):
        super().__init__(interval, eta, domain)
        self.grad_norm_accum = 0.0

    def step_size_denominator(self) -> float:
        e2 = self.eta * self.eta
        return 2.0 * e2 * self.domain.gradient_bound**2 + 2.0 * e2 * self.grad_norm_accum

    def step(self, obs: LossObservation) -> float:
        self._check_round(obs)
        loss = surrogate_sc(self.eta, obs, self.w)
        grad = surrogate_sc_grad(self.eta, obs, self.w)
        self.cumulative_loss += loss
        self.grad_norm_accum += obs.g_norm_sq
        self.w = project(self.domain, self.w - grad / self.step_size_denominator())
        return loss
