"""Synthetic loss sequences made of segments with different curvature.

A scenario is a list of segments. Each segment has a length and one loss
family, and the family fixes its regime label:

==============  =====================================  ================
family          loss                                    regime
==============  =====================================  ================
linear          ``<a_t, w>``, ``|a_t| <= scale``        general
quadratic       ``lam/2 |w - c_t|^2``, ``c_t`` in domain  strongly_convex
squared_error   ``(<x_t, w> - y_t)^2``                  exp_concave
==============  =====================================  ================

The worst-case gradient norm of each segment is computed analytically from
its parameters and the domain, so the gradient bound ``G`` is known before
any learner runs. Everything is drawn from ``numpy.random.default_rng(seed)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import DomainSpec, project
from .evaluation import Regime
from .exceptions import ConfigurationError, InvalidArgumentError
from .losses import LinearLoss, QuadraticLoss, SquaredErrorLoss, squared_error_exp_concavity

FAMILY_PARAMS = {
    "linear": {"scale": 1.0, "noise": 1.0},
    "quadratic": {"lam": None, "spread": 0.3},
    "squared_error": {"feature_scale": 1.0, "noise": 0.1},
}


@dataclass
class SegmentSpec:
    length: int
    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILY_PARAMS:
            raise InvalidArgumentError(f"unknown loss family {self.family!r}")
        if int(self.length) != self.length or self.length < 0:
            raise InvalidArgumentError(f"segment length must be a non-negative integer, got {self.length}")
        unknown = set(self.params) - set(FAMILY_PARAMS[self.family])
        if unknown:
            raise InvalidArgumentError(f"unknown {self.family} parameters: {sorted(unknown)}")
        missing = [k for k, v in FAMILY_PARAMS[self.family].items() if v is None and k not in self.params]
        if missing:
            raise InvalidArgumentError(f"{self.family} segment needs {missing}")

    def param(self, key):
        return float(self.params.get(key, FAMILY_PARAMS[self.family][key]))


@dataclass
class ScenarioSpec:
    """Seed, domain geometry and segments. ``gradient_bound=None`` derives ``G``."""

    seed: int
    domain: DomainSpec
    segments: list
    gradient_bound: float | None = None

    @property
    def horizon(self):
        return sum(int(s.length) for s in self.segments)


@dataclass
class Scenario:
    spec: ScenarioSpec
    domain: DomainSpec
    losses: list
    regimes: list
    segment_info: list

    @property
    def horizon(self):
        return len(self.losses)


def segment_gradient_bound(segment: SegmentSpec, domain: DomainSpec):
    """Worst-case gradient norm over the domain and, for squared error, the exp-concavity."""
    if segment.family == "linear":
        return segment.param("scale"), None
    if segment.family == "quadratic":
        return segment.param("lam") * domain.diameter, None
    fs, noise = segment.param("feature_scale"), segment.param("noise")
    # |<x, w> - y| <= |<x, w>| + |<x, w_true>| + noise
    residual = 2.0 * fs * domain.max_norm + noise
    return 2.0 * residual * fs, squared_error_exp_concavity(residual)


def _unit(rng, d):
    z = rng.standard_normal(d)
    return z / np.linalg.norm(z)


def _in_unit_ball(rng, d):
    return _unit(rng, d) * rng.random() ** (1.0 / d)


def generate_scenario(spec: ScenarioSpec) -> Scenario:
    """Draw the loss sequence and regime labels described by ``spec``."""
    domain = spec.domain
    d = domain.dimension
    info = []
    derived = 0.0
    for seg in spec.segments:
        g_seg, alpha = segment_gradient_bound(seg, domain)
        derived = max(derived, g_seg)
        info.append({"family": seg.family, "length": int(seg.length), "gradient_bound": g_seg, "alpha": alpha})
    if spec.gradient_bound is None:
        G = derived if derived > 0 else 1.0
    else:
        G = float(spec.gradient_bound)
        if G < derived * (1 - 1e-12):
            raise ConfigurationError(
                f"configured gradient bound {G:.6g} is below the scenario's worst case {derived:.6g}"
            )
    domain = domain.with_gradient_bound(G)

    rng = np.random.default_rng(spec.seed)
    losses, regimes = [], []
    start = 1
    for seg, meta in zip(spec.segments, info):
        n = int(seg.length)
        if seg.family == "linear":
            scale, noise = seg.param("scale"), seg.param("noise")
            u = _unit(rng, d)
            for _ in range(n):
                losses.append(LinearLoss(scale * ((1.0 - noise) * u + noise * _unit(rng, d))))
            regime = Regime(start, start + n - 1, "general")
        elif seg.family == "quadratic":
            lam, spread = seg.param("lam"), seg.param("spread")
            base = domain.sample(rng, 1)[0]
            for _ in range(n):
                c = project(domain, base + spread * 0.5 * domain.diameter * _in_unit_ball(rng, d))
                losses.append(QuadraticLoss(c, lam))
            regime = Regime(start, start + n - 1, "strongly_convex", lam=lam)
        else:
            fs, noise = seg.param("feature_scale"), seg.param("noise")
            w_true = domain.sample(rng, 1)[0]
            for _ in range(n):
                x = fs * _in_unit_ball(rng, d)
                y = float(x @ w_true) + noise * (2.0 * rng.random() - 1.0)
                losses.append(SquaredErrorLoss(x, y))
            regime = Regime(start, start + n - 1, "exp_concave", alpha=meta["alpha"])
        if n > 0:
            regimes.append(regime)
        meta["start"], meta["end"] = start, start + n - 1
        start += n
    return Scenario(spec, domain, losses, regimes, info)
