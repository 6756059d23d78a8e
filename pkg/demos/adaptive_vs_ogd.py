#!/usr/bin/env python3
"""
Adaptive regret against plain gradient descent
==============================================

Plain OGD with step D/(G sqrt(t)) has a shrinking step, so after a change of
minimizer it moves slowly. The universal learner restarts experts on a
geometric schedule and keeps small windows cheap.

We measure the worst regret over any window of length tau.
"""
import numpy as np

from adaptive_oco import DomainSpec, ScenarioSpec, SegmentSpec, UniversalLearner, generate_scenario, run
from adaptive_oco.evaluation import IntervalLosses, baseline_ogd, strongly_adaptive_regret

domain = DomainSpec.ball(np.zeros(2), 1.0, 1.0)

# quadratics whose center jumps every 32 rounds
segments = [SegmentSpec(32, "quadratic", {"lam": 1.0, "spread": 0.2}) for _ in range(16)]
sc = generate_scenario(ScenarioSpec(seed=3, domain=domain, segments=segments))
il = IntervalLosses(sc.losses, sc.domain)

learners = {
    "uma": run(UniversalLearner(sc.domain), sc.losses),
    "pae": run(UniversalLearner(sc.domain, mode="pae"), sc.losses),
    "ogd": baseline_ogd(sc.domain, sc.losses),
}

taus = (8, 16, 32, 64, 128)
print("worst regret over windows of length tau")
print(f"{'tau':>5}" + "".join(f"{name:>10}" for name in learners))
for tau in taus:
    row = [strongly_adaptive_regret(traj, il, tau) for traj in learners.values()]
    print(f"{tau:5d}" + "".join(f"{v:10.3f}" for v in row))

print()
print("total loss:", {name: round(float(t.losses.sum()), 3) for name, t in learners.items()})
