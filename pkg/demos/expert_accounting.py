#!/usr/bin/env python3
"""
How many experts are alive
==========================

Each geometric-covering interval [i 2^k, (i+1) 2^k - 1] starts a batch of
experts, one per learning rate, and retires them when it ends. At round t
there are floor(log2 t) + 1 live intervals, so the work per round grows
only like log^2 t.
"""
import math

import numpy as np

from adaptive_oco import DomainSpec, ScenarioSpec, SegmentSpec, UniversalLearner, generate_scenario, run
from adaptive_oco.schedule import intervals_containing, learning_rate_grid

domain = DomainSpec.ball(np.zeros(2), 1.0, 1.0)

t = 13
print(f"intervals alive at round {t}:")
for key in intervals_containing(t):
    rates = learning_rate_grid(key.length, domain.diameter, domain.gradient_bound)
    print(f"  [{key.r:2d}, {key.s:2d}]  {len(rates)} rates, largest {rates[0]:.4f}")

sc = generate_scenario(ScenarioSpec(seed=0, domain=domain, segments=[SegmentSpec(4096, "linear")]))
traj = run(UniversalLearner(sc.domain, audit=True), sc.losses)

print()
print(f"{'round':>6} {'ons':>5} {'aogd':>5} {'log2(t)^2':>10}")
for r in (1, 2, 4, 16, 64, 256, 1024, 4096):
    print(f"{r:6d} {traj.n_active_ons[r - 1]:5d} {traj.n_active_aogd[r - 1]:5d} {math.log2(r) ** 2:10.1f}")

# every retired expert ends with cumulative surrogate loss above -2 log2(2s)
worst = max(-e.cumulative_loss - 2 * math.log2(2 * e.interval.s) for e in traj.retirements)
print()
print(f"{len(traj.retirements)} retirements; largest excess over the meta-regret limit: {worst:.3f}")
