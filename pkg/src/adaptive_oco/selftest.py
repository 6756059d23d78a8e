"""Quick invariant checks bundled with the package (``adaptive-oco selftest``).

Each check is small enough to finish in well under a second and returns
``(ok, detail)``. The full property suites live in the test directory.
"""

from __future__ import annotations

import math

import numpy as np

from .domain import DomainSpec, project, project_generalized
from .evaluation import IntervalLosses, gc_intervals_within, verify_bounds
from .losses import LossObservation, surrogate_exp, surrogate_exp_grad, surrogate_sc, surrogate_sc_grad
from .meta import UniversalLearner, run
from .scenario import ScenarioSpec, SegmentSpec, generate_scenario
from .schedule import intervals_containing, partition_interval


def _schedule():
    for t in range(1, 1025):
        if len(intervals_containing(t)) != t.bit_length():
            return False, f"round {t}"
    for q in range(1, 33):
        for p in range(1, q + 1):
            left, right = partition_interval(p, q)
            covered = [t for k in left + right for t in range(k.r, k.s + 1)]
            if covered != list(range(p, q + 1)):
                return False, f"partition of [{p},{q}]"
    return True, "counts for t <= 1024, partitions for q <= 32"


def _surrogates():
    rng = np.random.default_rng(0)
    h, worst = 1e-5, 0.0
    for _ in range(200):
        obs = LossObservation.make(1, rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3))
        w, eta = rng.uniform(-1, 1, 3), rng.uniform(0.01, 0.2)
        if surrogate_sc(eta, obs, w) < surrogate_exp(eta, obs, w) - 1e-12:
            return False, "domination failed"
        for f, grad in ((surrogate_exp, surrogate_exp_grad), (surrogate_sc, surrogate_sc_grad)):
            fd = np.array([(f(eta, obs, w + h * e) - f(eta, obs, w - h * e)) / (2 * h) for e in np.eye(3)])
            g = grad(eta, obs, w)
            worst = max(worst, float(np.linalg.norm(fd - g) / max(np.linalg.norm(g), 1e-12)))
    return worst <= 1e-6, f"max relative gradient error {worst:.2e}"


def _projection():
    dom = DomainSpec.ball(np.zeros(2), 1.0, 1.0)
    w = project_generalized(dom, np.diag([4.0, 1.0]), np.array([2.0, 0.0]))
    ok = np.allclose(w, [1.0, 0.0], atol=1e-8) and np.allclose(project(dom, [2.0, 0.0]), [1.0, 0.0])
    return ok, f"generalized projection of (2, 0) -> {w.round(9).tolist()}"


def _learner():
    spec = ScenarioSpec(
        0,
        DomainSpec.ball(np.zeros(2), 1.0, 1.0),
        [SegmentSpec(32, "linear"), SegmentSpec(32, "squared_error"), SegmentSpec(32, "quadratic", {"lam": 1.0})],
    )
    sc = generate_scenario(spec)
    learner = UniversalLearner(sc.domain, audit=True)
    traj = run(learner, sc.losses)
    for e in traj.retirements:
        if -e.cumulative_loss > 2 * math.log2(2 * e.interval.s) + 1e-9:
            return False, f"meta-regret at {e.interval}"
    for a in traj.audit_log:
        if a.potential_after > a.potential_before + 1e-9 or a.cumulative > 4 * a.round**2:
            return False, f"potential at round {a.round}"
    bad = verify_bounds(traj, IntervalLosses(sc.losses, sc.domain), sc.regimes)
    if bad:
        return False, f"{len(bad)} bound violations"
    return True, f"T={len(traj)}, {len(gc_intervals_within(len(traj)))} GC intervals within bounds"


CHECKS = {
    "schedule": _schedule,
    "surrogates": _surrogates,
    "projection": _projection,
    "learner": _learner,
}


def run_selftest(out=print) -> bool:
    ok_all = True
    for name, check in CHECKS.items():
        ok, detail = check()
        ok_all &= bool(ok)
        out(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return ok_all
