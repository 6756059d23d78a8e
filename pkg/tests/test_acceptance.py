"""Acceptance gate: eleven end-to-end checks at their stated tolerances.

Each test records a one-line ``detail`` property with the measured numbers;
the conftest prints one PASS/FAIL line per check after the run.
"""

import math
import time

import numpy as np

from adaptive_oco import (
    AogdExpert,
    DomainSpec,
    IntervalKey,
    LossObservation,
    OnsExpert,
    ScenarioSpec,
    SegmentSpec,
    UniversalLearner,
    generate_scenario,
    intervals_containing,
    partition_interval,
    run,
    surrogate_exp,
    surrogate_exp_grad,
    surrogate_sc,
    surrogate_sc_grad,
)
from adaptive_oco.cli import main
from adaptive_oco.domain import minimize_quadratic
from adaptive_oco.evaluation import (
    IntervalLosses,
    bound_values,
    gc_intervals_within,
    grid_points,
    interval_regret,
    matching_bound,
    offline_comparator,
    random_intervals,
    regime_for,
    window_regrets,
)
from adaptive_oco.losses import surrogate_exp_quadratic, surrogate_sc_quadratic
from adaptive_oco.schedule import ceil_log2, learning_rate_grid

UNIT_BALL = DomainSpec.ball(np.zeros(2), 1.0, 1.0)
UNIT_BALL_3 = DomainSpec.ball(np.zeros(3), 1.0, 1.0)


def scenario(seed, segments, domain=UNIT_BALL):
    return generate_scenario(ScenarioSpec(seed, domain, segments))


def regret_vs_offline(sc, traj, p, q, tol=1e-8):
    """Learner loss minus the projected-gradient comparator on ``[p, q]``."""
    _, best = offline_comparator(sc.losses[p - 1 : q], sc.domain, tol=tol)
    return float(traj.losses[p - 1 : q].sum() - best)


def interval_bound_violations(sc, traj, rng, n_random=50):
    T = len(traj)
    checked = gc_intervals_within(T) + random_intervals(T, n_random, rng)
    bad, worst = [], 0.0
    for p, q in checked:
        regime = regime_for(p, q, sc.regimes)
        bound = matching_bound(p, q, sc.domain, regime)
        regret = regret_vs_offline(sc, traj, p, q)
        worst = max(worst, regret / bound)
        if regret > bound:
            bad.append((p, q, regret, bound))
    return bad, len(checked), worst


def test_meta_regret_at_every_retirement(record_property):
    start = time.perf_counter()
    violations, retirements = 0, 0
    slack = math.inf
    for seed in range(20):
        sc = scenario(seed, [SegmentSpec(256, "linear")])
        traj = run(UniversalLearner(sc.domain, audit=True), sc.losses)
        for e in traj.retirements:
            retirements += 1
            margin = 2 * math.log2(2 * e.interval.s) + 1e-9 + e.cumulative_loss
            slack = min(slack, margin)
            violations += margin < 0
    elapsed = time.perf_counter() - start
    record_property(
        "detail", f"{violations} violations over {retirements} retirements, 20 seeds, {elapsed:.1f}s (limit 30s)"
    )
    assert violations == 0
    assert elapsed <= 30.0


def test_potential_never_increases_and_stays_below_4t2(record_property):
    sc = scenario(0, [SegmentSpec(342, "linear"), SegmentSpec(341, "squared_error"), SegmentSpec(341, "quadratic", {"lam": 1.0})])
    traj = run(UniversalLearner(sc.domain, audit=True), sc.losses)
    rises = [a.round for a in traj.audit_log if a.potential_after > a.potential_before + 1e-9]
    over = [a.round for a in traj.audit_log if a.cumulative > 4 * a.round**2]
    record_property(
        "detail",
        f"T={len(traj.audit_log)}: {len(rises)} increases, {len(over)} rounds above 4t^2, "
        f"final cumulative {traj.audit_log[-1].cumulative:.1f} of {traj.audit_log[-1].created} experts",
    )
    assert len(traj.audit_log) == 1024
    assert not rises and not over


def test_exp_concave_interval_bounds(record_property, rng):
    sc = scenario(0, [SegmentSpec(128, "squared_error")])
    bad, n, worst = [], 0, 0.0
    for mode in ("uma", "pae"):
        traj = run(UniversalLearner(sc.domain, mode=mode), sc.losses)
        b, k, w = interval_bound_violations(sc, traj, rng)
        bad += b
        n += k
        worst = max(worst, w)
    # growth of static regret over log T, averaged over a fixed set of seeds
    Ts = (32, 64, 128)
    normalized = np.zeros(len(Ts))
    for seed in range(20):
        s = scenario(seed, [SegmentSpec(128, "squared_error")])
        traj = run(UniversalLearner(s.domain), s.losses)
        il = IntervalLosses(s.losses, s.domain)
        normalized += [interval_regret(traj, il, 1, T) / math.log(T) for T in Ts]
    normalized /= 20
    ratios = normalized[1:] / normalized[:-1]
    record_property(
        "detail",
        f"{len(bad)} violations in {n} intervals (uma+pae, alpha={sc.regimes[0].alpha:.4g}), "
        f"max regret/bound {worst:.3g}; mean regret/log T {np.round(normalized, 3).tolist()}, "
        f"successive ratios {np.round(ratios, 3).tolist()} (limit 1.6)",
    )
    assert not bad
    assert np.all(normalized > 0) and np.all(ratios <= 1.6)


def test_strongly_convex_interval_bounds(record_property, rng):
    bad, n, worst = [], 0, 0.0
    for k, lam in enumerate((0.5, 1.0, 2.0)):
        sc = scenario(k, [SegmentSpec(128, "quadratic", {"lam": lam})])
        traj = run(UniversalLearner(sc.domain), sc.losses)
        b, m, w = interval_bound_violations(sc, traj, rng)
        bad += b
        n += m
        worst = max(worst, w)
    record_property("detail", f"{len(bad)} violations in {n} intervals over lam in (0.5, 1, 2), max regret/bound {worst:.3g}")
    assert not bad


def test_general_convex_strongly_adaptive_regret(record_property):
    sc = scenario(0, [SegmentSpec(256, "linear")])
    traj = run(UniversalLearner(sc.domain), sc.losses)
    il = IntervalLosses(sc.losses, sc.domain)
    D, G = sc.domain.diameter, sc.domain.gradient_bound
    taus = (8, 16, 32, 64)
    bad, normalized, parts = [], [], []
    for tau in taus:
        vals = window_regrets(traj, il, tau)
        j = int(np.argmax(vals))
        p, q = j + 1, j + tau
        # confirm the worst window with the projected-gradient comparator
        sa = max(float(vals[j]), regret_vs_offline(sc, traj, p, q))
        bv = bound_values(p, q, sc.domain.dimension, D, G)
        bound = 10 * D * G * bv.a_hat * bv.b + 21 * D * G * math.sqrt(bv.a_hat * tau)
        if sa > bound:
            bad.append(tau)
        normalized.append(sa / math.sqrt(tau))
        parts.append(f"tau={tau}: {sa:.3g}/{bound:.4g}")
    spread = max(normalized) / min(normalized)
    record_property("detail", f"{'; '.join(parts)}; max/min of SA/sqrt(tau) = {spread:.3f} (limit 3)")
    assert not bad
    assert min(normalized) > 0 and spread <= 3


def test_switching_regimes_per_segment(record_property):
    sc = scenario(
        0,
        [SegmentSpec(64, "linear"), SegmentSpec(64, "squared_error"), SegmentSpec(64, "quadratic", {"lam": 1.0})],
    )
    traj = run(UniversalLearner(sc.domain), sc.losses)
    parts, bad = [], []
    for r in sc.regimes:
        regret = regret_vs_offline(sc, traj, r.start, r.end)
        bound = matching_bound(r.start, r.end, sc.domain, r)
        parts.append(f"{r.kind} [{r.start},{r.end}] {regret:.3g} <= {bound:.4g}")
        if regret > bound:
            bad.append(r)
    record_property("detail", "; ".join(parts))
    assert len(sc.regimes) == 3 and not bad


def _expert_regret(cls, seed, length, domain, grid):
    rng = np.random.default_rng(seed)
    d = domain.dimension
    key = IntervalKey(length.bit_length() - 1, int(rng.integers(1, 9)))
    eta = float(rng.choice(learning_rate_grid(length, domain.diameter, domain.gradient_bound)))
    e = cls(key, eta, domain)
    form = surrogate_exp_quadratic if cls is OnsExpert else surrogate_sc_quadratic
    A, h, c = np.zeros((d, d)), np.zeros(d), 0.0
    for t in range(key.r, key.s + 1):
        g = rng.normal(size=d)
        g *= domain.gradient_bound * rng.random() / np.linalg.norm(g)
        obs = LossObservation.make(t, domain.sample(rng, 1)[0], g)
        e.step(obs)
        Ai, hi, ci = form(eta, obs)
        A, h, c = A + Ai, h + hi, c + ci
    on_grid = float((np.einsum("ni,ij,nj->n", grid, A, grid) - 2 * grid @ h + c).min())
    best = min(on_grid, minimize_quadratic(domain, A, h, c)[1])
    return e.cumulative_loss - best, key


def test_expert_regret_on_surrogates(record_property):
    domain = UNIT_BALL
    grid = grid_points(domain, per_axis=201)
    d = domain.dimension
    bad, worst = {"ons": 0, "aogd": 0}, {"ons": 0.0, "aogd": 0.0}
    for seed in range(100):
        for length in (1, 2, 4, 8, 16, 32):
            r, key = _expert_regret(OnsExpert, seed, length, domain, grid)
            bound = 5 * d * math.log(key.s - key.r + 2) + 5
            worst["ons"] = max(worst["ons"], r / bound)
            bad["ons"] += r > bound
            r, key = _expert_regret(AogdExpert, seed, length, domain, grid)
            bound = 1 + math.log(key.s - key.r + 2)
            worst["aogd"] = max(worst["aogd"], r / bound)
            bad["aogd"] += r > bound
    record_property(
        "detail",
        f"violations ons={bad['ons']} aogd={bad['aogd']} over 600 runs each; "
        f"max regret/bound ons={worst['ons']:.3g} aogd={worst['aogd']:.3g}",
    )
    assert bad == {"ons": 0, "aogd": 0}


def test_surrogate_gradients_and_domination(record_property):
    rng = np.random.default_rng(2024)
    D, G, d, h = 2.0, 1.0, 3, 1e-5
    worst_fd, worst_dom = 0.0, math.inf
    for _ in range(10_000):
        wt, w = UNIT_BALL_3.sample(rng, 2)
        g = rng.normal(size=d)
        g *= G * rng.random() / np.linalg.norm(g)
        eta = rng.random() / (5 * D * G)
        obs = LossObservation.make(1, wt, g)
        for f, grad in ((surrogate_exp, surrogate_exp_grad), (surrogate_sc, surrogate_sc_grad)):
            fd = np.array([(f(eta, obs, w + h * e) - f(eta, obs, w - h * e)) / (2 * h) for e in np.eye(d)])
            an = grad(eta, obs, w)
            worst_fd = max(worst_fd, float(np.linalg.norm(fd - an) / max(np.linalg.norm(an), 1e-300)))
        worst_dom = min(worst_dom, surrogate_sc(eta, obs, w) - surrogate_exp(eta, obs, w))
    record_property("detail", f"max relative FD error {worst_fd:.2e} (limit 1e-6); min(sc - exp) {worst_dom:.2e}")
    assert worst_fd <= 1e-6
    assert worst_dom >= -1e-12


def test_schedule_counts_and_partitions(record_property):
    count_bad = [t for t in range(1, 4097) if len(intervals_containing(t)) != math.floor(math.log2(t)) + 1]
    part_bad, checked = [], 0
    for q in range(1, 129):
        for p in range(1, q + 1):
            checked += 1
            left, right = partition_interval(p, q)
            pieces = left + right
            cover = [t for k in pieces for t in range(k.r, k.s + 1)] == list(range(p, q + 1))
            ok_left = all(a.length / b.length <= 0.5 for a, b in zip(left, left[1:]))
            ok_right = all(b.length / a.length <= 0.5 for a, b in zip(right, right[1:]))
            limit = ceil_log2(q - p + 2)
            if not (cover and ok_left and ok_right and len(right) <= limit and len(left) <= limit):
                part_bad.append((p, q))
    record_property("detail", f"{len(count_bad)} count mismatches for t <= 4096; {len(part_bad)} bad partitions of {checked}")
    assert not count_bad and not part_bad


def test_active_expert_accounting(record_property):
    sc = scenario(0, [SegmentSpec(4096, "linear")])
    start = time.perf_counter()
    uma = run(UniversalLearner(sc.domain, mode="uma"), sc.losses)
    pae = run(UniversalLearner(sc.domain, mode="pae"), sc.losses)
    elapsed = time.perf_counter() - start
    t = np.arange(1, 4097)
    limit = np.array([2 * (math.floor(math.log2(s)) + 1) * (1 + math.ceil(0.5 * math.log2(s) - 1e-12)) for s in t])
    uma_total = uma.n_active_ons + uma.n_active_aogd
    pae_total = pae.n_active_ons + pae.n_active_aogd
    over = int(np.sum(uma_total > limit))
    not_half = int(np.sum(2 * pae_total != uma_total))
    record_property(
        "detail",
        f"T=4096: {over} rounds above the limit, {not_half} rounds where PAE != UMA/2, "
        f"peak UMA count {uma_total.max()}, {elapsed:.1f}s",
    )
    assert over == 0 and not_half == 0


CONFIG = """\
[domain]
kind = ball
dimension = 2
radius = 1.0

[scenario]
seed = 7

[segment.1]
length = 40
family = linear
[segment.2]
length = 40
family = squared_error
[segment.3]
length = 40
family = quadratic
lam = 1.0

[learners]
names = uma, pae, ogd
"""


def test_identical_config_byte_identical_trajectory(record_property, tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(CONFIG)
    codes = [main(["run", "--config", str(cfg), "--out", str(tmp_path / name)]) for name in ("a", "b")]
    a = (tmp_path / "a" / "trajectory.csv").read_bytes()
    b = (tmp_path / "b" / "trajectory.csv").read_bytes()
    record_property("detail", f"exit codes {codes}, {len(a)} bytes, identical={a == b}")
    assert codes == [0, 0] and a == b
