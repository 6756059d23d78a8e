"""Regret measurement, interval regret bounds and an OGD baseline.

Regret over an interval ``[p, q]`` is the learner's cumulative loss minus the
smallest cumulative loss of one fixed point of the domain. All scenario loss
families are quadratic in ``w``, so interval sums come from prefix sums of
their quadratic forms and are minimized exactly (``IntervalLosses``).
``offline_comparator`` is an independent projected-gradient solver that only
needs values and gradients.

Bound functions (natural log unless written log2)::

    a(p, q)     = 2 log2(2q) + 5 d log(q - p + 2) + 5
    b(p, q)     = 2 ceil(log2(q - p + 2))
    a_hat(p, q) = 1 + 2 log2(2q) + log(q - p + 2)

    exp-concave (alpha):       (10 D G + 9 / (2 beta)) a b,  beta = min(1/(4GD), alpha) / 2
    strongly convex (lam):     (10 D G + 9 G^2 / (2 lam)) a_hat b
    general convex:            10 D G a_hat b + 21 D G sqrt(a_hat (q - p + 1))
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .domain import DomainSpec, minimize_quadratic, project
from .exceptions import ConvergenceError, InvalidArgumentError
from .losses import true_loss_eval
from .meta import RoundRecord, Trajectory
from .schedule import ceil_log2, intervals_containing

REGIMES = ("general", "exp_concave", "strongly_convex")


@dataclass(frozen=True)
class BoundValues:
    a: float
    b: float
    a_hat: float
    theorem1_bound: float | None = None
    theorem2_bound: float | None = None
    general_convex_bound: float | None = None


def bound_values(p, q, d, D, G, alpha=None, lam=None) -> BoundValues:
    """Interval regret bounds for ``[p, q]``.

    ``theorem1_bound`` is filled in when ``alpha`` (exp-concavity) is given,
    ``theorem2_bound`` when ``lam`` (strong convexity) is given. The general
    convex bound is always computed.
    """
    if not 1 <= p <= q:
        raise InvalidArgumentError(f"need 1 <= p <= q, got p={p}, q={q}")
    n2 = q - p + 2
    a = 2.0 * math.log2(2 * q) + 5.0 * d * math.log(n2) + 5.0
    b = 2.0 * ceil_log2(n2)
    a_hat = 1.0 + 2.0 * math.log2(2 * q) + math.log(n2)
    t1 = t2 = None
    if alpha is not None:
        if alpha <= 0:
            raise InvalidArgumentError("alpha must be positive")
        beta = 0.5 * min(1.0 / (4.0 * G * D), alpha)
        t1 = (10.0 * D * G + 9.0 / (2.0 * beta)) * a * b
    if lam is not None:
        if lam <= 0:
            raise InvalidArgumentError("lam must be positive")
        t2 = (10.0 * D * G + 9.0 * G * G / (2.0 * lam)) * a_hat * b
    general = 10.0 * D * G * a_hat * b + 21.0 * D * G * math.sqrt(a_hat * (q - p + 1))
    return BoundValues(a, b, a_hat, t1, t2, general)


@dataclass(frozen=True)
class Regime:
    """Rounds ``start..end`` (inclusive) share one curvature label.

    ``kind`` is one of ``general``, ``exp_concave`` (with ``alpha``) or
    ``strongly_convex`` (with ``lam``).
    """

    start: int
    end: int
    kind: str
    alpha: float | None = None
    lam: float | None = None

    def __post_init__(self):
        if self.kind not in REGIMES:
            raise InvalidArgumentError(f"unknown regime {self.kind!r}")
        if self.kind == "exp_concave" and not self.alpha:
            raise InvalidArgumentError("exp_concave regime needs alpha")
        if self.kind == "strongly_convex" and not self.lam:
            raise InvalidArgumentError("strongly_convex regime needs lam")

    @property
    def label(self):
        if self.kind == "exp_concave":
            return f"exp_concave(alpha={self.alpha:.6g})"
        if self.kind == "strongly_convex":
            return f"strongly_convex(lam={self.lam:.6g})"
        return "general"


def regime_for(p, q, regimes) -> Regime:
    """Regime covering ``[p, q]``; mixed coverage falls back to ``general``."""
    parts = [r for r in regimes if r.start <= q and r.end >= p]
    kinds = {r.kind for r in parts}
    if len(kinds) != 1:
        return Regime(p, q, "general")
    kind = kinds.pop()
    if kind == "exp_concave":
        return Regime(p, q, kind, alpha=min(r.alpha for r in parts))
    if kind == "strongly_convex":
        return Regime(p, q, kind, lam=min(r.lam for r in parts))
    return Regime(p, q, "general")


def matching_bound(p, q, domain: DomainSpec, regime: Regime) -> float:
    d, D, G = domain.dimension, domain.diameter, domain.gradient_bound
    bv = bound_values(p, q, d, D, G, alpha=regime.alpha, lam=regime.lam)
    if regime.kind == "exp_concave":
        return bv.theorem1_bound
    if regime.kind == "strongly_convex":
        return bv.theorem2_bound
    return bv.general_convex_bound


class IntervalLosses:
    """Prefix sums of the losses' quadratic forms, for fast interval minimization.

    Rounds are 1-based: ``minimize(p, q)`` covers ``losses[p-1 : q]``.
    """

    def __init__(self, losses, domain: DomainSpec):
        self.domain = domain
        self.losses = list(losses)
        d = domain.dimension
        T = len(self.losses)
        A = np.zeros((T + 1, d, d))
        h = np.zeros((T + 1, d))
        c = np.zeros(T + 1)
        for t, loss in enumerate(self.losses, start=1):
            At, ht, ct = loss.quadratic_form()
            A[t], h[t], c[t] = At, ht, ct
        self._A, self._h, self._c = A[1:], h[1:], c[1:]
        self.A, self.h, self.c = np.cumsum(A, axis=0), np.cumsum(h, axis=0), np.cumsum(c)

    def __len__(self):
        return len(self.losses)

    def form(self, p, q):
        self._check(p, q)
        return self.A[q] - self.A[p - 1], self.h[q] - self.h[p - 1], self.c[q] - self.c[p - 1]

    def minimize(self, p, q):
        """Best fixed point on ``[p, q]`` and its cumulative loss."""
        A, h, c = self.form(p, q)
        return minimize_quadratic(self.domain, A, h, c)

    def cumulative_loss(self, p, q, w) -> float:
        A, h, c = self.form(p, q)
        w = np.asarray(w, dtype=float)
        return float(w @ A @ w - 2.0 * h @ w + c)

    def pointwise(self, decisions) -> np.ndarray:
        """``f_t(w_t)`` for each round, given decisions of shape ``(T, d)``."""
        W = np.asarray(decisions, dtype=float)
        quad = np.einsum("ti,tij,tj->t", W, self._A, W)
        return quad - 2.0 * np.einsum("ti,ti->t", self._h, W) + self._c

    def _check(self, p, q):
        if not 1 <= p <= q <= len(self):
            raise InvalidArgumentError(f"interval [{p},{q}] outside rounds 1..{len(self)}")


def offline_comparator(losses, domain: DomainSpec, tol=1e-8, max_iter=200_000, cross_check=True):
    """Minimize the summed losses over the domain by projected gradient descent.

    Uses backtracking with step growth, warm-started at the domain midpoint.
    Stops once the gradient-mapping norm times the diameter, an upper bound
    on the optimality gap, falls below ``tol * len(losses)``. For ``d <= 2``
    and ``cross_check=True`` a dense grid over the domain must not beat the
    answer by more than that gap.

    Returns
    -------
    w : ndarray
    cum_loss : float

    Raises
    ------
    ConvergenceError
        If the iteration cap is reached or the grid check fails.
    """
    losses = list(losses)
    n = len(losses)
    D = domain.diameter
    if n == 0:
        return domain.midpoint, 0.0
    forms = None
    if all(hasattr(f, "quadratic_form") for f in losses):
        forms = [f.quadratic_form() for f in losses]
        A = sum(f[0] for f in forms)
        h = sum(f[1] for f in forms)
        c = float(sum(f[2] for f in forms))

        def F(w):
            Aw = A @ w
            return float(w @ Aw - 2.0 * h @ w + c), 2.0 * Aw - 2.0 * h

    else:

        def F(w):
            total, grad = 0.0, np.zeros(domain.dimension)
            for f in losses:
                v, g = true_loss_eval(f, w)
                total += v
                grad += g
            return total, grad

    target = tol * n
    w = domain.midpoint
    f, g = F(w)
    gnorm = float(np.linalg.norm(g))
    step = D / gnorm if gnorm > 0 else 1.0
    gap = math.inf
    for _ in range(max_iter):
        while True:
            w_new = project(domain, w - step * g)
            diff = w_new - w
            f_new, g_new = F(w_new)
            if forms is not None:
                # exact sufficient-decrease test for a quadratic, free of cancellation
                accept = float(diff @ A @ diff) <= float(diff @ diff) / (2.0 * step)
            else:
                accept = f_new <= f + float(g @ diff) + float(diff @ diff) / (2.0 * step) + 1e-15 * max(1.0, abs(f))
            if accept:
                break
            step *= 0.5
            if step < 1e-300:
                raise ConvergenceError("backtracking collapsed", best=w, value=f)
        gap = float(np.linalg.norm(diff)) / step * D
        w, f, g = w_new, f_new, g_new
        if gap <= target:
            break
        step *= 2.0
    else:
        raise ConvergenceError(
            f"offline comparator did not converge (gap bound {gap:.3e})", residual=gap, best=w, value=f
        )
    if cross_check and domain.dimension <= 2:
        grid_best = _grid_minimum(domain, F, forms)
        if grid_best < f - target - 1e-12 * max(1.0, abs(f)):
            raise ConvergenceError(
                f"grid point beats projected gradient ({grid_best:.12g} < {f:.12g})",
                best=w,
                value=f,
            )
    return w, f


def grid_points(domain: DomainSpec, per_axis=201) -> np.ndarray:
    """Feasible points of a uniform grid over the domain's bounding box (``d <= 2``)."""
    d = domain.dimension
    if d > 2:
        raise InvalidArgumentError("dense grids are only used for d <= 2")
    if domain.kind == "ball":
        lo, hi = domain.center - domain.radius, domain.center + domain.radius
    else:
        lo, hi = domain.lower, domain.upper
    axes = [np.linspace(lo[j], hi[j], per_axis) for j in range(d)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    if domain.kind == "ball":
        pts = pts[np.linalg.norm(pts - domain.center, axis=1) <= domain.radius]
    return pts


def _grid_minimum(domain, F, forms):
    pts = grid_points(domain)
    if forms is not None:
        A = sum(f[0] for f in forms)
        h = sum(f[1] for f in forms)
        c = sum(f[2] for f in forms)
        vals = np.einsum("ni,ij,nj->n", pts, A, pts) - 2.0 * pts @ h + c
        return float(vals.min())
    return min(F(p)[0] for p in pts)


def learner_losses(trajectory: Trajectory, intervals: IntervalLosses) -> np.ndarray:
    """Per-round loss of the trajectory's decisions, recomputed from the losses."""
    return intervals.pointwise(trajectory.decisions)


class _RegretScanner:
    def __init__(self, trajectory, intervals):
        if len(trajectory) != len(intervals):
            raise InvalidArgumentError(
                f"trajectory has {len(trajectory)} rounds, scenario has {len(intervals)}"
            )
        self.intervals = intervals
        self.prefix = np.concatenate([[0.0], np.cumsum(learner_losses(trajectory, intervals))])

    def regret(self, p, q):
        _, best = self.intervals.minimize(p, q)
        learner = self.prefix[q] - self.prefix[p - 1]
        return learner - best, learner, best


def interval_regret(trajectory, intervals: IntervalLosses, p, q) -> float:
    return _RegretScanner(trajectory, intervals).regret(p, q)[0]


def window_regrets(trajectory, intervals: IntervalLosses, tau) -> np.ndarray:
    """Regret of every window of length ``tau``; entry ``j`` is window ``[j+1, j+tau]``."""
    T = len(trajectory)
    if not 1 <= tau <= T:
        raise InvalidArgumentError(f"window length {tau} outside 1..{T}")
    scan = _RegretScanner(trajectory, intervals)
    return np.array([scan.regret(p, p + tau - 1)[0] for p in range(1, T - tau + 2)])


def strongly_adaptive_regret(trajectory, intervals: IntervalLosses, tau) -> float:
    """Largest regret over windows of length exactly ``tau``."""
    return float(window_regrets(trajectory, intervals, tau).max())


WEAK_REGRET_MAX_T = 512


def weakly_adaptive_regret(trajectory, intervals: IntervalLosses, return_interval=False):
    """Largest regret over all intervals ``[p, q]``; only for ``T <= 512``."""
    T = len(trajectory)
    if T > WEAK_REGRET_MAX_T:
        raise InvalidArgumentError(f"weakly adaptive regret is O(T^2); T={T} exceeds {WEAK_REGRET_MAX_T}")
    scan = _RegretScanner(trajectory, intervals)
    best, where = -math.inf, None
    for p in range(1, T + 1):
        for q in range(p, T + 1):
            r = scan.regret(p, q)[0]
            if r > best:
                best, where = r, (p, q)
    return (best, where) if return_interval else best


@dataclass
class Violation:
    p: int
    q: int
    regime: str
    regret: float
    bound: float


def gc_intervals_within(T) -> list[tuple[int, int]]:
    """All geometric covering intervals contained in ``[1, T]``."""
    out = set()
    for t in range(1, T + 1):
        for key in intervals_containing(t):
            if key.s <= T:
                out.add((key.r, key.s))
    return sorted(out)


def random_intervals(T, n, rng, exclude_gc=True) -> list[tuple[int, int]]:
    """``n`` distinct random sub-intervals of ``[1, T]`` (not GC intervals by default)."""
    gc = set(gc_intervals_within(T)) if exclude_gc else set()
    total = T * (T + 1) // 2 - len(gc)
    n = min(n, total)
    out = set()
    while len(out) < n:
        p, q = sorted(int(v) for v in rng.integers(1, T + 1, size=2))
        if (p, q) not in gc:
            out.add((p, q))
    return sorted(out)


def verify_bounds(trajectory, intervals: IntervalLosses, regimes, checked=None, families=REGIMES):
    """Compare interval regret against the bound matching each interval's regime.

    Parameters
    ----------
    trajectory : Trajectory
    intervals : IntervalLosses
    regimes : list of Regime
        Curvature labels from the scenario metadata.
    checked : list of (p, q), optional
        Intervals to check; defaults to every GC interval inside ``[1, T]``
        plus every regime segment.
    families : iterable of str
        Regime kinds to check. A learner that only guarantees the
        exp-concave bound passes ``("exp_concave",)``.

    Returns
    -------
    list of Violation
        Empty when every bound holds.
    """
    T = len(trajectory)
    if checked is None:
        checked = sorted(set(gc_intervals_within(T)) | {(r.start, r.end) for r in regimes})
    scan = _RegretScanner(trajectory, intervals)
    domain = intervals.domain
    out = []
    for p, q in checked:
        regime = regime_for(p, q, regimes)
        if regime.kind not in families:
            continue
        regret = scan.regret(p, q)[0]
        bound = matching_bound(p, q, domain, regime)
        if regret > bound:
            out.append(Violation(p, q, regime.label, float(regret), float(bound)))
    return out


@dataclass
class RegretRecord:
    kind: str
    p: int
    q: int
    regret: float
    bound: float | None
    regime: str
    learner_loss: float
    comparator_loss: float

    @property
    def tau(self):
        return self.q - self.p + 1


REPORT_FIELDS = ("learner", "kind", "p", "q", "tau", "regret", "bound", "regime")


@dataclass
class RegretReport:
    learner: str
    records: list = field(default_factory=list)
    sa_regret: dict = field(default_factory=dict)
    wa_regret: float | None = None
    violations: list = field(default_factory=list)

    def csv_rows(self):
        for r in self.records:
            yield [
                self.learner,
                r.kind,
                str(r.p),
                str(r.q),
                str(r.tau),
                repr(float(r.regret)),
                "" if r.bound is None else repr(float(r.bound)),
                r.regime,
            ]

    def summary(self) -> str:
        lines = [f"learner {self.learner}"]
        for r in self.records:
            if r.kind in ("static", "wa"):
                lines.append(f"  {r.kind} regret on [{r.p},{r.q}]: {r.regret:.6g}")
        for tau, v in sorted(self.sa_regret.items()):
            lines.append(f"  SA-Regret(T, {tau}) = {v:.6g}")
        lines.append(f"  bound violations: {len(self.violations)}")
        for v in self.violations:
            lines.append(f"    [{v.p},{v.q}] {v.regime}: regret {v.regret:.6g} > bound {v.bound:.6g}")
        return "\n".join(lines)


def report_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_FIELDS)
    for rep in reports:
        writer.writerows(rep.csv_rows())
    return buf.getvalue()


def build_report(trajectory, intervals: IntervalLosses, regimes, taus=(), weak=True, verify=None):
    """Regret over the whole run, each regime segment, worst windows per ``tau``.

    ``verify`` selects the regime kinds whose bounds are checked over every
    GC interval and segment (``None`` skips verification).
    """
    T = len(trajectory)
    scan = _RegretScanner(trajectory, intervals)
    domain = intervals.domain
    rep = RegretReport(trajectory.learner)

    def record(kind, p, q):
        regret, learner, best = scan.regret(p, q)
        regime = regime_for(p, q, regimes)
        bound = matching_bound(p, q, domain, regime)
        rep.records.append(RegretRecord(kind, p, q, float(regret), bound, regime.label, learner, best))
        return regret

    if T == 0:
        return rep
    record("static", 1, T)
    for r in regimes:
        if (r.start, r.end) != (1, T):
            record("segment", r.start, r.end)
    for tau in taus:
        if tau > T:
            continue
        vals = window_regrets(trajectory, intervals, tau)
        j = int(np.argmax(vals))
        rep.sa_regret[tau] = float(vals[j])
        record("sa", j + 1, j + tau)
    if weak and T <= WEAK_REGRET_MAX_T:
        value, (p, q) = weakly_adaptive_regret(trajectory, intervals, return_interval=True)
        rep.wa_regret = float(value)
        record("wa", p, q)
    if verify:
        rep.violations = verify_bounds(trajectory, intervals, regimes, families=verify)
    return rep


class OgdBaseline:
    """Projected online gradient descent with a fixed step-size schedule.

    ``rule="general"`` uses ``D / (G sqrt(t))``; ``rule="strongly_convex"``
    uses ``1 / (lam t)``.
    """

    def __init__(self, domain: DomainSpec, rule="general", lam=None):
        if rule not in ("general", "strongly_convex"):
            raise InvalidArgumentError(f"unknown step rule {rule!r}")
        if rule == "strongly_convex" and not (lam and lam > 0):
            raise InvalidArgumentError("strongly_convex rule needs lam > 0")
        self.domain = domain
        self.rule = rule
        self.lam = lam
        self.t = 0
        self.w = domain.midpoint
        self.name = "ogd" if rule == "general" else "ogd_sc"

    def step_size(self, t):
        if self.rule == "general":
            return self.domain.diameter / (self.domain.gradient_bound * math.sqrt(t))
        return 1.0 / (self.lam * t)

    def begin_round(self):
        return self

    def predict(self):
        return self.w.copy()

    def observe(self, loss) -> RoundRecord:
        t = self.t + 1
        w = self.w
        value, g = true_loss_eval(loss, w)
        self.w = project(self.domain, w - self.step_size(t) * g)
        self.t = t
        return RoundRecord(t, w.copy(), value, g, 0, 0, 0.0)


def baseline_ogd(domain, losses, rule="general", lam=None) -> Trajectory:
    from .meta import run

    return run(OgdBaseline(domain, rule=rule, lam=lam), losses)


__all__ = [
    "BoundValues",
    "IntervalLosses",
    "OgdBaseline",
    "Regime",
    "RegretReport",
    "Violation",
    "baseline_ogd",
    "bound_values",
    "build_report",
    "gc_intervals_within",
    "grid_points",
    "interval_regret",
    "offline_comparator",
    "random_intervals",
    "regime_for",
    "strongly_adaptive_regret",
    "verify_bounds",
    "weakly_adaptive_regret",
    "window_regrets",
]
