"""Sleeping-expert aggregation and the two universal learners.

Each round, experts are created for every geometric covering interval that
opens at that round and every learning rate of that interval's grid. The
decision is the tilted exponentially weighted average of all awake experts,

    w_t = sum_E exp(-L_E) eta_E w_E / sum_E exp(-L_E) eta_E,

where ``L_E`` is the expert's cumulative surrogate loss over its own lifetime.
After the gradient at ``w_t`` is revealed every awake expert is charged its
surrogate loss and updated, and experts whose interval ends are dropped.

``mode="uma"`` runs both expert families (ONS on the exp-concave surrogate,
AOGD on the strongly convex one) under a single normalizer. ``mode="pae"``
is the same learner with the AOGD family switched off.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .domain import DomainSpec
from .exceptions import ConfigurationError, ContractViolationError, InvalidArgumentError
from .experts import AogdExpert, OnsExpert
from .losses import LossObservation, true_loss_eval
from .schedule import IntervalKey, intervals_starting_at, learning_rate_grid

GRADIENT_BOUND_RTOL = 1e-6

TRAJECTORY_FIELDS = ("round", "decision", "loss", "n_active_ons", "n_active_aogd", "potential")


@dataclass
class RoundRecord:
    round: int
    decision: np.ndarray
    loss: float
    gradient: np.ndarray
    n_active_ons: int
    n_active_aogd: int
    potential: float


@dataclass
class AuditEntry:
    """Potential bookkeeping for one round.

    ``potential_before`` and ``potential_after`` sum ``exp(-L)`` over the experts
    awake this round, before and after charging this round's surrogate losses.
    ``cumulative`` adds the final ``exp(-L)`` of every expert retired in
    earlier rounds to ``potential_after``; ``created`` counts experts born so far.
    """

    round: int
    potential_before: float
    potential_after: float
    cumulative: float
    created: int


@dataclass
class Retirement:
    round: int
    family: str
    interval: IntervalKey
    eta: float
    cumulative_loss: float


class UniversalLearner:
    """Adaptive learner over geometric covering intervals.

    Parameters
    ----------
    domain : DomainSpec
        Feasible set; its ``gradient_bound`` is enforced every round.
    mode : {"uma", "pae"}
        ``"uma"`` pools ONS and AOGD experts, ``"pae"`` keeps only ONS experts.
    audit : bool
        Keep per-round potential records and a log of retired experts.
    projection_tol : float
        Tolerance handed to the ONS generalized projections.
    """

    def __init__(self, domain: DomainSpec, mode="uma", audit=False, projection_tol=1e-8):
        if mode not in ("uma", "pae"):
            raise InvalidArgumentError(f"mode must be 'uma' or 'pae', got {mode!r}")
        self.domain = domain
        self.mode = mode
        self.audit = audit
        self.projection_tol = projection_tol
        self.t = 0
        self.active_ons: list[OnsExpert] = []
        self.active_aogd: list[AogdExpert] = []
        self.created = 0
        self.retired_potential = 0.0
        self.audit_log: list[AuditEntry] = []
        self.retirements: list[Retirement] = []
        self._round_open = False
        self._decision = None

    @property
    def name(self):
        return self.mode

    def experts(self):
        """Awake experts in the fixed aggregation order."""
        return self.active_ons + self.active_aogd

    def begin_round(self):
        """Open round ``t + 1`` and create its newborn experts."""
        if self._round_open:
            raise ContractViolationError(f"round {self.t + 1} is already open")
        t = self.t + 1
        D, G = self.domain.diameter, self.domain.gradient_bound
        for interval in intervals_starting_at(t):
            for eta in learning_rate_grid(interval.length, D, G):
                self.active_ons.append(
                    OnsExpert(interval, eta, self.domain, projection_tol=self.projection_tol)
                )
                self.created += 1
                if self.mode == "uma":
                    self.active_aogd.append(AogdExpert(interval, eta, self.domain))
                    self.created += 1
        self._round_open = True
        self._decision = None
        return self

    def log_weights(self) -> np.ndarray:
        """``-L + log(eta)`` for every awake expert, shifted so the maximum is 0."""
        experts = self.experts()
        logw = np.array([math.log(e.eta) - e.cumulative_loss for e in experts])
        return logw - logw.max()

    def predict(self) -> np.ndarray:
        if not self._round_open:
            self.begin_round()
        experts = self.experts()
        weights = np.exp(self.log_weights())
        points = np.array([e.w for e in experts])
        self._decision = (weights @ points) / weights.sum()
        return self._decision.copy()

    def observe(self, loss) -> RoundRecord:
        """Reveal the round's loss, update every awake expert, retire finished ones."""
        if self._decision is None:
            raise ContractViolationError("observe() called before predict() in this round")
        t = self.t + 1
        w = self._decision
        value, g = true_loss_eval(loss, w)
        g_norm = float(np.linalg.norm(g))
        G = self.domain.gradient_bound
        if g_norm > G * (1.0 + GRADIENT_BOUND_RTOL):
            raise ConfigurationError(
                f"round {t}: gradient norm {g_norm:.6g} exceeds the configured bound G={G:.6g}"
            )
        obs = LossObservation.make(t, w, g)
        experts = self.experts()
        before = sum(math.exp(-e.cumulative_loss) for e in experts)
        for e in experts:
            e.step(obs)
        after = sum(math.exp(-e.cumulative_loss) for e in experts)
        if self.audit:
            self.audit_log.append(
                AuditEntry(t, before, after, after + self.retired_potential, self.created)
            )
        n_ons, n_aogd = len(self.active_ons), len(self.active_aogd)
        self._retire(t)
        self.t = t
        self._round_open = False
        self._decision = None
        return RoundRecord(t, w, value, g, n_ons, n_aogd, after)

    def _retire(self, t):
        for group in (self.active_ons, self.active_aogd):
            keep = []
            for e in group:
                if e.interval.s == t:
                    self.retired_potential += math.exp(-e.cumulative_loss)
                    if self.audit:
                        self.retirements.append(
                            Retirement(t, e.family, e.interval, e.eta, e.cumulative_loss)
                        )
                else:
                    keep.append(e)
            group[:] = keep


def make_learner(name, domain, audit=False):
    """Build a learner by name: ``uma``, ``pae``, ``ogd`` or ``ogd_sc``."""
    if name in ("uma", "pae"):
        return UniversalLearner(domain, mode=name, audit=audit)
    from .evaluation import OgdBaseline

    if name == "ogd":
        return OgdBaseline(domain, rule="general")
    if name == "ogd_sc":
        raise InvalidArgumentError("ogd_sc needs a strong-convexity modulus; use OgdBaseline directly")
    raise InvalidArgumentError(f"unknown learner {name!r}")


@dataclass
class Trajectory:
    """Per-round output of a learner run."""

    learner: str
    decisions: np.ndarray
    losses: np.ndarray
    gradients: np.ndarray
    n_active_ons: np.ndarray
    n_active_aogd: np.ndarray
    potential: np.ndarray
    audit_log: list = field(default_factory=list)
    retirements: list = field(default_factory=list)

    def __len__(self):
        return len(self.losses)

    @property
    def dimension(self):
        return self.decisions.shape[1]

    def csv_header(self):
        cols = ["round"] + [f"w{j}" for j in range(self.dimension)]
        return cols + ["loss", "n_active_ons", "n_active_aogd", "potential"]

    def csv_rows(self):
        for t in range(len(self)):
            yield (
                [str(t + 1)]
                + [repr(float(v)) for v in self.decisions[t]]
                + [
                    repr(float(self.losses[t])),
                    str(int(self.n_active_ons[t])),
                    str(int(self.n_active_aogd[t])),
                    repr(float(self.potential[t])),
                ]
            )

    def to_csv(self, with_learner=False) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = self.csv_header()
        writer.writerow((["learner"] if with_learner else []) + header)
        for row in self.csv_rows():
            writer.writerow(([self.learner] if with_learner else []) + row)
        return buf.getvalue()


def run(learner, losses, dimension=None) -> Trajectory:
    """Drive ``learner`` through the loss sequence and collect its trajectory."""
    records = []
    for loss in losses:
        learner.begin_round()
        learner.predict()
        records.append(learner.observe(loss))
    d = dimension if dimension is not None else learner.domain.dimension
    T = len(records)
    return Trajectory(
        learner=learner.name,
        decisions=np.array([r.decision for r in records]).reshape(T, d),
        losses=np.array([r.loss for r in records], dtype=float),
        gradients=np.array([r.gradient for r in records]).reshape(T, d),
        n_active_ons=np.array([r.n_active_ons for r in records], dtype=int),
        n_active_aogd=np.array([r.n_active_aogd for r in records], dtype=int),
        potential=np.array([r.potential for r in records], dtype=float),
        audit_log=list(getattr(learner, "audit_log", [])),
        retirements=list(getattr(learner, "retirements", [])),
    )


def read_trajectory_csv(text: str) -> dict[str, Trajectory]:
    """Parse trajectory CSV text (with or without a ``learner`` column)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    has_learner = header[0] == "learner"
    offset = 1 if has_learner else 0
    wcols = [j for j, name in enumerate(header) if name.startswith("w") and name[1:].isdigit()]
    rows_by: dict[str, list] = {}
    for row in reader:
        if not row:
            continue
        key = row[0] if has_learner else "learner"
        rows_by.setdefault(key, []).append(row)
    out = {}
    li = header.index("loss")
    for key, rows in rows_by.items():
        rows.sort(key=lambda r: int(r[offset]))
        decisions = np.array([[float(r[j]) for j in wcols] for r in rows])
        out[key] = Trajectory(
            learner=key,
            decisions=decisions,
            losses=np.array([float(r[li]) for r in rows]),
            gradients=np.full_like(decisions, np.nan),
            n_active_ons=np.array([int(r[li + 1]) for r in rows]),
            n_active_aogd=np.array([int(r[li + 2]) for r in rows]),
            potential=np.array([float(r[li + 3]) for r in rows]),
        )
    return out
