"""Run configured experiments and write their artifacts.

``run_experiment`` writes four files into the output directory:

``trajectory.csv``
    ``learner, round, w0..w{d-1}, loss, n_active_ons, n_active_aogd, potential``
``regret_report.csv``
    ``learner, kind, p, q, tau, regret, bound, regime``; ``kind`` is
    ``static`` (whole run), ``segment`` (one regime segment), ``sa`` (worst
    window of length ``tau``) or ``wa`` (worst interval overall).
``summary.txt``
    Human-readable results followed by the summary rows as CSV.
``manifest.json``
    Resolved configuration, the defaults that were filled in, scenario
    metadata and package versions.

Summary rows share one schema (``SUMMARY_FIELDS``) between ``run`` and
``sweep``, so a one-cell sweep reproduces the run's rows exactly.
"""

from __future__ import annotations

import copy
import csv
import io
import itertools
import json
import math
import os
import platform
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy

from . import __version__
from .config import ConfigError, ExperimentConfig
from .evaluation import (
    IntervalLosses,
    build_report,
    gc_intervals_within,
    random_intervals,
    report_csv,
    verify_bounds,
    WEAK_REGRET_MAX_T,
)
from .meta import make_learner, run
from .scenario import SegmentSpec, generate_scenario

SUMMARY_FIELDS = (
    "seed", "T", "tau", "lam", "alpha", "learner",
    "static_regret", "sa_regret", "wa_regret", "intervals_checked", "violations",
)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    scenario: object
    trajectories: list
    reports: list
    checked: list

    @property
    def violations(self):
        return sum(len(r.violations) for r in self.reports)

    def trajectory_csv(self) -> str:
        text = ""
        for k, traj in enumerate(self.trajectories):
            block = traj.to_csv(with_learner=True)
            text += block if k == 0 else block.split("\n", 1)[1]
        return text

    def summary_rows(self):
        sc = self.scenario
        lams = sorted({s.param("lam") for s in sc.spec.segments if s.family == "quadratic"})
        alphas = sorted({m["alpha"] for m in sc.segment_info if m["alpha"] is not None})
        lam = ";".join(repr(v) for v in lams)
        alpha = ";".join(repr(v) for v in alphas)
        rows = []
        for rep in self.reports:
            static = next((r.regret for r in rep.records if r.kind == "static"), math.nan)
            n_checked = len(self.checked) if self.config.verify.get(rep.learner) else 0
            wa = "" if rep.wa_regret is None else repr(rep.wa_regret)
            for tau in self.config.taus or [None]:
                sa = rep.sa_regret.get(tau) if tau is not None else None
                rows.append([
                    str(sc.spec.seed), str(sc.horizon), "" if tau is None else str(tau), lam, alpha,
                    rep.learner, repr(float(static)), "" if sa is None else repr(sa), wa,
                    str(n_checked), str(len(rep.violations)),
                ])
        return rows

    def summary_text(self) -> str:
        sc = self.scenario
        lines = [
            f"scenario seed {sc.spec.seed}, T = {sc.horizon}, d = {sc.domain.dimension}, "
            f"D = {sc.domain.diameter:.6g}, G = {sc.domain.gradient_bound:.6g}",
        ]
        for r in sc.regimes:
            lines.append(f"  rounds {r.start}..{r.end}: {r.label}")
        lines.append(f"intervals checked against bounds: {len(self.checked)}")
        for rep in self.reports:
            lines.append(rep.summary())
        lines.append(f"total bound violations: {self.violations}")
        lines.append("")
        lines.append("# summary rows")
        return "\n".join(lines) + "\n" + rows_csv(self.summary_rows())


def rows_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_FIELDS)
    writer.writerows(rows)
    return buf.getvalue()


def read_summary_rows(summary_text: str):
    """Summary rows embedded at the end of ``summary.txt``."""
    _, _, tail = summary_text.partition("# summary rows\n")
    rows = list(csv.reader(io.StringIO(tail)))
    return [r for r in rows[1:] if r]


def checked_intervals(config: ExperimentConfig, scenario):
    """GC intervals, regime segments and the configured random intervals."""
    T = scenario.horizon
    if T == 0:
        return []
    rng = np.random.default_rng([int(config.scenario.seed), 1])
    out = set(gc_intervals_within(T)) | {(r.start, r.end) for r in scenario.regimes}
    out |= set(random_intervals(T, config.random_intervals, rng))
    return sorted(out)


def execute(config: ExperimentConfig) -> ExperimentResult:
    """Generate the scenario, run every learner, measure and verify regret."""
    scenario = generate_scenario(config.scenario)
    losses = IntervalLosses(scenario.losses, scenario.domain)
    checked = checked_intervals(config, scenario)
    weak = config.weak == "true" or (config.weak == "auto" and scenario.horizon <= WEAK_REGRET_MAX_T)
    trajectories, reports = [], []
    for name in config.learners:
        traj = run(make_learner(name, scenario.domain), scenario.losses)
        rep = build_report(traj, losses, scenario.regimes, taus=config.taus, weak=weak)
        families = config.verify.get(name, ())
        if families and len(traj):
            rep.violations = verify_bounds(traj, losses, scenario.regimes, checked=checked, families=families)
        trajectories.append(traj)
        reports.append(rep)
    return ExperimentResult(config, scenario, trajectories, reports, checked)


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def manifest(result: ExperimentResult) -> dict:
    sc = result.scenario
    return {
        "config": result.config.values,
        "defaults_applied": result.config.defaults_applied,
        "scenario": {
            "seed": sc.spec.seed,
            "T": sc.horizon,
            "domain": sc.domain.to_dict(),
            "segments": sc.segment_info,
            "regimes": [
                {"start": r.start, "end": r.end, "kind": r.kind, "alpha": r.alpha, "lam": r.lam}
                for r in sc.regimes
            ],
        },
        "learners": result.config.learners,
        "intervals_checked": len(result.checked),
        "violations": result.violations,
        "files": ["trajectory.csv", "regret_report.csv", "summary.txt", "manifest.json"],
        "code_version": {
            "adaptive_oco": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }


def run_experiment(config: ExperimentConfig, out_dir) -> ExperimentResult:
    os.makedirs(out_dir, exist_ok=True)
    result = execute(config)
    _write_atomic(os.path.join(out_dir, "trajectory.csv"), result.trajectory_csv())
    _write_atomic(os.path.join(out_dir, "regret_report.csv"), report_csv(result.reports))
    _write_atomic(os.path.join(out_dir, "summary.txt"), result.summary_text())
    _write_atomic(
        os.path.join(out_dir, "manifest.json"), json.dumps(manifest(result), indent=2, sort_keys=True) + "\n"
    )
    return result


def _rescale_lengths(segments, T):
    total = sum(s.length for s in segments)
    if total == 0:
        raise ConfigError("cannot sweep T over a scenario with no rounds")
    bounds = [round(T * c / total) for c in itertools.accumulate(s.length for s in segments)]
    starts = [0] + bounds[:-1]
    return [SegmentSpec(b - a, s.family, dict(s.params)) for s, a, b in zip(segments, starts, bounds)]


def cell_config(base: ExperimentConfig, cell: dict) -> ExperimentConfig:
    """Apply one sweep cell (``seed``, ``T``, ``tau``, ``lam``, ``alpha``) to a config."""
    cfg = copy.deepcopy(base)
    spec = cfg.scenario
    if "seed" in cell:
        spec.seed = int(cell["seed"])
    if "T" in cell:
        spec.segments = _rescale_lengths(spec.segments, int(cell["T"]))
    if "tau" in cell:
        cfg.taus = [int(cell["tau"])]
    if "lam" in cell:
        quad = [s for s in spec.segments if s.family == "quadratic"]
        if not quad:
            raise ConfigError("[sweep] lam needs at least one quadratic segment")
        for s in quad:
            s.params["lam"] = float(cell["lam"])
    if "alpha" in cell:
        sq = [s for s in spec.segments if s.family == "squared_error"]
        if not sq:
            raise ConfigError("[sweep] alpha needs at least one squared_error segment")
        for s in sq:
            # alpha = 1 / (2 B^2) with B = 2 feature_scale max|w| + noise
            noise = math.sqrt(1.0 / (2.0 * float(cell["alpha"]))) - 2.0 * s.param("feature_scale") * spec.domain.max_norm
            if noise < 0:
                raise ConfigError(f"[sweep] alpha = {cell['alpha']} is unreachable with this feature_scale and domain")
            s.params["noise"] = noise
    return cfg


def sweep_cells(config: ExperimentConfig):
    keys = [k for k in ("seed", "T", "tau", "lam", "alpha") if k in config.sweep]
    return [dict(zip(keys, combo)) for combo in itertools.product(*(config.sweep[k] for k in keys))]


def _run_cell(args):
    config, cell = args
    return execute(cell_config(config, cell)).summary_rows()


def run_sweep(config: ExperimentConfig, out_dir, jobs=1) -> str:
    """Run every sweep cell and write ``sweep.csv``; returns its text."""
    cells = sweep_cells(config)
    cell_dir = os.path.join(out_dir, "cells")
    os.makedirs(cell_dir, exist_ok=True)
    work = [(config, c) for c in cells]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, work))
    else:
        results = [_run_cell(w) for w in work]
    all_rows = []
    for k, rows in enumerate(results):
        _write_atomic(os.path.join(cell_dir, f"cell_{k:04d}.csv"), rows_csv(rows))
        all_rows.extend(rows)
    text = rows_csv(all_rows)
    _write_atomic(os.path.join(out_dir, "sweep.csv"), text)
    return text
