"""Experiment configuration files.

Configs are INI files read with :mod:`configparser`::

    [domain]
    kind = ball            ; ball or box
    dimension = 2
    radius = 1.0           ; ball only, with optional center = 0, 0
    ; lower = 0, 0         ; box only
    ; upper = 1, 1
    gradient_bound = auto  ; or a number at least the scenario's worst case

    [scenario]
    seed = 0

    [segment.1]            ; segments run in numeric order
    length = 64
    family = linear        ; linear, quadratic or squared_error
    scale = 1.0

    [learners]
    names = uma, pae, ogd

    [evaluation]
    taus = 8, 16
    random_intervals = 50
    weak = auto            ; weakly adaptive regret, auto means T <= 512
    verify = auto          ; regime kinds whose bounds are checked per learner

    [sweep]                ; only read by the sweep subcommand
    seed = 0, 1, 2
    T = 64, 128
    tau = 8, 16
    lam = 0.5, 1
    alpha = 0.1

Every optional key that is absent is filled with its default and listed in
``ExperimentConfig.defaults_applied``, which ends up in the run manifest.
"""

from __future__ import annotations

import configparser
import copy
import re
from dataclasses import dataclass, field

import numpy as np

from .domain import DomainSpec
from .exceptions import ConfigurationError, InvalidArgumentError
from .scenario import FAMILY_PARAMS, ScenarioSpec, SegmentSpec

LEARNERS = ("uma", "pae", "ogd")

# Keys accepted in the sections that have a fixed layout.
FIXED_KEYS = {
    "domain": ("kind", "dimension", "radius", "center", "lower", "upper", "gradient_bound"),
    "scenario": ("seed",),
    "learners": ("names",),
    "evaluation": ("taus", "random_intervals", "weak", "verify"),
}

# Regime kinds whose bounds each learner is expected to satisfy.
DEFAULT_VERIFY = {
    "uma": ("general", "exp_concave", "strongly_convex"),
    "pae": ("exp_concave",),
    "ogd": (),
}

SWEEP_KEYS = ("seed", "T", "tau", "lam", "alpha")


class ConfigError(ConfigurationError):
    """Malformed or incomplete configuration; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass
class ExperimentConfig:
    scenario: ScenarioSpec
    learners: list
    taus: list
    random_intervals: int
    weak: str
    verify: dict
    sweep: dict
    values: dict = field(default_factory=dict)
    defaults_applied: list = field(default_factory=list)

    @property
    def horizon(self):
        return self.scenario.horizon

    def with_seed(self, seed):
        out = copy.deepcopy(self)
        out.scenario.seed = int(seed)
        out.values["scenario"]["seed"] = str(int(seed))
        return out


class _Reader:
    def __init__(self, parser, lines):
        self.parser = parser
        self.lines = lines
        self.values = {}
        self.defaults = []

    def _record(self, section, key, value):
        self.values.setdefault(section, {})[key] = value

    def line_of(self, section):
        return self.lines.get(section)

    def require(self, section, key):
        if not self.parser.has_section(section):
            raise ConfigError(f"missing required section [{section}] (needed for key '{key}')")
        if not self.parser.has_option(section, key):
            raise ConfigError(
                f"missing required key '{key}' in section [{section}]", self.line_of(section)
            )
        value = self.parser.get(section, key).strip()
        self._record(section, key, value)
        return value

    def optional(self, section, key, default):
        if self.parser.has_section(section) and self.parser.has_option(section, key):
            value = self.parser.get(section, key).strip()
        else:
            value = str(default)
            self.defaults.append(f"{section}.{key} = {value}")
        self._record(section, key, value)
        return value

    def convert(self, section, key, raw, kind):
        try:
            return kind(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(
                f"[{section}] {key} = {raw!r} is not a valid {kind.__name__}", self.line_of(section)
            ) from exc


def _floats(text):
    return [float(v) for v in re.split(r"[,\s]+", text.strip()) if v]


def _ints(text):
    out = []
    for v in re.split(r"[,\s]+", text.strip()):
        if v:
            x = float(v)
            if x != int(x):
                raise ValueError(v)
            out.append(int(x))
    return out


def _names(text):
    return [v for v in re.split(r"[,\s]+", text.strip()) if v]


def _section_lines(text):
    lines = {}
    for n, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            lines.setdefault(m.group(1).strip(), n)
    return lines


def parse_config(text: str) -> ExperimentConfig:
    """Parse config text; raises ``ConfigError`` naming the offending key."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " "), getattr(exc, "lineno", None)) from exc
    rd = _Reader(parser, _section_lines(text))
    for sec in parser.sections():
        if sec in FIXED_KEYS:
            extra = set(parser[sec]) - set(FIXED_KEYS[sec])
            if extra:
                raise ConfigError(f"[{sec}] unknown keys {sorted(extra)}", rd.line_of(sec))
        elif sec != "sweep" and not re.fullmatch(r"segment\.\d+", sec):
            raise ConfigError(f"unknown section [{sec}]", rd.line_of(sec))

    kind =rd.require("domain", "kind")
    d = rd.convert("domain", "dimension", rd.require("domain", "dimension"), int)
    if d < 1:
        raise ConfigError("[domain] dimension must be at least 1", rd.line_of("domain"))
    g_raw = rd.optional("domain", "gradient_bound", "auto")
    G = None if g_raw == "auto" else rd.convert("domain", "gradient_bound", g_raw, float)
    try:
        if kind == "ball":
            radius = rd.convert("domain", "radius", rd.require("domain", "radius"), float)
            center = rd.convert("domain", "center", rd.optional("domain", "center", ", ".join(["0"] * d)), _floats)
            domain = DomainSpec.ball(np.array(center), radius, G or 1.0)
        elif kind == "box":
            lower = rd.convert("domain", "lower", rd.require("domain", "lower"), _floats)
            upper = rd.convert("domain", "upper", rd.require("domain", "upper"), _floats)
            domain = DomainSpec.box(np.array(lower), np.array(upper), G or 1.0)
        else:
            raise ConfigError(f"[domain] kind must be 'ball' or 'box', got {kind!r}", rd.line_of("domain"))
        if domain.dimension != d:
            raise ConfigError(
                f"[domain] vectors have length {domain.dimension} but dimension = {d}", rd.line_of("domain")
            )
    except InvalidArgumentError as exc:
        raise ConfigError(f"[domain] {exc}", rd.line_of("domain")) from exc

    seed = rd.convert("scenario", "seed", rd.require("scenario", "seed"), int)

    seg_sections = sorted(
        (s for s in parser.sections() if re.fullmatch(r"segment\.\d+", s)), key=lambda s: int(s.split(".")[1])
    )
    if not seg_sections:
        raise ConfigError("missing required section [segment.1] (at least one segment)")
    segments = []
    for sec in seg_sections:
        length = rd.convert(sec, "length", rd.require(sec, "length"), int)
        family = rd.require(sec, "family")
        if family not in FAMILY_PARAMS:
            raise ConfigError(f"[{sec}] unknown family {family!r}", rd.line_of(sec))
        params = {}
        for key, default in FAMILY_PARAMS[family].items():
            raw = rd.require(sec, key) if default is None else rd.optional(sec, key, default)
            params[key] = rd.convert(sec, key, raw, float)
        extra = set(parser.options(sec)) - {"length", "family"} - set(params)
        if extra:
            raise ConfigError(f"[{sec}] unknown keys {sorted(extra)}", rd.line_of(sec))
        try:
            segments.append(SegmentSpec(length, family, params))
        except InvalidArgumentError as exc:
            raise ConfigError(f"[{sec}] {exc}", rd.line_of(sec)) from exc

    learners = _names(rd.optional("learners", "names", "uma, pae, ogd"))
    bad = [n for n in learners if n not in LEARNERS]
    if bad or not learners:
        raise ConfigError(f"[learners] names must be drawn from {LEARNERS}, got {learners}", rd.line_of("learners"))

    taus = rd.convert("evaluation", "taus", rd.optional("evaluation", "taus", ""), _ints)
    n_random = rd.convert("evaluation", "random_intervals", rd.optional("evaluation", "random_intervals", 0), int)
    weak = rd.optional("evaluation", "weak", "auto").lower()
    if weak not in ("auto", "true", "false"):
        raise ConfigError(f"[evaluation] weak must be auto, true or false, got {weak!r}", rd.line_of("evaluation"))
    verify_raw = rd.optional("evaluation", "verify", "auto")
    if verify_raw == "auto":
        verify = {n: DEFAULT_VERIFY[n] for n in learners}
    else:
        kinds = tuple(_names(verify_raw))
        unknown = set(kinds) - {"general", "exp_concave", "strongly_convex", "none"}
        if unknown:
            raise ConfigError(f"[evaluation] unknown regime kinds in verify: {sorted(unknown)}", rd.line_of("evaluation"))
        verify = {n: tuple(k for k in kinds if k != "none") for n in learners}

    sweep = {}
    if parser.has_section("sweep"):
        for key in parser.options("sweep"):
            if key not in SWEEP_KEYS:
                raise ConfigError(f"[sweep] unknown key '{key}'; allowed: {SWEEP_KEYS}", rd.line_of("sweep"))
            raw = parser.get("sweep", key)
            rd._record("sweep", key, raw.strip())
            conv = _ints if key in ("seed", "T", "tau") else _floats
            sweep[key] = rd.convert("sweep", key, raw, conv)

    spec = ScenarioSpec(seed, domain, segments, gradient_bound=G)
    return ExperimentConfig(spec, learners, taus, n_random, weak, verify, sweep, rd.values, rd.defaults)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text)
