"""Significance and power sweeps over a grid of sample sizes.

Every trial draws its own random stream from ``(seed, n, trial)``, so a
sweep gives byte-identical output whether it runs serially or on a process
pool, and results are always reduced in trial order.

Configs are JSON objects with a ``schema_version`` field; see
:class:`ExperimentConfig` for the keys.
"""
import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import procedures
from .denoise import ProjectionConfig
from .errors import NumericError, ValidationError
from .model import (GofAlternate, check_probability_vector, gof_alternate_probability,
                    indep_alternate_probability, sample_multinomial, uniform_probability)
from .privacy import Mechanism, PrivacyParams, add_noise
from .stats import product_probability

SCHEMA_VERSION = 1
WORKERS_ENV = "DPCHISQ_WORKERS"
GOF_TESTS = ("gof_classical", "mc_gof", "priv_gof")
INDEP_TESTS = ("indep_classical", "mc_indep", "priv_indep")
TESTS = GOF_TESTS + INDEP_TESTS


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: a test, its parameters, the n grid and the trial count.

    Attributes
    ----------
    test : str
        One of ``gof_classical``, ``mc_gof``, ``priv_gof``,
        ``indep_classical``, ``mc_indep``, ``priv_indep``.
    n_grid : sequence of int
        Sample sizes to sweep.
    p0 : sequence of float, optional
        Goodness-of-fit null; uniform over ``d`` cells when omitted.
    pi1, pi2 : sequence of float
        Independence null marginals.
    delta_fixed, delta_tilde : float, optional
        Goodness-of-fit alternative step (fixed or ``delta_tilde / sqrt(n)``).
    covariance : float
        Independence alternative: covariance of the 2x2 table.
    noisy_input : bool
        Feed the classical tests noisy counts instead of the raw table.
    zero_noise : bool
        Force the noise scale to 0 (no privacy; collapse checks only).
    """

    test: str
    n_grid: Sequence[int]
    trials: int = 1000
    mechanism: str = "gauss"
    epsilon: float = 0.1
    delta: float = 1e-6
    alpha: float = 0.05
    d: int = 4
    p0: Optional[Sequence[float]] = None
    pi1: Sequence[float] = (0.5, 0.5)
    pi2: Sequence[float] = (0.5, 0.5)
    delta_fixed: Optional[float] = None
    delta_tilde: Optional[float] = None
    sign_pattern: Optional[Sequence[float]] = None
    covariance: float = 0.0
    literal_pattern: bool = False
    k: int = 100
    gamma: float = 0.01
    noisy_input: bool = False
    zero_noise: bool = False
    seed: int = 0
    label: Optional[str] = None
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ValidationError(f"unsupported schema_version {self.schema_version!r}")
        if self.test not in TESTS:
            raise ValidationError(f"unknown test {self.test!r}; choose from {', '.join(TESTS)}")
        grid = tuple(int(n) for n in np.atleast_1d(self.n_grid))
        if not grid or any(n < 1 for n in grid):
            raise ValidationError("n_grid must be a nonempty list of positive sizes")
        object.__setattr__(self, "n_grid", grid)
        if int(self.trials) < 1:
            raise ValidationError("trials must be at least 1")
        for name in ("p0", "pi1", "pi2", "sign_pattern"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(float(v) for v in value))
        # build once so bad parameters fail before any trial runs
        self.params()
        self.null_probability()
        if self.test in ("mc_gof", "mc_indep"):
            procedures.mc_threshold_rank(self.k, self.alpha)

    @property
    def name(self):
        return self.label or self.test

    @property
    def is_gof(self):
        return self.test in GOF_TESTS

    def params(self):
        mech = Mechanism.parse(self.mechanism)
        delta = self.delta if mech is Mechanism.GAUSSIAN else None
        return PrivacyParams(self.epsilon, delta, mech, scale_override=0.0 if self.zero_noise else None)

    def projection(self):
        return ProjectionConfig.for_mechanism(self.mechanism, gamma_laplace=self.gamma)

    def null_probability(self):
        if self.is_gof:
            p0 = uniform_probability(self.d) if self.p0 is None else check_probability_vector(self.p0)
            return p0
        return product_probability(self.pi1, self.pi2)

    def alternate_probability(self, n):
        if self.is_gof:
            if self.delta_fixed is None and self.delta_tilde is None:
                raise ValidationError("power runs need delta_fixed or delta_tilde")
            alt = GofAlternate(self.delta_tilde, self.delta_fixed, self.sign_pattern)
            return gof_alternate_probability(self.null_probability(), alt, n)
        pi1, pi2 = np.asarray(self.pi1), np.asarray(self.pi2)
        if pi1.shape != (2,) or pi2.shape != (2,) or np.any(pi1 != 0.5) or np.any(pi2 != 0.5):
            raise ValidationError("independence power runs use a 2x2 table with uniform marginals")
        return indep_alternate_probability(self.covariance, self.literal_pattern)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def load_config(path, **overrides):
    """Read a JSON config; keyword overrides (e.g. from CLI flags) win."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path!r} is not valid JSON: {exc}") from exc
    return config_from_dict(raw, **overrides)


def config_from_dict(raw, **overrides):
    if not isinstance(raw, dict):
        raise ValidationError("config must be a JSON object")
    if "schema_version" not in raw:
        raise ValidationError("config is missing schema_version")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(sorted(unknown))}")
    merged = dict(raw)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**merged)
    except TypeError as exc:
        raise ValidationError(str(exc)) from exc


def trial_rng(seed, n, trial):
    """Independent stream for one trial, keyed by ``(seed, n, trial)``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(n), int(trial))))


@dataclass(frozen=True)
class TrialResult:
    rejected: bool
    critical_value: Optional[float]
    failed: bool = False


def run_test(cfg, x, rng):
    """Apply the configured test to the count table ``x``."""
    params = cfg.params()
    test = cfg.test
    if test == "gof_classical":
        data = add_noise(x, params, rng) if cfg.noisy_input else x
        return procedures.gof_classical(data, cfg.alpha, cfg.null_probability())
    if test == "mc_gof":
        return procedures.mc_gof(x, params, cfg.alpha, cfg.null_probability(), cfg.k, rng)
    if test == "priv_gof":
        return procedures.priv_gof(x, params, cfg.alpha, cfg.null_probability(), rng)
    if test == "indep_classical":
        data = add_noise(x, params, rng) if cfg.noisy_input else x
        return procedures.indep_classical(data, cfg.alpha)
    if test == "mc_indep":
        return procedures.mc_indep(x, params, cfg.alpha, cfg.k, rng, cfg.projection())
    return procedures.priv_indep(x, params, cfg.alpha, rng, cfg.projection())


def _run_trial(job):
    cfg, n, trial, under_null, skip_failures = job
    rng = trial_rng(cfg.seed, n, trial)
    p = cfg.null_probability() if under_null else cfg.alternate_probability(n)
    x = sample_multinomial(n, p, rng)
    try:
        outcome = run_test(cfg, x, rng)
    except NumericError:
        if not skip_failures:
            raise
        return TrialResult(False, None, failed=True)
    return TrialResult(outcome.rejected, outcome.critical_value)


@dataclass(frozen=True)
class ResultRow:
    n: int
    test: str
    rate: float
    se: float
    mean_critical_value: Optional[float]
    trials: int
    failures: int = 0


@dataclass
class ExperimentResult:
    """Per-``n`` rates of one sweep.

    ``kind`` is ``"significance"`` (rate = fraction failing to reject) or
    ``"power"`` (rate = fraction rejecting). ``se`` is the binomial standard
    error ``sqrt(rate (1 - rate) / trials)`` over completed trials.
    """

    kind: str
    rows: list = field(default_factory=list)
    with_failures: bool = False

    def to_csv(self):
        cols = ["n", "test", self.kind, "se", "mean_critical_value"]
        if self.with_failures:
            cols.append("failures")
        lines = [",".join(cols)]
        for r in self.rows:
            cv = "" if r.mean_critical_value is None else f"{r.mean_critical_value:.10g}"
            rate = "" if math.isnan(r.rate) else f"{r.rate:.6f}"
            se = "" if math.isnan(r.se) else f"{r.se:.6f}"
            fields = [str(r.n), r.test, rate, se, cv]
            if self.with_failures:
                fields.append(str(r.failures))
            lines.append(",".join(fields))
        return "\n".join(lines) + "\n"


def default_workers():
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        workers = int(raw)
    except ValueError as exc:
        raise ValidationError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc
    return max(1, workers)


def _collect(cfg, under_null, workers, skip_failures):
    workers = default_workers() if workers is None else max(1, int(workers))
    jobs = [(cfg, n, t, under_null, skip_failures) for n in cfg.n_grid for t in range(cfg.trials)]
    if workers == 1:
        results = [_run_trial(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    return [results[i * cfg.trials:(i + 1) * cfg.trials] for i in range(len(cfg.n_grid))]


def _summarize(cfg, kind, per_n):
    rows = []
    for n, results in zip(cfg.n_grid, per_n):
        done = [r for r in results if not r.failed]
        failures = len(results) - len(done)
        if done:
            reject = sum(r.rejected for r in done) / len(done)
            rate = 1.0 - reject if kind == "significance" else reject
            se = math.sqrt(rate * (1.0 - rate) / len(done))
        else:
            rate = se = math.nan
        cvs = [r.critical_value for r in done if r.critical_value is not None]
        mean_cv = float(np.mean(cvs)) if cvs else None
        rows.append(ResultRow(n, cfg.name, rate, se, mean_cv, len(done), failures))
    return rows


def run_significance(cfg, workers=None, skip_failures=False):
    """Fraction of trials under the null that fail to reject, per ``n``.

    Numeric failures abort the sweep unless ``skip_failures`` is set, in
    which case they are counted in a ``failures`` column.
    """
    per_n = _collect(cfg, True, workers, skip_failures)
    return ExperimentResult("significance", _summarize(cfg, "significance", per_n), skip_failures)


def run_power(cfg, workers=None, skip_failures=False):
    """Fraction of trials under the alternative that reject, per ``n``."""
    for n in cfg.n_grid:
        cfg.alternate_probability(n)
    per_n = _collect(cfg, False, workers, skip_failures)
    return ExperimentResult("power", _summarize(cfg, "power", per_n), skip_failures)
