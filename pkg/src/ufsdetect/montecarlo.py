"""Deterministic Monte Carlo sweeps of detection and estimation performance.

Every trial draws from its own substream ``(master_seed, point, trial)``, so
a trial's outcome does not depend on scheduling. Aggregates use exactly
rounded sums over the trial-ordered record list, so a sweep returns the
same numbers for any worker count.
"""
from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .detection import DetectionOutcome, detect_attack
from .errors import InvalidParameterError, NumericalFailure
from .estimation import GridSearchConfig, estimate_cfo, estimate_channel, mse, wrap_cfo
from .rng import RngStream
from .signal_model import TrainingScenario, draw_cfo_plan, gen_channel, gen_qpsk_pilot, synthesize_received
from .srs import SrsConfig, random_sequence, srs_detect, srs_estimate_channel, srs_synthesize, srs_transmit

SCHEMES = ("ufs", "srs", "sync")
SWEEP_AXES = ("power_ratio_db", "snr_db", "phi_max", "pilot_length", "segments")

# Substream ids within one trial.
_H, _G, _PILOT, _PLAN_B, _PLAN_E, _NOISE, _SEQ = range(7)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo sweep.

    ``scenario`` is the template; each sweep value overrides one parameter of
    it. ``power_ratio_db`` is ``P_B/P_E`` in dB (Eve gets weaker as it grows)
    and ``snr_db`` is ``P_B/sigma^2`` in dB.
    """

    scenario: TrainingScenario
    scheme: str = "ufs"
    sweep_axis: str = "power_ratio_db"
    sweep_values: tuple = (0.0,)
    trials: int = 10_000
    master_seed: int = 0
    srs: SrsConfig = field(default_factory=SrsConfig)
    grid: GridSearchConfig = field(default_factory=GridSearchConfig)

    def __post_init__(self):
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        if self.scheme not in SCHEMES:
            raise InvalidParameterError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.sweep_axis not in SWEEP_AXES:
            raise InvalidParameterError(f"sweep_axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}")
        if not self.sweep_values:
            raise InvalidParameterError("sweep_values must not be empty")
        if int(self.trials) != self.trials or self.trials < 1:
            raise InvalidParameterError(f"trials must be a positive integer, got {self.trials}")
        for i in range(len(self.sweep_values)):
            self._check_point(self.scenario_at(i))

    def scenario_at(self, index: int) -> TrainingScenario:
        """Scenario of sweep point ``index``."""
        value = self.sweep_values[index]
        base = self.scenario
        try:
            if self.sweep_axis == "power_ratio_db":
                return base.replace(p_eve=base.p_bob / db_to_linear(value))
            if self.sweep_axis == "snr_db":
                return base.replace(noise_var=base.p_bob / db_to_linear(value))
            if self.sweep_axis == "phi_max":
                return base.replace(phi_max=float(value))
            if int(value) != value:
                raise InvalidParameterError(f"{self.sweep_axis} values must be integers, got {value}")
            if self.sweep_axis == "pilot_length":
                return base.replace(N=int(value))
            return base.replace(K=int(value))
        except InvalidParameterError as exc:
            raise InvalidParameterError(f"illegal {self.sweep_axis} value {value}: {exc}") from exc

    def _check_point(self, scn):
        snapshots = scn.N if self.scheme == "srs" else scn.Q
        if scn.M < 3:
            raise InvalidParameterError(f"MDL detection needs M >= 3, got M={scn.M}")
        if snapshots < scn.M:
            raise InvalidParameterError(
                f"{snapshots} snapshots per detection block is below M={scn.M} (N={scn.N}, K={scn.K})"
            )
        if self.scheme == "ufs" and scn.Q < 2:
            raise InvalidParameterError(f"CFO estimation needs Q >= 2, got Q={scn.Q}")


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one trial.

    Squared errors are NaN where they do not apply (e.g. CFO error for the
    schemes without artificial CFOs). ``sync_channel_se`` is the error of the
    estimate de-rotated with the true CFOs, on the same received data.
    """

    point: int
    trial: int
    attack: bool
    detected: bool = False
    dims: tuple = ()
    channel_se: float = math.nan
    sync_channel_se: float = math.nan
    cfo_se: float = math.nan
    cfo_se_unit_gain: float = math.nan
    failed: bool = False
    error: str = ""


@dataclass(frozen=True)
class PointResult:
    """Aggregates at one sweep value. Rates that do not apply are NaN."""

    value: float
    trials: int
    failures: int
    miss_rate: float
    miss_ci: tuple[float, float]
    false_alarm_rate: float
    fa_ci: tuple[float, float]
    segment_miss_rate: float
    segment_miss_ci: tuple[float, float]
    channel_mse: float
    sync_channel_mse: float
    cfo_mse: float
    cfo_mse_unit_gain: float

    @property
    def miss_half_width(self) -> float:
        return 0.5 * (self.miss_ci[1] - self.miss_ci[0])

    @property
    def fa_half_width(self) -> float:
        return 0.5 * (self.fa_ci[1] - self.fa_ci[0])


@dataclass(frozen=True)
class SweepResult:
    config: ExperimentConfig
    points: tuple[PointResult, ...]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(p, name) for p in self.points], dtype=float)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if int(trials) != trials or trials < 1:
        raise InvalidParameterError(f"trials must be a positive integer, got {trials}")
    if int(successes) != successes or not 0 <= successes <= trials:
        raise InvalidParameterError(f"successes must be an integer in [0, {trials}], got {successes}")
    if not 0 < confidence < 1:
        raise InvalidParameterError(f"confidence must lie in (0, 1), got {confidence}")
    z = float(norm.ppf(0.5 + confidence / 2))
    p = successes / trials
    z2n = z * z / trials
    center = (p + z2n / 2) / (1 + z2n)
    half = z / (1 + z2n) * math.sqrt(p * (1 - p) / trials + z2n / (4 * trials))
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


def _ufs_trial(cfg, scn, base, point, trial):
    M, N, K = scn.M, scn.N, scn.K
    h = gen_channel(M, base.child(_H))
    g = gen_channel(M, base.child(_G)) if scn.attack else None
    pilot = gen_qpsk_pilot(N, base.child(_PILOT))
    if cfg.scheme == "sync":
        plan_b = np.zeros(K)
        plan_e = np.zeros(K) if scn.attack else None
    else:
        plan_b = draw_cfo_plan(K, scn.phi_max, base.child(_PLAN_B))
        plan_e = draw_cfo_plan(K, scn.phi_max, base.child(_PLAN_E)) if scn.attack else None
    rx = synthesize_received(scn, pilot, plan_b, plan_e, h, g, base.child(_NOISE))
    outcome = detect_attack(rx)
    sync_se = mse(estimate_channel(rx, pilot, plan_b), h)
    if cfg.scheme == "sync":
        return _record(point, trial, scn, outcome, sync_se, sync_se)
    cfo = estimate_cfo(rx, pilot, cfg.grid)
    err2 = wrap_cfo(cfo.per_segment - plan_b) ** 2
    cfo_se = math.fsum(err2) / K
    h_gain = float(np.vdot(h, h).real) * scn.p_bob
    return _record(
        point, trial, scn, outcome,
        mse(estimate_channel(rx, pilot, cfo), h), sync_se, cfo_se, cfo_se * h_gain,
    )


def _srs_trial(cfg, scn, base, point, trial):
    h = gen_channel(scn.M, base.child(_H))
    g = gen_channel(scn.M, base.child(_G)) if scn.attack else None
    pilot = gen_qpsk_pilot(scn.N, base.child(_PILOT))
    x = srs_transmit(pilot, cfg.srs, scn.p_bob, base.child(_SEQ))
    Y = srs_synthesize(scn, pilot, x, h, g, base.child(_NOISE))
    outcome = srs_detect(Y)
    h_hat = srs_estimate_channel(Y, pilot, cfg.srs, scn.p_bob, scn.noise_var)
    c = random_sequence(scn.N, base.child(_SEQ))
    h_known = srs_estimate_channel(Y, pilot, cfg.srs, scn.p_bob, scn.noise_var, known_sequence=c)
    return _record(point, trial, scn, outcome, mse(h_hat, h), mse(h_known, h))


def _record(point, trial, scn, outcome: DetectionOutcome, channel_se, sync_se, cfo_se=math.nan, cfo_unit=math.nan):
    return TrialRecord(
        point=point,
        trial=trial,
        attack=scn.attack,
        detected=outcome.attack_detected,
        dims=tuple(int(d) for d in outcome.dims),
        channel_se=channel_se,
        sync_channel_se=sync_se,
        cfo_se=cfo_se,
        cfo_se_unit_gain=cfo_unit,
    )


def run_trial(cfg: ExperimentConfig, point_index: int, trial_index: int) -> TrialRecord:
    """Runs one independent trial at one sweep point.

    A :class:`NumericalFailure` is caught and returned as a failed record.
    """
    if not 0 <= point_index < len(cfg.sweep_values):
        raise InvalidParameterError(f"point index {point_index} out of range")
    if not 0 <= trial_index < cfg.trials:
        raise InvalidParameterError(f"trial index {trial_index} out of range")
    scn = cfg.scenario_at(point_index)
    base = RngStream(cfg.master_seed, (point_index, trial_index))
    try:
        if cfg.scheme == "srs":
            return _srs_trial(cfg, scn, base, point_index, trial_index)
        return _ufs_trial(cfg, scn, base, point_index, trial_index)
    except NumericalFailure as exc:
        return TrialRecord(point=point_index, trial=trial_index, attack=scn.attack, failed=True, error=str(exc))


def _run_chunk(args):
    cfg, point, start, stop = args
    return [run_trial(cfg, point, t) for t in range(start, stop)]


def _mean(values):
    values = [v for v in values]
    return math.fsum(values) / len(values) if values else math.nan


def _rate(count, total):
    if total == 0:
        return math.nan, (math.nan, math.nan)
    return count / total, wilson_interval(count, total)


def aggregate(value, records, configured_trials) -> PointResult:
    """Reduces the trial-ordered records of one sweep point."""
    ok = [r for r in records if not r.failed]
    failures = len(records) - len(ok)
    if len(records) != configured_trials:
        raise InvalidParameterError(f"expected {configured_trials} records, got {len(records)}")
    attacked = [r for r in ok if r.attack]
    clean = [r for r in ok if not r.attack]
    misses = sum(not r.detected for r in attacked)
    alarms = sum(r.detected for r in clean)
    seg_total = sum(len(r.dims) for r in attacked)
    seg_missed = sum(sum(d == 1 for d in r.dims) for r in attacked)
    miss, miss_ci = _rate(misses, len(attacked))
    fa, fa_ci = _rate(alarms, len(clean))
    seg, seg_ci = _rate(seg_missed, seg_total)
    return PointResult(
        value=float(value),
        trials=len(ok),
        failures=failures,
        miss_rate=miss,
        miss_ci=miss_ci,
        false_alarm_rate=fa,
        fa_ci=fa_ci,
        segment_miss_rate=seg,
        segment_miss_ci=seg_ci,
        channel_mse=_mean(r.channel_se for r in ok),
        sync_channel_mse=_mean(r.sync_channel_se for r in ok),
        cfo_mse=_mean(r.cfo_se for r in ok),
        cfo_mse_unit_gain=_mean(r.cfo_se_unit_gain for r in ok),
    )


def run_sweep(cfg: ExperimentConfig, parallelism: int = 1, chunk_size: int = 500) -> SweepResult:
    """Runs every trial of every sweep point and aggregates per point.

    Args:
        cfg: Validated experiment configuration.
        parallelism: Number of worker processes; 1 runs in-process.
        chunk_size: Trials per scheduled task.
    """
    if parallelism < 1:
        raise InvalidParameterError(f"parallelism must be >= 1, got {parallelism}")
    tasks = [
        (cfg, p, start, min(start + chunk_size, cfg.trials))
        for p in range(len(cfg.sweep_values))
        for start in range(0, cfg.trials, chunk_size)
    ]
    if parallelism == 1:
        chunks = [_run_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            chunks = list(pool.map(_run_chunk, tasks))
    by_point = [[] for _ in cfg.sweep_values]
    for chunk in chunks:
        for rec in chunk:
            by_point[rec.point].append(rec)
    points = []
    for p, value in enumerate(cfg.sweep_values):
        records = sorted(by_point[p], key=lambda r: r.trial)
        points.append(aggregate(value, records, cfg.trials))
    return SweepResult(cfg, tuple(points))


def with_overrides(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    """Copy of ``cfg`` with top-level fields replaced (re-validated)."""
    return dataclasses.replace(cfg, **changes)
