"""Simulated active-learning campaigns over the synthetic testbeds.

One campaign runs R independent trials.  Each trial draws shared
initial training data and a shared candidate pool per iteration; every
acquisition mode then walks the identical data stream: fit surrogates,
score the pool, select a batch, query the testbed, extend its own
training set.  All randomness descends from the master seed through a
fixed spawn-key tree, so a campaign is an exact function of its config.

Modes: ``random`` (uniform batch), ``qnehvi`` (per-objective
zero-inflated sampling, no cross-objective gating), ``qnehvi-dag``
(samples additionally gated by the objective ordering).

The exported CSVs contain no timing data so replays are byte-identical;
wall-clock timings live in the JSON manifest instead.
"""

import csv
import json
import logging
import os
import platform
import subprocess
import time
from dataclasses import dataclass, field

import numpy as np

from .acquisition import prepare_context, select_batch, select_random
from .dag import PropertyDag, build_dag
from .gp import ConvergenceError, IllConditionedKernelError
from .testbeds import Observation, Testbed, get_testbed
from .zero_inflated import (
    ObservationSet,
    SurrogateConfig,
    ZeroInflatedSurrogate,
    fit_surrogates,
    zero_inflated_density,
)

__all__ = [
    "MODES",
    "ConfigError",
    "CampaignConfig",
    "IterationRecord",
    "CampaignRecord",
    "run_campaign",
    "joint_positive_count",
    "log_posterior_density",
    "export_results",
    "summarize_results",
]

logger = logging.getLogger("orderedbo.harness")

MODES = ("random", "qnehvi", "qnehvi-dag")

# spawn-key tags of the seed tree: master -> (tag, trial[, iteration])
_TAG_INIT = 0
_TAG_POOL = 1
_TAG_OBS = 2
_TAG_MC = 3
_TAG_RANDOM = 4
_TAG_FALLBACK = 5

_FIT_FAILURES = (ConvergenceError, IllConditionedKernelError,
                 np.linalg.LinAlgError)


class ConfigError(ValueError):
    """Invalid campaign configuration; raised before any work starts."""


@dataclass
class CampaignConfig:
    """Campaign parameters; JSON config keys match these field names."""

    testbed: str
    iterations: int = 10
    init_size: int = 8
    pool_size: int = 80
    batch_size: int = 4
    mc_samples: int = 512
    trials: int = 5
    modes: tuple[str, ...] = MODES
    master_seed: int = 20260814
    dag_edges: tuple[tuple[int, int], ...] | None = None
    thresholds: tuple[float, ...] | None = None
    r_ref: tuple[float, ...] | None = None
    output_dir: str = "campaign_out"

    def __post_init__(self):
        self.modes = tuple(self.modes)
        if self.dag_edges is not None:
            self.dag_edges = tuple(
                (int(a), int(b)) for a, b in self.dag_edges)
        if self.thresholds is not None:
            self.thresholds = tuple(float(v) for v in self.thresholds)
        if self.r_ref is not None:
            self.r_ref = tuple(float(v) for v in self.r_ref)
        self.validate()

    def validate(self) -> None:
        if self.iterations < 0:
            raise ConfigError("iterations must be >= 0")
        for name in ("init_size", "pool_size", "batch_size", "mc_samples",
                     "trials"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.batch_size > self.pool_size:
            raise ConfigError("batch_size must not exceed pool_size")
        if not self.modes:
            raise ConfigError("modes must be nonempty")
        unknown = [m for m in self.modes if m not in MODES]
        if unknown:
            raise ConfigError(
                f"unknown modes {unknown}; available: {', '.join(MODES)}")

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignConfig":
        if "testbed" not in data:
            raise ConfigError("config requires a 'testbed' key")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(
                f"unknown config keys {sorted(unknown)}; "
                f"known keys: {sorted(known)}")
        return cls(**data)


@dataclass
class IterationRecord:
    """One (mode, trial, iteration) step of a campaign."""

    mode: str
    trial: int
    iteration: int
    selected_indices: list[int]
    observations: list[Observation]
    cum_joint_positives: int
    iteration_seed: int
    baseline_hv_mean: float
    baseline_hv_std: float
    fit_failed: bool
    wall_time_s: float


@dataclass
class CampaignRecord:
    """Everything a campaign produced; append-only during the run."""

    config: CampaignConfig
    testbed_name: str
    dag_edges: tuple[tuple[int, int], ...]
    thresholds: tuple[float, ...]
    init_inputs: dict = field(default_factory=dict)       # trial -> (N0, D)
    init_observations: dict = field(default_factory=dict)  # trial -> list
    iterations: list = field(default_factory=list)

    def rows(self, mode: str | None = None):
        return [r for r in self.iterations
                if mode is None or r.mode == mode]


def _seed_seq(master: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(master),
                                  spawn_key=tuple(int(k) for k in key))


def _seed_ints(master: int, n: int, *key: int) -> list[int]:
    return [int(v) for v in _seed_seq(master, *key).generate_state(n)]


def observations_to_set(observations, lo, hi) -> ObservationSet:
    """Stack observations into a fit-ready set on the unit cube.

    Unmeasured coordinates become explicit missing markers so fits can
    never mistake a gated value for a real zero.
    """
    X = np.stack([o.x for o in observations])
    values = np.stack([o.values for o in observations]).astype(float)
    measured = np.stack([o.measured for o in observations])
    values = np.where(measured, values, np.nan)
    X_unit = (X - lo) / (hi - lo)
    return ObservationSet(X=X_unit, values=values, measured=measured)


def joint_positive_count(observations, thresholds, dag: PropertyDag) -> int:
    """Count observations passing every threshold along the ordering.

    Callers pass noiseless ground-truth observations; flags must be
    downward closed (a measured objective implies measured ancestors).
    """
    thresholds = np.asarray(thresholds, dtype=float)
    count = 0
    for obs in observations:
        if obs.n_objectives != dag.n_objectives:
            raise ValueError("observation and dag objective counts differ")
        for k in range(dag.n_objectives):
            if obs.measured[k] and not all(
                    obs.measured[a] for a in dag.predecessors[k]):
                raise ValueError(
                    "measured flags are not downward closed along the dag")
        ok = all(obs.measured[k] and obs.values[k] >= thresholds[k]
                 for k in range(dag.n_objectives))
        count += int(ok)
    return count


def log_posterior_density(surrogate: ZeroInflatedSurrogate,
                          test_set: ObservationSet, k: int,
                          floor: float = -50.0) -> float:
    """Mean log mixture density of measured objective-k values.

    Zero-density events (for example a measured 0 under a classifier
    certain of a positive) are clamped at ``floor`` and logged.
    """
    mask = test_set.measured[:, k]
    if not np.any(mask):
        raise ValueError(f"test set has no measured values for objective {k}")
    X = test_set.X[mask]
    values = test_set.values[mask, k]
    total = 0.0
    clamped = 0
    for x, c in zip(X, values):
        density = zero_inflated_density(surrogate, x, k, float(c))
        if density <= np.exp(floor):
            total += floor
            clamped += 1
        else:
            total += float(np.log(density))
    if clamped:
        logger.warning(
            "log_posterior_density clamped %d of %d contributions at "
            "floor %.1f", clamped, int(mask.sum()), floor)
    return total / int(mask.sum())


def _resolve(config: CampaignConfig):
    testbed = get_testbed(config.testbed)
    edges = config.dag_edges if config.dag_edges is not None \
        else testbed.dag_edges
    dag = build_dag(testbed.n_objectives, edges)
    thresholds = np.asarray(
        config.thresholds if config.thresholds is not None
        else testbed.thresholds, dtype=float)
    if thresholds.shape != (testbed.n_objectives,):
        raise ConfigError(
            f"thresholds must have {testbed.n_objectives} entries")
    r_ref = np.asarray(
        config.r_ref if config.r_ref is not None
        else np.zeros(testbed.n_objectives), dtype=float)
    if r_ref.shape != (testbed.n_objectives,):
        raise ConfigError(f"r_ref must have {testbed.n_objectives} entries")
    gated_testbed = Testbed(
        name=testbed.name, n_dims=testbed.n_dims,
        bounds_lo=testbed.bounds_lo, bounds_hi=testbed.bounds_hi,
        kinds=testbed.kinds, dag_edges=edges, thresholds=thresholds,
        noise_scale=testbed.noise_scale, _task_batch=testbed._task_batch)
    return gated_testbed, dag, thresholds, r_ref


def _uniform_inputs(master: int, key: tuple, n: int, lo, hi) -> np.ndarray:
    rng = np.random.default_rng(_seed_seq(master, *key))
    return lo + (hi - lo) * rng.random((n, lo.shape[0]))


def run_campaign(config: CampaignConfig) -> CampaignRecord:
    """Run every (trial, iteration, mode) cell of the campaign."""
    testbed, dag, thresholds, r_ref = _resolve(config)
    ungated_dag = build_dag(testbed.n_objectives, [])
    surrogate_config = SurrogateConfig(kinds=testbed.kinds)
    lo, hi = testbed.bounds_lo, testbed.bounds_hi
    master = config.master_seed
    record = CampaignRecord(
        config=config, testbed_name=testbed.name,
        dag_edges=dag.edges, thresholds=tuple(float(v) for v in thresholds))

    for trial in range(config.trials):
        init_X = _uniform_inputs(master, (_TAG_INIT, trial),
                                 config.init_size, lo, hi)
        init_seeds = _seed_ints(master, config.init_size,
                                _TAG_OBS, trial, 0)
        init_obs = testbed.evaluate_batch(init_X, init_seeds)
        record.init_inputs[trial] = init_X
        record.init_observations[trial] = init_obs

        datasets = {mode: list(init_obs) for mode in config.modes}
        cum = {mode: 0 for mode in config.modes}

        for iteration in range(1, config.iterations + 1):
            pool_X = _uniform_inputs(master, (_TAG_POOL, trial, iteration),
                                     config.pool_size, lo, hi)
            pool_unit = (pool_X - lo) / (hi - lo)
            obs_seeds = _seed_ints(master, config.batch_size,
                                   _TAG_OBS, trial, iteration)
            mc_seed = _seed_seq(master, _TAG_MC, trial, iteration)
            iteration_seed = int(mc_seed.generate_state(1)[0])

            for mode in config.modes:
                start = time.perf_counter()
                fit_failed = False
                hv_mean = float("nan")
                hv_std = float("nan")
                if mode == "random":
                    seed = _seed_ints(master, 1,
                                      _TAG_RANDOM, trial, iteration)[0]
                    selected = select_random(pool_X, config.batch_size, seed)
                else:
                    mode_dag = dag if mode == "qnehvi-dag" else ungated_dag
                    train = observations_to_set(datasets[mode], lo, hi)
                    try:
                        surrogate = fit_surrogates(train, mode_dag,
                                                   surrogate_config)
                        ctx = prepare_context(
                            surrogate, mode_dag, train.X, r_ref,
                            config.mc_samples, mc_seed)
                        selected = select_batch(ctx, pool_unit,
                                                config.batch_size)
                        hv_mean = float(ctx.baseline_hypervolumes.mean())
                        hv_std = float(ctx.baseline_hypervolumes.std())
                    except _FIT_FAILURES as exc:
                        fit_failed = True
                        logger.warning(
                            "FIT FAILURE trial=%d iteration=%d mode=%s "
                            "(%s); falling back to random selection",
                            trial, iteration, mode, exc)
                        seed = _seed_ints(master, 1, _TAG_FALLBACK,
                                          trial, iteration)[0]
                        selected = select_random(pool_X, config.batch_size,
                                                 seed)

                chosen_X = pool_X[selected]
                observations = testbed.evaluate_batch(chosen_X, obs_seeds)
                truth = testbed.evaluate_noiseless_batch(chosen_X)
                cum[mode] += joint_positive_count(truth, thresholds, dag)
                datasets[mode].extend(observations)
                record.iterations.append(IterationRecord(
                    mode=mode, trial=trial, iteration=iteration,
                    selected_indices=list(selected),
                    observations=observations,
                    cum_joint_positives=cum[mode],
                    iteration_seed=iteration_seed,
                    baseline_hv_mean=hv_mean,
                    baseline_hv_std=hv_std,
                    fit_failed=fit_failed,
                    wall_time_s=time.perf_counter() - start))
    return record


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _git_hash() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"], capture_output=True, text=True,
            timeout=10, cwd=os.path.dirname(os.path.abspath(__file__)))
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def export_results(record: CampaignRecord, fmt: str = "csv") -> list:
    """Write the per-iteration CSV, JSON manifest and per-selection CSV.

    Returns the written paths.  CSV content is a pure function of the
    campaign's config and seed; timings go to the manifest only.
    """
    if fmt != "csv":
        raise ValueError(f"unsupported export format {fmt!r}")
    out_dir = record.config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    paths = []

    iter_path = os.path.join(out_dir, "iterations.csv")
    with open(iter_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["mode", "trial", "iteration", "cum_joint_positives", "seed"])
        for row in record.iterations:
            writer.writerow([row.mode, row.trial, row.iteration,
                             row.cum_joint_positives, row.iteration_seed])
    paths.append(iter_path)

    testbed = get_testbed(record.testbed_name)
    n_dims = testbed.n_dims
    n_obj = testbed.n_objectives
    sel_path = os.path.join(out_dir, "selections.csv")
    with open(sel_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["mode", "trial", "iteration", "slot", "pool_index"]
            + [f"x{d}" for d in range(n_dims)]
            + [f"value{k}" for k in range(n_obj)]
            + [f"measured{k}" for k in range(n_obj)]
            + ["noise_seed"])
        for row in record.iterations:
            for slot, (idx, obs) in enumerate(
                    zip(row.selected_indices, row.observations)):
                writer.writerow(
                    [row.mode, row.trial, row.iteration, slot, idx]
                    + [_fmt(v) for v in obs.x]
                    + [_fmt(v) for v in obs.values]
                    + [int(m) for m in obs.measured]
                    + [obs.noise_seed])
    paths.append(sel_path)

    manifest = {
        "config": {
            key: getattr(record.config, key)
            for key in record.config.__dataclass_fields__},
        "testbed": record.testbed_name,
        "dag_edges": [list(e) for e in record.dag_edges],
        "thresholds": list(record.thresholds),
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "platform": platform.platform(),
        },
        "git_hash": _git_hash(),
        "timings": [
            {"mode": r.mode, "trial": r.trial, "iteration": r.iteration,
             "wall_time_s": r.wall_time_s, "fit_failed": r.fit_failed,
             "baseline_hv_mean": r.baseline_hv_mean,
             "baseline_hv_std": r.baseline_hv_std}
            for r in record.iterations],
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(manifest_path)
    return paths


def summarize_results(in_dir: str, out_path: str) -> str:
    """Aggregate iterations.csv to mean/SD joint positives per mode."""
    iter_path = os.path.join(in_dir, "iterations.csv")
    by_cell: dict = {}
    with open(iter_path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["mode"], int(row["iteration"]))
            by_cell.setdefault(key, []).append(
                int(row["cum_joint_positives"]))
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["mode", "iteration", "mean_joint_positives",
                         "sd_joint_positives", "n_trials"])
        for mode, iteration in sorted(by_cell):
            vals = np.asarray(by_cell[(mode, iteration)], dtype=float)
            writer.writerow([mode, iteration, _fmt(vals.mean()),
                             _fmt(vals.std(ddof=1) if len(vals) > 1 else 0.0),
                             len(vals)])
    return out_path
