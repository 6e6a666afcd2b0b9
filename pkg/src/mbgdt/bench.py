"""Trial evaluation: clean-test MSE, baseline-vs-trimmed pairs, and sweeps.

A trial generates training data (optionally contaminated or non-uniform),
clean test data, fits the plain and trimmed models on identical batch
streams, and scores every fitted model on the test set.  Everything is a
pure function of (scenario, seed); repeated runs and sweeps only vary the
per-trial seed, derived as master_seed + trial index.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .core import ConfigError, Dataset, LossKind, MbgdtError, ModelConfig, ScaleParams, feature_matrix
from .datagen import ContaminationSpec, Family, NonUniformSpec, TrueCurve, contaminate, gen_nonuniform, gen_test, gen_true
from .optimizer import fit
from .preprocess import DbscanConfig, KernelConfig, dbscan_trim, default_kernel_config, kernel_preprocess

# Arms a trial can produce, in reporting order.
ARM_NAIVE = "naive"
ARM_TRIMMED = "trimmed"
ARM_KERNEL = "trimmed_kernel"
ARM_DBSCAN = "trimmed_dbscan"


class SweepParam(str, Enum):
    EPSILON = "epsilon"
    DISTANCE_X = "distance-x"
    DISTANCE_Y = "distance-y"


@dataclass(frozen=True)
class Scenario:
    """Everything a trial needs: data recipe, model, optional preprocessors.

    ``kernel_auto`` derives kernel widths from each trial's training data
    (tenth-of-range windows); an explicit ``kernel`` config overrides it.
    """

    curve: TrueCurve
    n_train: int = 200
    n_test: int = 500
    model: ModelConfig = ModelConfig()
    contamination: ContaminationSpec | None = None
    nonuniform: NonUniformSpec | None = None
    kernel: KernelConfig | None = None
    kernel_auto: bool = False
    dbscan: DbscanConfig | None = None

    def validate(self) -> None:
        self.curve.validate()
        self.model.validate()
        if self.n_train < 1 or self.n_test < 1:
            raise ConfigError("n_train and n_test must be positive")
        if self.contamination is not None and self.nonuniform is not None:
            raise ConfigError("a scenario takes contamination or non-uniform sampling, not both")
        if self.contamination is not None:
            self.contamination.validate()
        if self.nonuniform is not None:
            self.nonuniform.validate(self.curve)
        if self.kernel is not None:
            self.kernel.validate()
        if self.dbscan is not None:
            self.dbscan.validate()

    @property
    def arms(self) -> tuple[str, ...]:
        arms = [ARM_NAIVE, ARM_TRIMMED]
        if self.kernel is not None or self.kernel_auto:
            arms.append(ARM_KERNEL)
        if self.dbscan is not None:
            arms.append(ARM_DBSCAN)
        return tuple(arms)


@dataclass
class TrialResult:
    seed: int
    mse_naive: float | None = None
    mse_trimmed: float | None = None
    mse_trimmed_kernel: float | None = None
    mse_trimmed_dbscan: float | None = None
    converged_naive: bool = False
    converged_trimmed: bool = False
    errors: dict = None

    def __post_init__(self):
        if self.errors is None:
            self.errors = {}

    def mse_of(self, arm: str) -> float | None:
        return getattr(self, f"mse_{arm}")


@dataclass(frozen=True)
class ArmStats:
    mean: float
    std: float
    min: float
    max: float
    count: int


@dataclass
class RepeatedResult:
    stats: dict
    trials: int
    error_count: int
    results: list


@dataclass(frozen=True)
class SweepRow:
    param_value: float
    mse_naive_mean: float
    mse_naive_std: float
    mse_trimmed_mean: float
    mse_trimmed_std: float
    trials: int
    errors: int


@dataclass
class SweepTable:
    param: SweepParam
    rows: list


def mse(w: np.ndarray, scale: ScaleParams, test: Dataset) -> float:
    """Mean squared prediction error on the test set (plain square, no 1/2)."""
    if len(test) == 0:
        raise ValueError("mse requires a non-empty test set")
    test.require_finite()
    w = np.asarray(w, dtype=np.float64)
    r = feature_matrix(scale.apply(test.x), w.shape[0] - 1) @ w - test.y
    return float(np.mean(r * r))


def _trial_seeds(seed: int) -> tuple:
    """Independent streams for train data, test data, and batching."""
    data_ss, test_ss, fit_ss = np.random.SeedSequence(seed).spawn(3)
    fit_seed = int(fit_ss.generate_state(1, np.uint64)[0])
    return np.random.default_rng(data_ss), np.random.default_rng(test_ss), fit_seed


def run_trial(scenario: Scenario, seed: int) -> TrialResult:
    """One seeded baseline-vs-trimmed comparison.

    Divergence (or a preprocessor shrinking the data below one batch) is
    recorded per arm in ``errors`` instead of aborting, so a trial set can
    aggregate partial results.
    """
    scenario.validate()
    data_rng, test_rng, fit_seed = _trial_seeds(seed)
    if scenario.nonuniform is not None:
        train = gen_nonuniform(scenario.n_train, scenario.curve, scenario.nonuniform, data_rng)
    else:
        train = gen_true(scenario.n_train, scenario.curve, data_rng)
        if scenario.contamination is not None:
            train = contaminate(train, scenario.contamination, scenario.curve, data_rng)
    test = gen_test(scenario.n_test, scenario.curve, test_rng)

    trimmed_cfg = replace(scenario.model, seed=fit_seed)
    naive_cfg = replace(trimmed_cfg, trim_fraction=0.0, loss_kind=LossKind.SQUARED)
    out = TrialResult(seed=seed)

    def run_arm(arm: str, data: Dataset, cfg: ModelConfig):
        try:
            res = fit(data, cfg)
            score = mse(res.weights, res.scale, test)
            if not math.isfinite(score):
                raise MbgdtError(f"non-finite test MSE {score}")
        except (MbgdtError, ValueError) as exc:
            out.errors[arm] = str(exc)
            return
        setattr(out, f"mse_{arm}", score)
        if arm == ARM_NAIVE:
            out.converged_naive = res.trace.converged
        elif arm == ARM_TRIMMED:
            out.converged_trimmed = res.trace.converged

    run_arm(ARM_NAIVE, train, naive_cfg)
    run_arm(ARM_TRIMMED, train, trimmed_cfg)
    if ARM_KERNEL in scenario.arms:
        kcfg = scenario.kernel if scenario.kernel is not None else default_kernel_config(train)
        run_arm(ARM_KERNEL, kernel_preprocess(train, kcfg), trimmed_cfg)
    if ARM_DBSCAN in scenario.arms:
        run_arm(ARM_DBSCAN, dbscan_trim(train, scenario.dbscan), trimmed_cfg)
    return out


def _sorted_mean_std(values) -> tuple[float, float]:
    """Order-independent mean and population std via sorted compensated sums."""
    ordered = sorted(values)
    k = len(ordered)
    mean = math.fsum(ordered) / k
    var = math.fsum((v - mean) ** 2 for v in ordered) / k
    return mean, math.sqrt(var)


def _trial_task(payload):
    scenario, seed = payload
    return run_trial(scenario, seed)


def run_repeated(scenario: Scenario, trials: int, master_seed: int,
                 n_jobs: int = 1) -> RepeatedResult:
    """Aggregate ``trials`` trials with seeds master_seed + 0 .. trials - 1.

    Trials with any failed arm are excluded from the aggregates and counted
    in ``error_count``; aggregation is permutation-invariant over trials.
    """
    if trials < 1:
        raise ConfigError("trials must be positive")
    seeds = [master_seed + i for i in range(trials)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_trial_task, [(scenario, s) for s in seeds], chunksize=4))
    else:
        results = [run_trial(scenario, s) for s in seeds]

    good = [r for r in results if not r.errors]
    if not good:
        raise MbgdtError(f"all {trials} trials failed; first error: {results[0].errors}")
    stats = {}
    for arm in scenario.arms:
        values = [r.mse_of(arm) for r in good]
        mean, std = _sorted_mean_std(values)
        stats[arm] = ArmStats(mean=mean, std=std, min=min(values), max=max(values), count=len(values))
    return RepeatedResult(stats=stats, trials=trials,
                          error_count=trials - len(good), results=results)


def _with_param(scenario: Scenario, param: SweepParam, value: float) -> Scenario:
    if scenario.contamination is None:
        raise ConfigError(f"sweep over {param.value} needs a contamination scenario")
    if param is SweepParam.EPSILON:
        # matched trimming: the trim fraction follows the contamination rate
        return replace(scenario,
                       contamination=replace(scenario.contamination, epsilon=value),
                       model=replace(scenario.model, trim_fraction=value))
    if param is SweepParam.DISTANCE_X:
        return replace(scenario, contamination=replace(scenario.contamination, offset_x_ratio=value))
    return replace(scenario, contamination=replace(scenario.contamination, offset_y_ratio=value))


def sweep(scenario: Scenario, param: SweepParam, grid, trials: int,
          master_seed: int, n_jobs: int = 1) -> SweepTable:
    """run_repeated once per grid value, everything else held fixed."""
    grid = [float(v) for v in grid]
    if not grid:
        raise ConfigError("sweep grid must be non-empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("sweep grid must be strictly ascending")
    rows = []
    for value in grid:
        rr = run_repeated(_with_param(scenario, param, value), trials, master_seed, n_jobs)
        rows.append(SweepRow(
            param_value=value,
            mse_naive_mean=rr.stats[ARM_NAIVE].mean,
            mse_naive_std=rr.stats[ARM_NAIVE].std,
            mse_trimmed_mean=rr.stats[ARM_TRIMMED].mean,
            mse_trimmed_std=rr.stats[ARM_TRIMMED].std,
            trials=trials - rr.error_count,
            errors=rr.error_count,
        ))
    return SweepTable(param=param, rows=rows)
