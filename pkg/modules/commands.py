"""
Command implementations: fit, simulate and benchmark.

Orchestrates data loading, chain runs, scoring and output writing. Every
command writes its tables into run.out and finishes with manifest.json.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from modules import file_manager, run_manifest
from modules.errors import ConfigError
from modules.gibbs_gaussian import PosteriorDraws, run_chain
from modules.gibbs_logistic import run_chain_logistic
from modules.metrics import aggregate_metrics, prediction_error, score
from modules.model import Dataset, Family, Hyperparameters, SamplerConfig, standardize
from modules.run_config import RunConfig
from modules.samplers import RngStream
from modules.simgen import SimSpec, generate
from modules.summary import (acf_frame, back_transform, draws_frame, imputation_table,
                             intervals_table, select_variables, selection_table,
                             summary_table, trace_frame)
from modules.utils import ensure_directory, format_mean_sd, mean_sd

logger = logging.getLogger(__name__)

METRICS_COLUMNS = ['replication', 'setting', 'n', 'p', 'q', 'family', 'est_beta', 'est_theta',
                   'pred', 'accuracy', 'fdr', 'fpr', 'tp', 'fp', 'fn', 'tn', 'n_missing']


@dataclass
class CommandResult:
    """Files written by a command plus in-memory results for callers and tests."""

    outputs: List[str] = field(default_factory=list)
    manifest_path: Optional[str] = None
    draws: Optional[PosteriorDraws] = None
    metrics: Optional[pd.DataFrame] = None
    aggregate: Optional[pd.DataFrame] = None


def fit_model(data: Dataset, sampler: SamplerConfig, hyper: Optional[Hyperparameters] = None,
              rng: Optional[RngStream] = None) -> PosteriorDraws:
    """Run the chain matching the dataset family."""
    if data.family is Family.BINOMIAL:
        return run_chain_logistic(data, sampler, hyper, rng)
    return run_chain(data, sampler, hyper, rng)


def fit_original_scale(data: Dataset, sampler: SamplerConfig, hyper: Optional[Hyperparameters],
                       rng: RngStream, use_standardization: bool) -> PosteriorDraws:
    """Fit, optionally on standardized X, and return draws on the original X scale."""
    if not use_standardization:
        return fit_model(data, sampler, hyper, rng)
    scaled, std = standardize(data)
    return back_transform(fit_model(scaled, sampler, hyper, rng), std)


# ---------------------------------------------------------------------------
# simulation replications
# ---------------------------------------------------------------------------

def run_replication(spec: SimSpec, sampler: SamplerConfig, hyper: Hyperparameters,
                    stream: RngStream, replication: int, level: float,
                    include_interactions: bool = False) -> dict:
    """
    Generate, fit and score one replication.

    The stream is split into a data stream and a chain stream, so the
    generated data do not depend on the sampler settings.

    Returns:
        dict: One metrics.csv row
    """
    data_rng, chain_rng = stream.spawn(2)
    train, test, truth = generate(spec, data_rng)
    draws = fit_model(train, sampler, hyper, chain_rng)
    selected = select_variables(draws, level, include_interactions)
    report = score(draws, selected, truth, test, train.n_missing, include_interactions)
    return report.to_row(replication=replication, setting=spec.setting.value, n=spec.n,
                         p=spec.p, q=spec.q, family=spec.family.value)


def _replication_worker(args: tuple) -> dict:
    spec, sampler, hyper, stream, replication, level, include_interactions = args
    row = run_replication(spec, sampler, hyper, stream, replication, level, include_interactions)
    logger.info(f"Replication {replication} done: est_beta={row['est_beta']:.4f}, pred={row['pred']:.4f}")
    return row


def run_benchmark(spec: SimSpec, sampler: SamplerConfig, hyper: Hyperparameters,
                  n_replications: int, seed: int, level: float,
                  include_interactions: bool = False, workers: int = 1) -> pd.DataFrame:
    """
    Run independent replications on child streams of one seed.

    Replication r (1-based) always uses child stream r-1, whatever the worker
    count, and rows come back in replication order.

    Returns:
        pd.DataFrame: metrics.csv rows
    """
    streams = RngStream.from_seed(seed).spawn(n_replications)
    tasks = [(spec, sampler, hyper, streams[r], r + 1, level, include_interactions)
             for r in range(n_replications)]
    workers = max(1, min(workers, n_replications))
    logger.info(f"Benchmark: {n_replications} replication(s) of Setting {spec.setting.value}, "
                f"n={spec.n}, p={spec.p}, q={spec.q}, family={spec.family.value}, workers={workers}")

    if workers == 1:
        rows = [_replication_worker(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(_replication_worker, tasks))
    return pd.DataFrame(rows, columns=METRICS_COLUMNS)


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def run_holdout(data: Dataset, run: RunConfig, rng: RngStream) -> pd.DataFrame:
    """
    Repeated random train/test splits of the input rows.

    Only rows with an observed response can enter the test part.

    Raises:
        ConfigError: holdout size leaves no training or test rows
    """
    observed = np.flatnonzero(~data.missing_mask)
    m = run.holdout_size
    if m >= observed.size:
        raise ConfigError(f"holdout size {m} must be smaller than the {observed.size} observed rows")

    rows = []
    for r, stream in enumerate(rng.spawn(run.holdout_reps), start=1):
        split_rng, chain_rng = stream.spawn(2)
        test_rows = np.sort(split_rng.generator.choice(observed, size=m, replace=False))
        train_rows = np.setdiff1d(np.arange(data.n), test_rows)
        train, test = data.subset(train_rows), data.subset(test_rows)
        draws = fit_original_scale(train, run.sampler_config(), run.hyperparameters(), chain_rng,
                                   run.standardize)
        pred = prediction_error(draws, test)
        rows.append({'repeat': r, 'n_train': train.n, 'n_test': test.n, 'pred': pred})
        logger.info(f"Holdout repeat {r}/{run.holdout_reps}: pred={pred:.4f}")
    return pd.DataFrame(rows, columns=['repeat', 'n_train', 'n_test', 'pred'])


def cmd_fit(run: RunConfig) -> CommandResult:
    """
    Fit X.csv / Z.csv / y.csv and write the posterior summaries.

    Writes summary, intervals and selection tables; optionally draws,
    imputations, trace/acf and holdout tables.
    """
    started = time.perf_counter()
    family = Family(run.family)
    data = file_manager.load_dataset(run.x, run.z, run.y, family)
    if data.n_missing:
        logger.info(f"{data.n_missing} missing response(s) will be imputed inside the chain")

    base = RngStream.from_seed(run.seed)
    chain_rng, holdout_rng = base.spawn(2)
    draws = fit_original_scale(data, run.sampler_config(), run.hyperparameters(), chain_rng,
                               run.standardize)

    out = run.out
    ensure_directory(out)
    formats = run.formats
    outputs = []
    outputs += file_manager.write_table(
        summary_table(draws, run.level, run.include_interactions), out, 'summary', formats)
    outputs += file_manager.write_table(intervals_table(draws), out, 'intervals', formats)
    outputs += file_manager.write_table(
        selection_table(draws, data.predictor_names(), run.level), out, 'selection', formats)
    if run.store_draws:
        outputs += file_manager.write_table(draws_frame(draws).reset_index(), out, 'draws', formats)
    if run.store_imputations and draws.y_imputed is not None:
        outputs += file_manager.write_table(imputation_table(draws), out, 'imputations', formats)
    if run.trace:
        outputs += file_manager.write_table(trace_frame(draws, run.trace).reset_index(), out, 'trace', formats)
        outputs += file_manager.write_table(acf_frame(draws, run.trace, run.acf_max_lag).reset_index(),
                                            out, 'acf', formats)

    extra = {'fit': {'n': data.n, 'p': data.p, 'q': data.q, 'family': family.value,
                     'n_imputed': data.n_missing, 'n_stored': draws.n_stored,
                     'max_drift': draws.max_drift}}
    if run.holdout_reps:
        holdout = run_holdout(data, run, holdout_rng)
        mean, sd = mean_sd(holdout['pred'])
        logger.info(f"Holdout prediction error: {format_mean_sd(mean, sd)}")
        outputs += file_manager.write_table(holdout, out, 'holdout', formats)
        extra['holdout'] = {'repeats': run.holdout_reps, 'size': run.holdout_size,
                            'pred': format_mean_sd(mean, sd)}

    manifest = run_manifest.generate_manifest('fit', run.to_dict(), [run.x, run.z, run.y],
                                              outputs, out, extra)
    manifest_path = run_manifest.save_manifest(manifest, out)
    logger.info(f"fit finished in {time.perf_counter() - started:.1f}s, {len(outputs)} file(s) in {out}")
    return CommandResult(outputs=outputs, manifest_path=manifest_path, draws=draws)


# ---------------------------------------------------------------------------
# simulate / benchmark
# ---------------------------------------------------------------------------

def cmd_simulate(run: RunConfig) -> CommandResult:
    """
    Generate one dataset, fit it and score it against the truth.

    Writes X/Z/y (training), test_X/test_Z/test_y, truth and metrics tables.
    Uses the same stream as replication 1 of a benchmark with the same seed.
    """
    spec = run.sim_spec()
    stream = RngStream.from_seed(run.seed).spawn(1)[0]
    data_rng, chain_rng = stream.spawn(2)
    train, test, truth = generate(spec, data_rng)

    out = run.out
    ensure_directory(out)
    outputs = list(file_manager.write_dataset(train, out).values())
    outputs += list(file_manager.write_dataset(test, out, prefix='test_').values())
    outputs += file_manager.write_table(truth.to_frame(), out, 'truth', run.formats)

    draws = fit_model(train, run.sampler_config(), run.hyperparameters(), chain_rng)
    selected = select_variables(draws, run.level, run.include_interactions)
    report = score(draws, selected, truth, test, train.n_missing, run.include_interactions)
    row = report.to_row(replication=1, setting=spec.setting.value, n=spec.n, p=spec.p,
                        q=spec.q, family=spec.family.value)
    metrics = pd.DataFrame([row], columns=METRICS_COLUMNS)
    outputs += file_manager.write_table(metrics, out, 'metrics', run.formats)

    manifest = run_manifest.generate_manifest('simulate', run.to_dict(), [],
                                              [p for p in outputs if p], out)
    manifest_path = run_manifest.save_manifest(manifest, out)
    logger.info(f"simulate finished: est_beta={row['est_beta']:.4f}, est_theta={row['est_theta']:.4f}, "
                f"pred={row['pred']:.4f}, accuracy={row['accuracy']:.2f}")
    return CommandResult(outputs=[p for p in outputs if p], manifest_path=manifest_path,
                         draws=draws, metrics=metrics)


def cmd_benchmark(run: RunConfig) -> CommandResult:
    """
    Run n_replications simulate cycles and write metrics plus the aggregate table.

    aggregate.csv depends only on the configuration and seed, not on the
    worker count.
    """
    started = time.perf_counter()
    metrics = run_benchmark(run.sim_spec(), run.sampler_config(), run.hyperparameters(),
                            run.n_replications or 1, run.seed, run.level,
                            run.include_interactions, run.workers)
    aggregate = aggregate_metrics(metrics)

    out = run.out
    ensure_directory(out)
    outputs = file_manager.write_table(metrics, out, 'metrics', run.formats)
    outputs += file_manager.write_table(aggregate, out, 'aggregate', run.formats)
    manifest = run_manifest.generate_manifest('benchmark', run.to_dict(), [], outputs, out)
    manifest_path = run_manifest.save_manifest(manifest, out)

    for _, r in aggregate.iterrows():
        logger.info(f"  {r['metric']:<10} {r['display']}")
    logger.info(f"benchmark finished in {time.perf_counter() - started:.1f}s")
    return CommandResult(outputs=outputs, manifest_path=manifest_path, metrics=metrics,
                         aggregate=aggregate)


COMMAND_TABLE: Dict[str, Callable[[RunConfig], CommandResult]] = {
    'fit': cmd_fit,
    'simulate': cmd_simulate,
    'benchmark': cmd_benchmark,
}
