"""
Reproduction suite.

Runs desk-scale benchmark cases and checks aggregate means against the
expected bands listed in data/repro_cases.json, then writes a markdown
PASS/FAIL report. A trend case checks that a metric's median strictly
decreases along a sequence of sample sizes.
"""

import json
import logging
import os
import time
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

import config
from modules import file_manager, run_manifest
from modules.commands import CommandResult, run_benchmark
from modules.errors import ConfigError
from modules.model import Hyperparameters, SamplerConfig
from modules.run_config import RunConfig
from modules.simgen import SimSpec
from modules.utils import ensure_directory, format_mean_sd, mean_sd

logger = logging.getLogger(__name__)

REPORT_NAME = 'repro_report.md'
SPEC_KEYS = ('setting', 'n', 'p', 'q', 'rho_x', 'missing_fraction', 'interactions', 'family', 'n_test')


@dataclass
class ReproCase:
    """
    One benchmark case with expected bands per metric.

    bands maps a metric name to (lower, upper); either end may be None.
    trend_n, when set, turns the case into a trend check over those sample
    sizes for trend_metric.
    """

    name: str
    table: str
    spec: SimSpec
    reps: int = config.REPRO_REPLICATIONS
    pliable: bool = True
    bands: Dict[str, Tuple[Optional[float], Optional[float]]] = field(default_factory=dict)
    trend_n: Tuple[int, ...] = ()
    trend_metric: str = 'est_beta'
    seed: int = config.DEFAULT_SEED


def validate_result(value: float, band: Tuple[Optional[float], Optional[float]]) -> str:
    """
    "PASS" if value lies inside the band, "FAIL" otherwise.

    Examples:
        >>> validate_result(0.05, (0.02, 0.12)), validate_result(1.2, (None, 1.0))
        ('PASS', 'FAIL')
    """
    lower, upper = band
    if not np.isfinite(value):
        return "FAIL"
    if lower is not None and value < lower:
        return "FAIL"
    if upper is not None and value > upper:
        return "FAIL"
    return "PASS"


def _parse_case(entry: dict) -> ReproCase:
    try:
        spec_fields = {k: entry['spec'][k] for k in SPEC_KEYS if k in entry['spec']}
        unknown = set(entry['spec']) - set(SPEC_KEYS)
        if unknown:
            raise ConfigError(f"case '{entry.get('name')}': unknown spec keys {sorted(unknown)}")
        seed = int(entry.get('seed', config.DEFAULT_SEED))
        spec = SimSpec(seed=seed, **spec_fields)
        bands = {metric: (bounds[0], bounds[1]) for metric, bounds in entry.get('bands', {}).items()}
        return ReproCase(name=entry['name'], table=entry['table'], spec=spec,
                         reps=int(entry.get('reps', config.REPRO_REPLICATIONS)),
                         pliable=bool(entry.get('pliable', True)), bands=bands,
                         trend_n=tuple(entry.get('trend_n', ())),
                         trend_metric=entry.get('trend_metric', 'est_beta'), seed=seed)
    except (KeyError, TypeError, IndexError) as e:
        raise ConfigError(f"malformed repro case {entry.get('name', '?')}: {e}") from None


def load_cases(path: str = config.REPRO_CASES_FILE) -> List[ReproCase]:
    """
    Load ReproCase definitions.

    Raises:
        ConfigError: file missing or malformed
    """
    if not os.path.exists(path):
        raise ConfigError(f"Repro case file not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"JSON decode error in {path}: {e}") from None
    if not isinstance(raw, dict) or not isinstance(raw.get('cases'), list):
        raise ConfigError(f"Invalid repro case format in {path}: expected {{'cases': [...]}}")
    cases = [_parse_case(entry) for entry in raw['cases']]
    names = [c.name for c in cases]
    if len(set(names)) != len(names):
        raise ConfigError("repro case names must be unique")
    return cases


def _check_band_case(case: ReproCase, sampler: SamplerConfig, hyper: Hyperparameters,
                     workers: int) -> Tuple[List[dict], pd.DataFrame]:
    metrics = run_benchmark(case.spec, sampler, hyper, case.reps, case.seed, config.DEFAULT_LEVEL,
                            workers=workers)
    checks = []
    for metric, band in case.bands.items():
        mean, sd = mean_sd(metrics[metric])
        checks.append({'case': case.name, 'table': case.table, 'metric': metric,
                       'value': mean, 'display': format_mean_sd(mean, sd),
                       'lower': band[0], 'upper': band[1], 'status': validate_result(mean, band)})
    return checks, metrics


def _check_trend_case(case: ReproCase, sampler: SamplerConfig, hyper: Hyperparameters,
                      workers: int) -> Tuple[List[dict], pd.DataFrame]:
    frames, medians = [], []
    for n in case.trend_n:
        spec = replace(case.spec, n=n)
        frame = run_benchmark(spec, sampler, hyper, case.reps, case.seed, config.DEFAULT_LEVEL,
                              workers=workers)
        frames.append(frame)
        medians.append(float(np.median(frame[case.trend_metric])))
    decreasing = all(b < a for a, b in zip(medians, medians[1:]))
    display = ' > '.join(f"{m:.3f}" for m in medians)
    check = {'case': case.name, 'table': case.table, 'metric': f"median {case.trend_metric}",
             'value': medians[-1] if medians else np.nan, 'display': display,
             'lower': None, 'upper': None, 'status': "PASS" if decreasing else "FAIL"}
    return [check], pd.concat(frames, ignore_index=True)


def run_repro_suite(cases: Sequence[ReproCase], sampler: SamplerConfig,
                    hyper: Optional[Hyperparameters] = None, workers: int = 1) -> dict:
    """
    Execute every case and compare aggregate means with the bands.

    Returns:
        dict: Results containing:
            - executed (bool): Whether any case ran
            - checks (list): One dict per (case, metric) check
            - all_passed (bool): Whether every check passed
            - metrics (DataFrame): All replication rows, with a case column
    """
    hyper = hyper or Hyperparameters()
    checks, frames = [], []
    for case in cases:
        started = time.perf_counter()
        case_sampler = replace(sampler, pliable=case.pliable)
        if case.trend_n:
            case_checks, metrics = _check_trend_case(case, case_sampler, hyper, workers)
        else:
            case_checks, metrics = _check_band_case(case, case_sampler, hyper, workers)
        metrics.insert(0, 'case', case.name)
        frames.append(metrics)
        checks.extend(case_checks)
        verdict = "PASS" if all(c['status'] == "PASS" for c in case_checks) else "FAIL"
        logger.info(f"Repro case {case.name}: {verdict} ({time.perf_counter() - started:.1f}s)")

    executed = len(checks) > 0
    return {
        'executed': executed,
        'checks': checks,
        'all_passed': all(c['status'] == "PASS" for c in checks) if executed else False,
        'metrics': pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(),
    }


def _band_text(lower, upper) -> str:
    if lower is None and upper is None:
        return "strictly decreasing"
    if lower is None:
        return f"<= {upper}"
    if upper is None:
        return f">= {lower}"
    return f"[{lower}, {upper}]"


def format_report(result: dict, sampler: SamplerConfig) -> str:
    """Markdown PASS/FAIL table, one line per check."""
    lines = [
        "# Reproduction report",
        "",
        f"Sampler: {sampler.n_iter} iterations, burn-in {sampler.burn_in}, thin {sampler.thin}.",
        "",
        "| case | source | metric | mean (sd) | expected | status |",
        "|---|---|---|---|---|---|",
    ]
    for c in result['checks']:
        lines.append(f"| {c['case']} | {c['table']} | {c['metric']} | {c['display']} | "
                     f"{_band_text(c['lower'], c['upper'])} | {c['status']} |")
    passed = sum(c['status'] == "PASS" for c in result['checks'])
    lines += ["", f"**{passed}/{len(result['checks'])} checks passed.**", ""]
    return "\n".join(lines)


def cmd_repro(run: RunConfig) -> CommandResult:
    """Run the suite (optionally a subset of cases) and write the report."""
    cases = load_cases()
    if run.cases:
        wanted = set(run.cases)
        missing = wanted - {c.name for c in cases}
        if missing:
            raise ConfigError(f"unknown repro case(s): {', '.join(sorted(missing))}")
        cases = [c for c in cases if c.name in wanted]
    if run.n_replications is not None:
        cases = [replace(c, reps=run.n_replications) for c in cases]

    sampler = run.sampler_config()
    result = run_repro_suite(cases, sampler, run.hyperparameters(), run.workers)

    out = run.out
    ensure_directory(out)
    outputs = [file_manager.write_text(format_report(result, sampler), os.path.join(out, REPORT_NAME))]
    outputs += file_manager.write_table(result['metrics'], out, 'repro_metrics', run.formats)
    outputs += file_manager.write_table(pd.DataFrame(result['checks']), out, 'repro_checks', run.formats)
    manifest = run_manifest.generate_manifest(
        'repro', run.to_dict(), [config.REPRO_CASES_FILE], outputs, out,
        {'repro': {'all_passed': result['all_passed'], 'n_checks': len(result['checks'])}})
    manifest_path = run_manifest.save_manifest(manifest, out)
    logger.info(f"Repro suite: {'all checks passed' if result['all_passed'] else 'some checks FAILED'}")
    return CommandResult(outputs=outputs, manifest_path=manifest_path, metrics=result['metrics'])
