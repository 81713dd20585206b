"""
Command-line entry point for hspliable.

Subcommands:
    fit        fit X.csv / Z.csv / y.csv and write posterior summaries
    simulate   generate one scenario, fit it and score it against the truth
    benchmark  repeat simulate over independent replications and aggregate
    repro      run the reproduction suite and write repro_report.md
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

import config
from modules import __version__
from modules.commands import COMMAND_TABLE
from modules.errors import HspError
from modules.repro_suite import cmd_repro
from modules.run_config import build_run_config, load_config_file
from modules.utils import parse_bool

logger = logging.getLogger(__name__)

# flag dest -> RunConfig field
FLAG_TO_FIELD = {
    'iters': 'n_iter',
    'burnin': 'burn_in',
    'rho': 'rho_x',
    'missing': 'missing_fraction',
    'reps': 'n_replications',
}
NOT_CONFIG = {'command', 'config', 'log_level', 'quiet'}


def setup_logging(level: str = config.LOG_LEVEL) -> None:
    """Root logger: app log file, error log file and stderr."""
    os.makedirs(config.LOG_DIR, exist_ok=True)
    error_handler = logging.FileHandler(config.ERROR_LOG_FILE)
    error_handler.setLevel(logging.ERROR)
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(config.APP_LOG_FILE),
            error_handler,
            logging.StreamHandler()
        ],
        force=True,
    )


def _bool_arg(value: str) -> bool:
    try:
        return parse_bool(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON run configuration file')
    common.add_argument('--out', help=f'output directory (default {config.OUTPUT_DIR})')
    common.add_argument('--formats', nargs='+', choices=['csv', 'json'], help='output table formats')
    common.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], default=None)
    common.add_argument('--quiet', action='store_true', help='only log warnings and errors')

    sampler = common.add_argument_group('sampler')
    sampler.add_argument('--iters', type=int, help=f'iterations (default {config.DEFAULT_N_ITER})')
    sampler.add_argument('--burnin', type=int, help=f'burn-in (default {config.DEFAULT_BURN_IN})')
    sampler.add_argument('--thin', type=int)
    sampler.add_argument('--seed', type=int)
    sampler.add_argument('--pliable', type=_bool_arg, metavar='{true,false}',
                         help='false fits plain horseshoe regression (Theta = 0, theta0 = 0)')
    sampler.add_argument('--store-imputations', action='store_true', default=None)
    sampler.add_argument('--family', choices=['gaussian', 'binomial'])
    sampler.add_argument('--level', type=float, help='credible level used for selection (default 0.95)')
    sampler.add_argument('--include-interactions', action='store_true', default=None,
                         help='count Theta entries in selection metrics')
    return common


def _simulation_arguments(parser: argparse.ArgumentParser) -> None:
    sim = parser.add_argument_group('simulation')
    sim.add_argument('--setting', help='I..VI')
    sim.add_argument('--n', type=int)
    sim.add_argument('--p', type=int)
    sim.add_argument('--q', type=int)
    sim.add_argument('--rho', type=float, help='AR(1) correlation for Settings III/IV')
    sim.add_argument('--missing', type=float, help='fraction of training responses removed')
    sim.add_argument('--no-interactions', dest='interactions', action='store_false', default=None)
    sim.add_argument('--n-test', type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='hspliable', description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)
    common = _common_parser()

    fit = sub.add_parser('fit', parents=[common], help='fit CSV data')
    fit.add_argument('--x', help='X.csv (n x p, header row)')
    fit.add_argument('--z', help='Z.csv (n x q, header row); omit for q = 0')
    fit.add_argument('--y', help='y.csv (n x 1, NA for missing)')
    fit.add_argument('--standardize', action='store_true', default=None)
    fit.add_argument('--store-draws', action='store_true', default=None)
    fit.add_argument('--trace', nargs='+', metavar='NAME', help="chains to export, e.g. 'beta[1]' sigma_sq")
    fit.add_argument('--acf-max-lag', type=int)
    fit.add_argument('--holdout-reps', type=int)
    fit.add_argument('--holdout-size', type=int)

    simulate = sub.add_parser('simulate', parents=[common], help='simulate, fit and score once')
    _simulation_arguments(simulate)

    benchmark = sub.add_parser('benchmark', parents=[common], help='repeat simulate and aggregate')
    _simulation_arguments(benchmark)
    benchmark.add_argument('--reps', type=int, help='number of replications')
    benchmark.add_argument('--workers', type=int, help='worker processes (default HSP_THREADS)')

    repro = sub.add_parser('repro', parents=[common], help='run the reproduction suite')
    repro.add_argument('--cases', nargs='+', metavar='NAME', help='subset of case names')
    repro.add_argument('--reps', type=int, help='override replications per case')
    repro.add_argument('--workers', type=int)
    return parser


def flags_from_args(args: argparse.Namespace) -> dict:
    """Namespace -> RunConfig keys; flags that were not given map to None."""
    flags = {}
    for key, value in vars(args).items():
        if key in NOT_CONFIG:
            continue
        flags[FLAG_TO_FIELD.get(key, key)] = value
    return flags


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand.

    Returns:
        int: 0 on success, the error's exit code on a known failure, 1 otherwise
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    level = 'WARNING' if args.quiet else (args.log_level or config.LOG_LEVEL)
    setup_logging(level)

    try:
        file_values = load_config_file(args.config) if args.config else {}
        run = build_run_config(args.command, flags_from_args(args), file_values)
        logger.info(f"hspliable {__version__}: {args.command} -> {run.out}")
        handler = cmd_repro if args.command == 'repro' else COMMAND_TABLE[args.command]
        handler(run)
        return 0
    except HspError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected error during {args.command}: {e}", exc_info=True)
        return 1


if __name__ == '__main__':
    sys.exit(main())
