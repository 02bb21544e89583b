"""
Command-line interface.

    pytobit simulate   --k 1 --a 1 --c -5 --T 500 --seed 7
    pytobit estimate   --input chf.csv --log --bound-raw 1.20 --k auto
    pytobit test       --input chf.csv --log --bound-raw 1.20 --k auto --simulate-p
    pytobit tabulate   --ratios 0:2.5:0.1 --T 100000 --reps 100000 --output cv_table.csv
    pytobit power      --a-grid=-5,-2,0 --c-grid=-5,0,5 --T 1000 --reps 100000
    pytobit dist       --model linear --T 1000 --reps 100000
    pytobit jsr        --phi=1.3,-0.8 --probe
    pytobit fetch-ecb  --key EXR.D.CHF.EUR.SP00.A --start 2011-09-06 --end 2015-01-15

Exit codes: 0 success (statistical decisions never change it), 2 usage error, 3 invalid input,
4 data fetch error, 5 numerical error, 6 file read or write error.
"""

import argparse
import dataclasses
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import polars as pl

from pytobit.cv_table import load_default_table, read_table, write_table
from pytobit.estimation import build_regressors, information_criteria, ols_fit, select_lag
from pytobit.exchange_rates import fetch_ecb
from pytobit.experiments import McConfig, size_power_experiment, tabulate_null, tstat_distribution
from pytobit.inference import TestOptions, unit_root_test
from pytobit.model import LocalParams, Series, shift_bound, simulate_tobit
from pytobit.series_io import (read_series_csv, series_frame, simulation_frame,
                               write_json_report, write_series_csv)
from pytobit.stability import companion_pair, explosion_probe, jsr_bounds, sufficient_condition
from pytobit.util.config import (CHF_EUR_KEY, DEFAULT_BOOTSTRAP_REPLICATIONS,
                                 DEFAULT_EXPERIMENT_REPLICATIONS, DEFAULT_EXPERIMENT_T,
                                 DEFAULT_EXPLOSION_REPLICATIONS, DEFAULT_EXPLOSION_T,
                                 DEFAULT_JSR_DEPTH, DEFAULT_JSR_TOLERANCE, DEFAULT_K_MAX,
                                 DEFAULT_LIMIT_GRID, DEFAULT_RATIO_GRID, DEFAULT_SEED,
                                 DEFAULT_SIM_PVALUE_REPLICATIONS,
                                 DEFAULT_SIM_PVALUE_T, DEFAULT_TABULATION_REPLICATIONS,
                                 DEFAULT_TABULATION_T, STREAM_SIMULATE, VALID_CRITERIA,
                                 VALID_INNOVATION_LAWS, VALID_LEVELS)
from pytobit.util.errors import (DegenerateVarianceError, EcbFetchError, InvalidInputError,
                                 SingularDesignError)
from pytobit.util.rng import draw_innovations, replication_rng

logger = logging.getLogger(__name__)


### CONSTANTS #####################################################################################

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVALID_INPUT = 3
EXIT_FETCH = 4
EXIT_NUMERICAL = 5
EXIT_IO = 6

# Grids of the size/power table
DEFAULT_A_GRID = [-5.0, -2.0, -1.0, 0.0, 1.0, 2.0, 5.0]
DEFAULT_C_GRID = [-5.0, -2.0, -1.0, 0.0, 1.0, 2.0, 5.0]

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

### END CONSTANTS #################################################################################


@dataclass(frozen=True)
class RunConfig:
    """ The resolved configuration of one CLI run, echoed into every output.

    Attributes:

        command:
            The subcommand.
        input:
            Path of the input series file, if any.
        series_key:
            ECB series key, if the input is fetched.
        bound:
            Lower bound on the analysis scale.
        k:
            Lag order or 'auto'.
        k_max:
            Largest lag order for 'auto'.
        seed:
            Master seed, always resolved.
        replications:
            Replication override, if the command simulates.
        T:
            Length override, if the command simulates.
        output:
            Output path, None for stdout.
        output_format:
            'json' or 'csv'.
        threads:
            Number of worker processes.
        options:
            The remaining command-specific arguments.
    """

    command: str
    seed: int = DEFAULT_SEED
    input: str | None = None
    series_key: str | None = None
    bound: float | None = None
    k: int | str | None = None
    k_max: int | None = None
    replications: int | None = None
    T: int | None = None
    output: str | None = None
    output_format: str = 'json'
    threads: int = 1
    options: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'RunConfig':
        values = vars(args).copy()
        values.pop('handler', None)
        values.pop('verbose', None)
        known = {f.name for f in dataclasses.fields(cls)} - {'options', 'output_format', 'bound'}
        resolved = {name: values.pop(name) for name in list(values) if name in known}
        resolved['output_format'] = values.pop('format', 'json')
        resolved['bound'] = resolved_bound(args)
        values.pop('bound', None)
        resolved['options'] = values
        return cls(**resolved)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def resolved_bound(args: argparse.Namespace) -> float | None:
    """ The lower bound on the analysis scale from --bound or --bound-raw. """

    bound = getattr(args, 'bound', None)
    bound_raw = getattr(args, 'bound_raw', None)
    if bound is not None:
        return bound
    if bound_raw is not None:
        return math.log(bound_raw) if getattr(args, 'log', False) else bound_raw
    return None


def float_list(text: str) -> list[float]:
    """ Parse '1.3,-0.8' into floats; an empty string is an empty list. """

    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got "\
                                         f"'{text}'") from e


def ratio_grid(text: str) -> list[float]:
    """ Parse 'start:stop:step' (inclusive of stop) or a comma-separated list of ratios. """

    if ':' not in text:
        return float_list(text)
    try:
        start, stop, step = (float(v) for v in text.split(':'))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got '{text}'") from e
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"empty ratio grid '{text}'")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(count)]


def lag_order(text: str) -> int | str:
    if text == 'auto':
        return text
    try:
        k = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"k must be a positive integer or 'auto', got "\
                                         f"'{text}'") from e
    if k < 1:
        raise argparse.ArgumentTypeError(f"k must be at least 1, got {k}")
    return k


### OUTPUT ########################################################################################

def emit_text(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding='utf-8')
        logger.info("Wrote %s", output)


def emit_json(schema: str, config: RunConfig, result: dict) -> None:
    emit_text(write_json_report(schema, config.to_dict(), result), config.output)


def emit_frame(schema: str, config: RunConfig, frame) -> None:
    """ CSV or JSON for a polars frame; a CSV written to a file gets a JSON run sidecar. """

    if config.output_format == 'json':
        emit_json(schema, config, {'rows': frame.to_dicts()})
        return

    emit_text(frame.write_csv(), config.output)
    if config.output is not None:
        sidecar = Path(config.output).with_suffix('.json')
        write_json_report(schema, config.to_dict(),
                          {'csv': Path(config.output).name, 'row_count': frame.height}, sidecar)


### INPUT #########################################################################################

def load_series(args: argparse.Namespace) -> Series:
    """ The input series from --input or --ecb, with its lower bound. """

    if args.input is not None:
        return read_series_csv(args.input, log=args.log, bound=args.bound,
                               bound_raw=args.bound_raw)

    cache_dir = args.cache_dir
    if cache_dir is None and args.output is not None:
        cache_dir = str(Path(args.output).resolve().parent)
    bound = resolved_bound(args)

    return fetch_ecb(args.series_key, start_date=args.start, end_date=args.end,
                     lower_bound=0.0 if bound is None else bound, log=args.log,
                     cache_dir=cache_dir, quiet=args.quiet or args.output is None,
                     prefer_cache=args.use_cache)


### COMMANDS ######################################################################################

def run_simulate(args: argparse.Namespace, config: RunConfig) -> None:
    local = LocalParams(a=args.a, c=args.c, b0=args.b0, T=args.T)
    k = len(args.phi) + 1 if args.k is None else args.k
    params = local.to_model_params(k=k, phi=args.phi, sigma=args.sigma,
                                   lower_bound=args.bound or 0.0, beta_form=args.beta_form)
    rng = replication_rng(args.seed, 0, STREAM_SIMULATE)
    output = simulate_tobit(params, draw_innovations(rng, args.T, law=args.law, sigma=args.sigma))

    frame = simulation_frame(output)
    if config.output_format == 'json':
        emit_json('simulation', config, {'flat_start': output.flat_start,
                                         'rows': frame.to_dicts()})
    else:
        emit_frame('simulation', config, frame)


def run_estimate(args: argparse.Namespace, config: RunConfig) -> None:
    series = load_series(args)
    shifted, _ = shift_bound(series)

    criteria = None
    k = args.k
    if k == 'auto':
        criteria = information_criteria(shifted, args.k_max).to_dicts()
        k = select_lag(shifted, args.k_max, args.criterion)

    fit = ols_fit(build_regressors(shifted, k))
    emit_json('ols_fit', config, {'fit': fit.to_dict(), 'information_criteria': criteria,
                                  'lower_bound': series.lower_bound, 'nobs_series': len(series)})


def run_test(args: argparse.Namespace, config: RunConfig) -> None:
    series = load_series(args)
    table = load_default_table() if args.table is None else read_table(args.table)
    options = TestOptions(k_max=args.k_max, criterion=args.criterion, simulate_p=args.simulate_p,
                          backend=args.backend, sim_replications=args.sim_reps,
                          sim_T=args.sim_T, limit_grid=args.limit_grid,
                          bootstrap=args.bootstrap, bootstrap_replications=args.boot_reps,
                          bootstrap_T=args.boot_T, impose_zero_b0=args.impose_zero_b0,
                          seed=args.seed, workers=args.threads)

    report = unit_root_test(series, k=args.k, table=table, options=options)
    emit_json('test_report', config, report.to_dict())


def run_tabulate(args: argparse.Namespace, config: RunConfig) -> None:
    mc = McConfig(replications=args.reps, T=args.T, seed=args.seed, law=args.law,
                  workers=args.threads)
    table = tabulate_null(mc, args.ratios)
    table.provenance['config'] = config.to_dict()

    sidecar = write_table(table, args.output)
    logger.info("Wrote %s and %s", args.output, sidecar)


def run_power(args: argparse.Namespace, config: RunConfig) -> None:
    mc = McConfig(replications=args.reps, T=args.T, seed=args.seed, law=args.law,
                  workers=args.threads)
    table = load_default_table() if args.table is None else read_table(args.table)
    frame = size_power_experiment(args.a_grid, args.c_grid, mc, table=table, level=args.level)
    emit_frame('experiment', config, frame)


def run_dist(args: argparse.Namespace, config: RunConfig) -> None:
    mc = McConfig(replications=args.reps, T=args.T, seed=args.seed, law=args.law,
                  workers=args.threads)
    params = LocalParams(a=args.a, c=args.c, b0=args.b0, T=args.T)
    frame = tstat_distribution(mc, model=args.model, params=params, beta_form=args.beta_form)
    emit_frame('experiment', config, frame)


def run_jsr(args: argparse.Namespace, config: RunConfig) -> None:
    certificate = jsr_bounds(companion_pair(args.phi), depth=args.depth, tol=args.tol)
    result = {
        'phi': args.phi,
        'sufficient_condition': sufficient_condition(args.phi),
        'certificate': dataclasses.asdict(certificate),
        'satisfies_assumption': certificate.satisfies_assumption,
        'violates_assumption': certificate.violates_assumption,
        'probe': None,
    }

    if args.probe:
        params = LocalParams(T=args.T).to_model_params(k=len(args.phi) + 1, phi=args.phi)
        probe = explosion_probe(params, T=args.T, replications=args.reps, seed=args.seed)
        result['probe'] = {
            'classification': probe.classification,
            'explosive_share': probe.explosive_share,
            'median_growth_ratio': probe.median_growth_ratio,
            'growth_threshold': probe.growth_threshold,
            'share_threshold': probe.share_threshold,
            'max_abs_dy_quantiles': {str(q): v for q, v in probe.max_abs_dy_quantiles.items()},
            'growth_ratios': probe.growth_ratios,
            'notes': list(probe.notes),
        }

    emit_json('jsr_certificate', config, result)


def run_fetch_ecb(args: argparse.Namespace, config: RunConfig) -> None:
    series = load_series(args)
    if config.output_format == 'json':
        emit_json('series', config, {'lower_bound': series.lower_bound,
                                     'rows': series_frame(series).to_dicts()})
    elif args.output is None:
        emit_text(series_frame(series).write_csv(), None)
    else:
        write_series_csv(series, args.output)


### PARSER ########################################################################################

def add_common(parser: argparse.ArgumentParser, default_format: str = 'json',
               formats: Sequence[str] = ('json', 'csv')) -> None:
    parser.add_argument('--seed', type=int, default=DEFAULT_SEED,
                        help=f"master seed (default {DEFAULT_SEED})")
    parser.add_argument('--threads', type=int, default=1, help="worker processes (default 1)")
    parser.add_argument('--output', default=None, help="output path (default stdout)")
    parser.add_argument('--format', choices=list(formats), default=default_format)
    parser.add_argument('-v', '--verbose', action='store_true', help="debug logging")
    parser.add_argument('--quiet', action='store_true', help="warnings only, no disclaimer")


def add_input(parser: argparse.ArgumentParser, required: bool = True) -> None:
    source = parser.add_mutually_exclusive_group(required=required)
    source.add_argument('--input', default=None, help="series CSV (value or date,value)")
    source.add_argument('--ecb', dest='series_key', default=None,
                        help=f"fetch this ECB series key, e.g. {CHF_EUR_KEY}")
    parser.add_argument('--start', default=None, help="first date for --ecb, YYYY-MM-DD")
    parser.add_argument('--end', default=None, help="last date for --ecb, YYYY-MM-DD")
    parser.add_argument('--cache-dir', default=None, help="where to keep raw ECB responses")
    parser.add_argument('--use-cache', action='store_true',
                        help="read a cached ECB response instead of downloading when present")
    parser.add_argument('--log', action='store_true', help="take natural logs of the values")
    bound = parser.add_mutually_exclusive_group()
    bound.add_argument('--bound', type=float, default=None,
                       help="lower bound on the analysis (post-log) scale")
    bound.add_argument('--bound-raw', type=float, default=None,
                       help="lower bound on the scale of the data file")


def add_lags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--k', type=lag_order, default=1, help="lag order or 'auto' (default 1)")
    parser.add_argument('--k-max', type=int, default=DEFAULT_K_MAX)
    parser.add_argument('--criterion', choices=VALID_CRITERIA, default='bic')


def add_monte_carlo(parser: argparse.ArgumentParser, T: int, reps: int) -> None:
    parser.add_argument('--T', type=int, default=T, help=f"path length (default {T})")
    parser.add_argument('--reps', type=int, default=reps, help=f"replications (default {reps})")
    parser.add_argument('--law', choices=VALID_INNOVATION_LAWS, default='normal')


def add_local(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--a', type=float, default=0.0, help="local drift a")
    parser.add_argument('--c', type=float, default=0.0, help="local exponent c")
    parser.add_argument('--b0', type=float, default=0.0, help="scaled initial value b0")
    parser.add_argument('--beta-form', choices=['linear', 'exp'], default='linear',
                        help="beta = 1 + c/T (linear) or exp(c/T)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='pytobit', description="Unit-root inference for "\
                                     "dynamic Tobit autoregressions")
    commands = parser.add_subparsers(dest='command', required=True)

    simulate = commands.add_parser('simulate', help="simulate a Tobit path")
    add_common(simulate, default_format='csv')
    add_local(simulate)
    simulate.add_argument('--k', type=int, default=None, help="lag order (default len(phi) + 1)")
    simulate.add_argument('--phi', type=float_list, default=[])
    simulate.add_argument('--sigma', type=float, default=1.0)
    simulate.add_argument('--bound', type=float, default=None)
    simulate.add_argument('--T', type=int, default=DEFAULT_EXPERIMENT_T)
    simulate.add_argument('--law', choices=VALID_INNOVATION_LAWS, default='normal')
    simulate.set_defaults(handler=run_simulate)

    estimate = commands.add_parser('estimate', help="OLS fit of the ADF regression")
    add_common(estimate)
    add_input(estimate)
    add_lags(estimate)
    estimate.set_defaults(handler=run_estimate)

    test = commands.add_parser('test', help="censoring-adjusted unit-root test")
    add_common(test)
    add_input(test)
    add_lags(test)
    test.add_argument('--table', default=None, help="critical-value table CSV (with sidecar)")
    test.add_argument('--simulate-p', action='store_true')
    test.add_argument('--backend', choices=['finite', 'asymptotic'], default='finite')
    test.add_argument('--sim-reps', type=int, default=DEFAULT_SIM_PVALUE_REPLICATIONS)
    test.add_argument('--sim-T', type=int, default=DEFAULT_SIM_PVALUE_T)
    test.add_argument('--limit-grid', type=int, default=DEFAULT_LIMIT_GRID)
    test.add_argument('--bootstrap', action='store_true')
    test.add_argument('--boot-reps', type=int, default=DEFAULT_BOOTSTRAP_REPLICATIONS)
    test.add_argument('--boot-T', type=int, default=None)
    test.add_argument('--impose-zero-b0', action='store_true')
    test.set_defaults(handler=run_test)

    tabulate = commands.add_parser('tabulate', help="tabulate null critical values")
    # The table is always a CSV with its JSON sidecar
    add_common(tabulate, default_format='csv', formats=('csv',))
    add_monte_carlo(tabulate, DEFAULT_TABULATION_T, DEFAULT_TABULATION_REPLICATIONS)
    tabulate.add_argument('--ratios', type=ratio_grid, default=DEFAULT_RATIO_GRID)
    tabulate.set_defaults(handler=run_tabulate, output='cv_table.csv')

    power = commands.add_parser('power', help="size and power experiment")
    add_common(power, default_format='csv')
    add_monte_carlo(power, DEFAULT_EXPERIMENT_T, DEFAULT_EXPERIMENT_REPLICATIONS)
    power.add_argument('--a-grid', type=float_list, default=DEFAULT_A_GRID)
    power.add_argument('--c-grid', type=float_list, default=DEFAULT_C_GRID)
    power.add_argument('--level', type=int, choices=VALID_LEVELS, default=5)
    power.add_argument('--table', default=None)
    power.set_defaults(handler=run_power)

    dist = commands.add_parser('dist', help="t-statistic CDF and density grids")
    add_common(dist, default_format='csv')
    add_monte_carlo(dist, DEFAULT_EXPERIMENT_T, DEFAULT_EXPERIMENT_REPLICATIONS)
    add_local(dist)
    dist.add_argument('--model', choices=['tobit', 'linear'], default='tobit')
    dist.set_defaults(handler=run_dist)

    jsr = commands.add_parser('jsr', help="joint spectral radius certificate")
    add_common(jsr)
    jsr.add_argument('--phi', type=float_list, required=True)
    jsr.add_argument('--depth', type=int, default=DEFAULT_JSR_DEPTH)
    jsr.add_argument('--tol', type=float, default=DEFAULT_JSR_TOLERANCE)
    jsr.add_argument('--probe', action='store_true', help="also run the explosion probe")
    jsr.add_argument('--T', type=int, default=DEFAULT_EXPLOSION_T)
    jsr.add_argument('--reps', type=int, default=DEFAULT_EXPLOSION_REPLICATIONS)
    jsr.set_defaults(handler=run_jsr)

    fetch = commands.add_parser('fetch-ecb', help="download a series from the ECB")
    add_common(fetch, default_format='csv')
    fetch.add_argument('--key', dest='series_key', default=CHF_EUR_KEY)
    fetch.add_argument('--start', default=None)
    fetch.add_argument('--end', default=None)
    fetch.add_argument('--cache-dir', default=None)
    fetch.add_argument('--use-cache', action='store_true')
    fetch.add_argument('--log', action='store_true')
    fetch.add_argument('--bound', type=float, default=None)
    fetch.set_defaults(handler=run_fetch_ecb, input=None, bound_raw=None)

    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def main(argv: Sequence[str] | None = None) -> int:
    """ Run one command and return its exit code. """

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    configure_logging(args.verbose, args.quiet)
    config = RunConfig.from_args(args)
    logger.debug("Resolved configuration: %s", config)

    try:
        args.handler(args, config)
    except EcbFetchError as e:
        logger.error("%s", e)
        return EXIT_FETCH
    except (SingularDesignError, DegenerateVarianceError) as e:
        logger.error("%s", e)
        return EXIT_NUMERICAL
    except InvalidInputError as e:
        logger.error("%s", e)
        return EXIT_INVALID_INPUT
    except (OSError, pl.exceptions.PolarsError) as e:
        logger.error("%s", e)
        return EXIT_IO

    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
