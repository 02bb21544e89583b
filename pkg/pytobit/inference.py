"""
The censoring-adjusted unit-root test.

The null is a = c = 0 jointly (alpha = 0 and beta = 1). Under it, t_beta has a nonstandard limit
that depends only on the nuisance ratio b0*phi(1)/sigma, so the test

    1. shifts the series so that the bound sits at zero,
    2. regresses y_t on (1, y_{t-1}, dy_{t-1}, ..., dy_{t-k+1}) and computes t_beta,
    3. estimates the ratio with b0_hat = T^{-1/2} y_1 and compares t_beta with the critical value
       in the nearest row of the table (the ADF row beyond the last tabulated ratio).

p-values are available from the table (interpolated), from a simulated null at the estimated
ratio, and from a parametric bootstrap.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from pytobit.cv_table import CvTable, load_default_table
from pytobit.estimation import OlsFit, build_regressors, ols_fit, select_lag
from pytobit.experiments import McConfig, simulate_tstats
from pytobit.limit_process import Theta, limit_tstat_draws
from pytobit.model import Series, shift_bound
from pytobit.util.config import (DEFAULT_BOOTSTRAP_REPLICATIONS, DEFAULT_CHUNK_SIZE,
                                 DEFAULT_K_MAX, DEFAULT_LIMIT_GRID, DEFAULT_SEED,
                                 DEFAULT_SIM_PVALUE_REPLICATIONS, DEFAULT_SIM_PVALUE_T,
                                 LEVEL_QUANTILES, STREAM_BOOTSTRAP, VALID_CRITERIA,
                                 VALID_LEVELS)
from pytobit.util.errors import DegenerateVarianceError, InvalidInputError
from pytobit.util.input_validation import check_choice
from pytobit.util.kernels import ar1_tstat, tobit_path
from pytobit.util.parallel import replicate
from pytobit.util.rng import replication_rng

logger = logging.getLogger(__name__)


VALID_BACKENDS = ['finite', 'asymptotic']

MIN_BOOTSTRAP_REPLICATIONS = 99

NO_PHI = np.zeros(0)


@dataclass(frozen=True)
class TestOptions:
    """ Optional parts of unit_root_test.

    Attributes:

        k_max:
            Largest lag order tried when k is 'auto'.
        criterion:
            'aic' or 'bic', for k = 'auto'.
        simulate_p:
            Also compute a p-value from a simulated null at the estimated ratio.
        backend:
            'finite' (AR(1) paths of length sim_T) or 'asymptotic' (limit functionals on a grid
            of limit_grid steps).
        sim_replications:
            Number of simulated null draws.
        sim_T:
            Path length of the finite backend.
        limit_grid:
            Grid size of the asymptotic backend.
        bootstrap:
            Also compute a parametric-bootstrap p-value.
        bootstrap_replications:
            Number of bootstrap series R (>= 99).
        bootstrap_T:
            Length T' of the bootstrap series, defaults to the sample length.
        impose_zero_b0:
            Use b0 = 0 (ratio 0) instead of the estimate.
        seed:
            Master seed for every simulated quantity.
        workers:
            Number of processes for simulations.
    """

    __test__ = False

    k_max: int = DEFAULT_K_MAX
    criterion: str = 'bic'
    simulate_p: bool = False
    backend: str = 'finite'
    sim_replications: int = DEFAULT_SIM_PVALUE_REPLICATIONS
    sim_T: int = DEFAULT_SIM_PVALUE_T
    limit_grid: int = DEFAULT_LIMIT_GRID
    bootstrap: bool = False
    bootstrap_replications: int = DEFAULT_BOOTSTRAP_REPLICATIONS
    bootstrap_T: int | None = None
    impose_zero_b0: bool = False
    seed: int = DEFAULT_SEED
    workers: int = 1

    def __post_init__(self):
        check_choice(self.criterion, VALID_CRITERIA, 'criterion')
        check_choice(self.backend, VALID_BACKENDS, 'backend')


@dataclass(frozen=True)
class TestReport:
    """ Outcome of unit_root_test.

    decisions[level] is True when the null is rejected at that level, i.e. t_beta <= cv.
    """

    __test__ = False

    k: int
    nobs: int
    t_alpha: float
    t_beta: float
    b0_hat: float
    phi1_hat: float
    sigma_hat: float
    ratio: float
    critical_values: dict[int, float]
    decisions: dict[int, bool]
    p_value_table: float
    lower_bound: float
    p_value_sim: float | None = None
    p_value_boot: float | None = None
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            'k': self.k,
            'nobs': self.nobs,
            't_alpha': self.t_alpha,
            't_beta': self.t_beta,
            'b0_hat': self.b0_hat,
            'phi1_hat': self.phi1_hat,
            'sigma_hat': self.sigma_hat,
            'ratio': self.ratio,
            'critical_values': {str(k): v for k, v in self.critical_values.items()},
            'decisions': {str(k): v for k, v in self.decisions.items()},
            'p_value_table': self.p_value_table,
            'p_value_sim': self.p_value_sim,
            'p_value_boot': self.p_value_boot,
            'lower_bound': self.lower_bound,
            'metadata': self.metadata,
        }


def _clamp_ratio(ratio: float) -> float:
    if ratio < 0:
        logger.warning("Negative nuisance ratio %.4g clamped to 0", ratio)
        return 0.0
    return ratio


def critical_value_lookup(table: CvTable, ratio: float, level: int) -> float:
    """ Critical value of t_beta for a nuisance ratio and a level.

    The row whose ratio is nearest is used, exact ties going to the smaller ratio; ratios above
    the largest tabulated one use the ADF row. A negative ratio is clamped to 0.

    Args:

        table:
            The critical-value table.
        ratio:
            b0*phi(1)/sigma.
        level:
            Significance level in percent, one of [1, 5, 10].

    Returns:

        The critical value.

    Raises:

        InvalidInputError: The level is not tabulated.
    """

    check_choice(level, VALID_LEVELS, 'level')
    values, _ = table.nearest_row(_clamp_ratio(ratio))

    return values[VALID_LEVELS.index(level)]


def table_p_value(table: CvTable, ratio: float, t_beta: float) -> float:
    """ p-value interpolated linearly between the three tabulated levels of the nearest row.

    Outside the tabulated range the value is censored to [0.01, 0.10].
    """

    values, _ = table.nearest_row(_clamp_ratio(ratio))
    levels = [LEVEL_QUANTILES[level] for level in VALID_LEVELS]

    return float(np.interp(t_beta, values, levels))


def simulated_p_value(t_beta: float, ratio: float, backend: str = 'finite',
                      replications: int = DEFAULT_SIM_PVALUE_REPLICATIONS,
                      T: int = DEFAULT_SIM_PVALUE_T, n: int = DEFAULT_LIMIT_GRID,
                      seed: int = DEFAULT_SEED, workers: int = 1) -> float:
    """ Share of simulated null t_beta draws at or below t_beta.

    Args:

        t_beta:
            The observed statistic.
        ratio:
            Nuisance ratio b0*phi(1)/sigma of the null.
        backend:
            'finite' simulates y_t = [y_{t-1} + u_t]_+ with y_0 = ratio*sqrt(T); 'asymptotic'
            draws the limit functional with theta_phi = (0, ratio, 0) and unit scale.
        replications:
            Number of null draws.
        T:
            Path length for the finite backend.
        n:
            Grid steps for the asymptotic backend.
        seed:
            Master seed.
        workers:
            Number of processes.

    Returns:

        The p-value in [0, 1].
    """

    check_choice(backend, VALID_BACKENDS, 'backend')
    ratio = _clamp_ratio(ratio)

    if backend == 'finite':
        config = McConfig(replications=replications, T=T, seed=seed, workers=workers)
        draws = simulate_tstats(config, y0=ratio * math.sqrt(T), label='simulated null')
    else:
        draws = limit_tstat_draws(Theta(a=0.0, b0=ratio, c=0.0, sigma=1.0), 1.0, replications,
                                  n=n, seed=seed, workers=workers)

    draws = draws[np.isfinite(draws)]
    if draws.size == 0:
        raise InvalidInputError("Every simulated null draw was undefined")

    return float(np.mean(draws <= t_beta))


@dataclass(frozen=True)
class BootstrapTask:
    y_start: float
    sigma: float
    T_prime: int
    k: int
    seed: int
    start: int = 0
    stop: int = 0


def _bootstrap_tstat(y: np.ndarray, k: int) -> float:
    if k == 1:
        return ar1_tstat(y)
    try:
        return ols_fit(build_regressors(Series(y), k)).t_beta
    except ValueError:
        return math.nan


def _bootstrap_chunk(task: BootstrapTask) -> np.ndarray:
    out = np.empty(task.stop - task.start)
    for row, replication in enumerate(range(task.start, task.stop)):
        rng = replication_rng(task.seed, replication, STREAM_BOOTSTRAP)
        u = task.sigma * rng.standard_normal(task.T_prime - 1)
        path, _ = tobit_path(0.0, 1.0, NO_PHI, np.array([task.y_start]), u, True)
        y = np.concatenate([[task.y_start], path])
        out[row] = _bootstrap_tstat(y, task.k)
    return out


def parametric_bootstrap(fit: OlsFit, series: Series,
                         R: int = DEFAULT_BOOTSTRAP_REPLICATIONS,
                         T_prime: int | None = None, seed: int = DEFAULT_SEED,
                         workers: int = 1) -> float:
    """ Parametric-bootstrap p-value for t_beta.

    Each bootstrap series starts at y_1 = sqrt(T')*phi1_hat*y_1/sqrt(T) and follows
    y_t = [y_{t-1} + u_t]_+ with u_t ~ N(0, sigma2_hat); t_beta is recomputed with the fitted
    lag order. For k > 1 the series are still generated from the AR(1) recursion.

    Args:

        fit:
            The fit on the observed (bound-shifted) series.
        series:
            The observed series, bound-shifted to zero.
        R:
            Number of bootstrap series, at least 99.
        T_prime:
            Length of each bootstrap series, at least len(series); defaults to len(series).
        seed:
            Master seed.
        workers:
            Number of processes.

    Returns:

        p = (1 + #{t_r <= t_obs}) / (R + 1), over the bootstrap draws with a defined t_beta.
    """

    T = len(series)
    T_prime = T if T_prime is None else int(T_prime)
    if R < MIN_BOOTSTRAP_REPLICATIONS:
        raise InvalidInputError(f"The bootstrap needs at least {MIN_BOOTSTRAP_REPLICATIONS} "\
                                f"replications, received {R}")
    if T_prime < T:
        raise InvalidInputError(f"T' = {T_prime} must be at least the sample length {T}")
    if not fit.tstats_defined:
        raise DegenerateVarianceError("The bootstrap needs a positive residual variance")

    y_start = math.sqrt(T_prime) * fit.phi1_hat * float(series.values[0]) / math.sqrt(T)
    if y_start < 0:
        logger.warning("Bootstrap start %.4g is negative (phi1_hat = %.4g); using 0", y_start,
                       fit.phi1_hat)
        y_start = 0.0
    if fit.k > 1:
        logger.info("Bootstrap with k = %d: AR(1) generation, re-estimation with k = %d",
                    fit.k, fit.k)

    task = BootstrapTask(y_start=y_start, sigma=fit.sigma_hat, T_prime=T_prime, k=fit.k,
                         seed=seed)
    draws = replicate(_bootstrap_chunk, task, R, workers=workers,
                      chunk_size=min(DEFAULT_CHUNK_SIZE, R), label='bootstrap')

    draws = draws[np.isfinite(draws)]
    if draws.size < R:
        logger.warning("%d bootstrap draws had an undefined t-statistic", R - draws.size)

    return float((1 + np.sum(draws <= fit.t_beta)) / (draws.size + 1))


def unit_root_test(series: Series, k: int | Literal['auto'] = 1, table: CvTable | None = None,
                   options: TestOptions | None = None) -> TestReport:
    """ Test the null of a unit root without drift (alpha = 0, beta = 1).

    Args:

        series:
            The observed series; its lower_bound is shifted to zero first.
        k:
            Lag order, or 'auto' to select it by options.criterion up to options.k_max.
        table:
            Critical values, defaults to the shipped table.
        options:
            TestOptions; defaults run the table-based test only.

    Returns:

        A TestReport. Statistical decisions never raise.

    Raises:

        SingularDesignError: The regression design is singular.
        DegenerateVarianceError: The residual variance is zero.
    """

    options = TestOptions() if options is None else options
    table = load_default_table() if table is None else table

    shifted, record = shift_bound(series)
    metadata = {'seed': options.seed}

    if k == 'auto':
        k = select_lag(shifted, options.k_max, options.criterion)
        metadata['lag_selection'] = {'criterion': options.criterion, 'k_max': options.k_max}
    else:
        metadata['lag_selection'] = None

    fit = ols_fit(build_regressors(shifted, k))
    if not fit.tstats_defined:
        raise DegenerateVarianceError("The residual variance is zero, so t_beta is undefined; "\
                                      "the series follows its regression exactly")

    b0_hat = float(shifted.values[0]) / math.sqrt(len(shifted))
    ratio = 0.0 if options.impose_zero_b0 else b0_hat * fit.phi1_hat / fit.sigma_hat
    if ratio < 0:
        metadata['ratio_clamped'] = True
    ratio = _clamp_ratio(ratio)

    row_values, row_ratio = table.nearest_row(ratio)
    critical_values = dict(zip(VALID_LEVELS, row_values))
    metadata['table_row'] = 'adf' if row_ratio is None else row_ratio
    metadata['impose_zero_b0'] = options.impose_zero_b0
    metadata['ell'] = record.ell

    p_value_sim = None
    if options.simulate_p:
        p_value_sim = simulated_p_value(fit.t_beta, ratio, backend=options.backend,
                                        replications=options.sim_replications, T=options.sim_T,
                                        n=options.limit_grid, seed=options.seed,
                                        workers=options.workers)
        metadata['backend'] = options.backend
        metadata['sim_replications'] = options.sim_replications

    p_value_boot = None
    if options.bootstrap:
        p_value_boot = parametric_bootstrap(fit, shifted, R=options.bootstrap_replications,
                                            T_prime=options.bootstrap_T, seed=options.seed,
                                            workers=options.workers)
        metadata['bootstrap_replications'] = options.bootstrap_replications
        metadata['bootstrap_k_extension'] = fit.k > 1

    return TestReport(
        k=fit.k,
        nobs=fit.nobs,
        t_alpha=fit.t_alpha,
        t_beta=fit.t_beta,
        b0_hat=b0_hat,
        phi1_hat=fit.phi1_hat,
        sigma_hat=fit.sigma_hat,
        ratio=ratio,
        critical_values=critical_values,
        decisions={level: bool(fit.t_beta <= cv) for level, cv in critical_values.items()},
        p_value_table=table_p_value(table, ratio, fit.t_beta),
        lower_bound=series.lower_bound,
        p_value_sim=p_value_sim,
        p_value_boot=p_value_boot,
        metadata=metadata,
    )
