"""
Monte Carlo engine: null tabulation of the critical-value table, size and power experiments, and
t-statistic distributions for the Tobit and linear models.

Every experiment simulates AR(1) paths

    y_t = [alpha + beta*y_{t-1} + u_t]_+    (or without the positive part for the linear model)

and computes t_beta from the regression of y_t on (1, y_{t-1}). Replication i of a run with
master seed s always draws from stream (s, i), so different cells of an experiment share their
innovations (common random numbers) and results do not depend on the number of workers.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import polars as pl

from pytobit.cv_table import CvTable, check_table, load_default_table
from pytobit.model import LocalParams
from pytobit.util.config import (DEFAULT_CHUNK_SIZE, DEFAULT_EXPERIMENT_REPLICATIONS,
                                 DEFAULT_EXPERIMENT_T, DEFAULT_RATIO_GRID, DEFAULT_SEED,
                                 DIST_GRID_MAX, DIST_GRID_MIN, DIST_GRID_POINTS, LEVEL_QUANTILES,
                                 STREAM_FINITE_NULL, VALID_INNOVATION_LAWS, VALID_LEVELS)
from pytobit.util.errors import InvalidInputError
from pytobit.util.input_validation import check_choice
from pytobit.util.kernels import ar1_simulate_tstat
from pytobit.util.parallel import replicate
from pytobit.util.rng import draw_innovations, replication_rng

logger = logging.getLogger(__name__)


VALID_MODELS = ['tobit', 'linear']


@dataclass(frozen=True)
class McConfig:
    """ Size of a Monte Carlo run.

    Attributes:

        replications:
            Number of simulated paths R (>= 1).
        T:
            Path length (>= 10).
        seed:
            Master seed.
        law:
            Innovation law, see pytobit.util.rng.draw_innovations.
        workers:
            Number of processes; results are identical for any value.
        chunk_size:
            Replications per work unit.
    """

    replications: int = DEFAULT_EXPERIMENT_REPLICATIONS
    T: int = DEFAULT_EXPERIMENT_T
    seed: int = DEFAULT_SEED
    law: str = 'normal'
    workers: int = 1
    chunk_size: int = DEFAULT_CHUNK_SIZE

    def __post_init__(self):
        if self.replications < 1:
            raise InvalidInputError(f"replications must be at least 1, received "\
                                    f"{self.replications}")
        if self.T < 10:
            raise InvalidInputError(f"T must be at least 10, received {self.T}")
        check_choice(self.law, VALID_INNOVATION_LAWS, 'law')

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class Ar1Task:
    alpha: float
    beta: float
    y0: float
    censor: bool
    T: int
    seed: int
    law: str
    stream: int = STREAM_FINITE_NULL
    start: int = 0
    stop: int = 0


def _ar1_chunk(task: Ar1Task) -> np.ndarray:
    out = np.empty(task.stop - task.start)
    for row, replication in enumerate(range(task.start, task.stop)):
        rng = replication_rng(task.seed, replication, task.stream)
        u = draw_innovations(rng, task.T, law=task.law)
        out[row] = ar1_simulate_tstat(task.y0, task.alpha, task.beta, u, task.censor)
    return out


def simulate_tstats(config: McConfig, alpha: float = 0.0, beta: float = 1.0, y0: float = 0.0,
                    censor: bool = True, stream: int = STREAM_FINITE_NULL,
                    label: str = 't-statistics') -> np.ndarray:
    """ t_beta for R simulated AR(1) paths of length config.T, in replication order.

    Paths on which t_beta is undefined (e.g. a path stuck at zero) give nan.
    """

    task = Ar1Task(alpha=alpha, beta=beta, y0=y0, censor=censor, T=config.T, seed=config.seed,
                   law=config.law, stream=stream)

    return replicate(_ar1_chunk, task, config.replications, workers=config.workers,
                     chunk_size=config.chunk_size, label=label)


def _finite(draws: np.ndarray, label: str) -> np.ndarray:
    finite = draws[np.isfinite(draws)]
    if finite.size < draws.size:
        logger.warning("%s: %d of %d draws had an undefined t-statistic and were dropped",
                       label, draws.size - finite.size, draws.size)
    if finite.size == 0:
        raise InvalidInputError(f"{label}: every simulated t-statistic was undefined")
    return finite


def lower_quantile(draws: np.ndarray, q: float) -> float:
    """ The order statistic at position ceil(q*R) (1-based) of the R draws. """

    ordered = np.sort(draws)
    index = max(math.ceil(q * ordered.size) - 1, 0)

    return float(ordered[index])


def tabulate_null(config: McConfig, ratios: Sequence[float] = DEFAULT_RATIO_GRID) -> CvTable:
    """ Tabulate null quantiles of t_beta for a grid of nuisance ratios.

    For each ratio r, R paths of y_t = [y_{t-1} + u_t]_+ with y_0 = r*sqrt(T) and unit-variance
    innovations are simulated; the ADF row comes from the linear recursion started at zero. All
    rows share the same innovation draws. Monotonicity violations caused by Monte Carlo noise are
    logged and recorded in the provenance instead of raised.

    Args:

        config:
            Replications, T, seed, innovation law and workers.
        ratios:
            Nonempty, nondecreasing, non-negative grid of b0*phi(1)/sigma values.

    Returns:

        A CvTable whose provenance records the run.
    """

    grid = np.asarray(ratios, dtype=np.float64).reshape(-1)
    if grid.size == 0:
        raise InvalidInputError("The ratio grid is empty")
    if np.any(np.diff(grid) < 0) or np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise InvalidInputError(f"The ratio grid must be finite, non-negative and nondecreasing, "\
                                f"received {list(grid)}")
    grid = np.unique(grid)

    rows = []
    root_T = math.sqrt(config.T)
    for ratio in grid:
        draws = _finite(simulate_tstats(config, y0=ratio * root_T, label=f"ratio {ratio:g}"),
                        f"ratio {ratio:g}")
        rows.append({'ratio': float(ratio),
                     **{f"q{level:02d}": lower_quantile(draws, LEVEL_QUANTILES[level])
                        for level in VALID_LEVELS}})
        logger.info("Tabulated ratio %g: %s", ratio, rows[-1])

    adf_draws = _finite(simulate_tstats(config, censor=False, label='ADF row'), 'ADF row')
    adf_row = tuple(lower_quantile(adf_draws, LEVEL_QUANTILES[level]) for level in VALID_LEVELS)

    provenance = {'T': config.T, 'replications': config.replications, 'seed': config.seed,
                  'law': config.law, 'backend': 'finite'}
    table = CvTable(rows=pl.DataFrame(rows), adf_row=adf_row, provenance=provenance)

    violations = check_table(table, strict=False)
    if violations:
        table.provenance['monotonicity_violations'] = violations

    return table


def size_power_experiment(a_grid: Sequence[float], c_grid: Sequence[float], config: McConfig,
                          table: CvTable | None = None, level: int = 5) -> pl.DataFrame:
    """ Mean t_beta and rejection rates over a grid of local alternatives.

    Each cell (a, c) simulates y_t = [a/sqrt(T) + (1 + c/T)*y_{t-1} + u_t]_+ from y_0 = 0 and
    rejects when t_beta is at or below the critical value, taken from the ratio-0 row of the
    table (Tobit) and from its ADF row (conventional).

    Args:

        a_grid:
            Local drifts a.
        c_grid:
            Local exponents c.
        config:
            Replications, T, seed, law and workers.
        table:
            Source of critical values, defaults to the shipped table.
        level:
            Nominal level in percent, one of [1, 5, 10].

    Returns:

        A polars DataFrame with columns a, c, mean_tstat, reject_tobit, reject_adf, replications.
    """

    if len(a_grid) == 0 or len(c_grid) == 0:
        raise InvalidInputError("Both the a grid and the c grid must be nonempty")
    check_choice(level, VALID_LEVELS, 'level')

    table = load_default_table() if table is None else table
    column = VALID_LEVELS.index(level)
    cv_tobit = table.nearest_row(0.0)[0][column]
    cv_adf = table.adf_row[column]

    rows = []
    root_T = math.sqrt(config.T)
    for a in a_grid:
        for c in c_grid:
            label = f"a={a:g}, c={c:g}"
            draws = _finite(simulate_tstats(config, alpha=a / root_T, beta=1.0 + c / config.T,
                                            label=label), label)
            rows.append({
                'a': float(a),
                'c': float(c),
                'mean_tstat': float(np.mean(draws)),
                'reject_tobit': float(np.mean(draws <= cv_tobit)),
                'reject_adf': float(np.mean(draws <= cv_adf)),
                'replications': int(draws.size),
            })

    return pl.DataFrame(rows)


def distribution_grid() -> np.ndarray:
    return np.linspace(DIST_GRID_MIN, DIST_GRID_MAX, DIST_GRID_POINTS)


def tstat_distribution(config: McConfig, model: str = 'tobit', params: LocalParams | None = None,
                       grid: Sequence[float] | None = None,
                       beta_form: str = 'linear') -> pl.DataFrame:
    """ Empirical CDF and density of t_beta on a fixed grid.

    The paths follow y_t = [a/sqrt(T) + beta*y_{t-1} + u_t]_+ (model='tobit') or the same
    recursion without the positive part (model='linear'), from y_0 = b0*sqrt(T).

    The density is a histogram whose bins are centred on the grid points, with edges halfway
    between neighbours and the outer bins as wide as the inner ones; draws outside all bins only
    enter the CDF.

    Args:

        config:
            Replications, T, seed, law and workers.
        model:
            'tobit' or 'linear'.
        params:
            Local parameters (a, c, b0); params.T must equal config.T. Defaults to the null with
            b0 = 0.
        grid:
            Evaluation points, increasing; defaults to DIST_GRID_POINTS points on
            [DIST_GRID_MIN, DIST_GRID_MAX].
        beta_form:
            'linear' for beta = 1 + c/T, 'exp' for beta = exp(c/T).

    Returns:

        A polars DataFrame with columns x, cdf, cdf_se, pdf.
    """

    check_choice(model, VALID_MODELS, 'model')
    params = LocalParams(T=config.T) if params is None else params
    if params.T != config.T:
        raise InvalidInputError(f"LocalParams.T = {params.T} does not match McConfig.T = "\
                                f"{config.T}")

    x = distribution_grid() if grid is None else np.asarray(grid, dtype=np.float64).reshape(-1)
    if x.size < 2 or np.any(np.diff(x) <= 0):
        raise InvalidInputError("The evaluation grid needs at least two increasing points")

    label = f"{model} distribution"
    draws = simulate_tstats(config, alpha=params.alpha(), beta=params.beta(beta_form),
                            y0=params.y0(), censor=(model == 'tobit'), label=label)
    ordered = np.sort(_finite(draws, label))
    R = ordered.size

    cdf = np.searchsorted(ordered, x, side='right') / R
    cdf_se = np.sqrt(cdf * (1.0 - cdf) / R)

    midpoints = (x[1:] + x[:-1]) / 2.0
    edges = np.concatenate([[x[0] - (x[1] - x[0]) / 2.0], midpoints,
                            [x[-1] + (x[-1] - x[-2]) / 2.0]])
    counts, _ = np.histogram(ordered, bins=edges)
    pdf = counts / (R * np.diff(edges))

    return pl.DataFrame({'x': x, 'cdf': cdf, 'cdf_se': cdf_se, 'pdf': pdf})
