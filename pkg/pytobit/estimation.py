"""
OLS estimation of the Tobit regression in ADF form,

    y_t = alpha + beta*y_{t-1} + sum_{i=1}^{k-1} phi_i*dy_{t-i} + u_t,

run as if y_t were not censored. Includes the t-statistics for alpha = 0 and beta = 1, the
Frisch-Waugh-Lovell self-test for k = 1, and information-criterion lag selection on a common
sample.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import polars as pl
from scipy import linalg

from pytobit.model import Series
from pytobit.util.config import (EXACT_FIT_TOLERANCE, GRAM_CONDITION_THRESHOLD,
                                 QR_RANK_TOLERANCE, VALID_CRITERIA)
from pytobit.util.errors import InvalidInputError, SingularDesignError
from pytobit.util.input_validation import check_choice, check_finite, check_lag_order

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Regressors:
    """ Aligned design for the ADF regression.

    Row j corresponds to t = start + j (0-indexed into the series) and holds
    x_t = (1, y_{t-1}, dy_{t-1}, ..., dy_{t-k+1}); response[j] = y_t.
    """

    design: np.ndarray
    response: np.ndarray
    k: int
    start: int

    @property
    def nobs(self) -> int:
        return int(self.response.size)

    @property
    def lagged_level(self) -> np.ndarray:
        return self.design[:, 1]


@dataclass(frozen=True, eq=False)
class OlsFit:
    """ OLS estimates and the quantities the unit-root test needs.

    sigma2_hat divides the residual sum of squares by the number of observations. When the fit
    is exact (sigma2_hat = 0) the t-statistics are nan and tstats_defined is False.
    """

    alpha_hat: float
    beta_hat: float
    phi_hat: tuple[float, ...]
    residuals: np.ndarray
    sigma2_hat: float
    gram: np.ndarray
    gram_inverse_diag: np.ndarray
    t_alpha: float
    t_beta: float
    phi1_hat: float
    nobs: int
    k: int
    solver: str
    tstats_defined: bool = True

    @property
    def sigma_hat(self) -> float:
        return math.sqrt(self.sigma2_hat)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.alpha_hat, self.beta_hat, *self.phi_hat])

    def to_dict(self) -> dict:
        return {
            'k': self.k,
            'nobs': self.nobs,
            'alpha_hat': self.alpha_hat,
            'beta_hat': self.beta_hat,
            'phi_hat': list(self.phi_hat),
            'phi1_hat': self.phi1_hat,
            'sigma2_hat': self.sigma2_hat,
            't_alpha': _json_float(self.t_alpha),
            't_beta': _json_float(self.t_beta),
            'tstats_defined': self.tstats_defined,
            'gram_inverse_diag': [float(v) for v in self.gram_inverse_diag],
            'solver': self.solver,
        }


def _json_float(value: float) -> float | None:
    return float(value) if math.isfinite(value) else None


def build_regressors(series: Series, k: int, start: int | None = None) -> Regressors:
    """ Build the ADF design for lag order k.

    Args:

        series:
            The (bound-shifted) series.
        k:
            Lag order, at least 1.
        start:
            First 0-indexed t used as a response, defaults to k. select_lag passes k_max so
            that every candidate uses the same sample.

    Returns:

        Regressors with len(series) - start rows.

    Raises:

        InvalidInputError: The series is too short for k, start < k, or values are not finite.
    """

    check_lag_order(k)
    y = np.asarray(series.values, dtype=np.float64)
    check_finite(y, 'series values')

    start = k if start is None else int(start)
    if start < k:
        raise InvalidInputError(f"start = {start} leaves no room for {k} lags")
    if y.size < max(k + 2, start + 1):
        raise InvalidInputError(f"A series of length {y.size} is too short for lag order {k}; "\
                                f"at least {max(k + 2, start + 1)} observations are needed")

    t = np.arange(start, y.size)
    dy = np.diff(y, prepend=np.nan)

    columns = [np.ones(t.size), y[t - 1]]
    for i in range(1, k):
        columns.append(dy[t - i])

    return Regressors(design=np.column_stack(columns), response=y[t].copy(), k=k, start=start)


def _solve_cholesky(gram: np.ndarray, moment: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    try:
        factor = linalg.cho_factor(gram)
    except linalg.LinAlgError:
        return None
    coefficients = linalg.cho_solve(factor, moment)
    inverse = linalg.cho_solve(factor, np.eye(gram.shape[0]))
    return coefficients, inverse


def _solve_qr(design: np.ndarray, response: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q, r = linalg.qr(design, mode='economic')
    diag = np.abs(np.diag(r))
    if diag.size == 0 or np.min(diag) <= QR_RANK_TOLERANCE * np.max(diag):
        raise SingularDesignError("The regressor matrix is rank deficient; the series may be "\
                                  "constant or too short for the lag order")
    coefficients = linalg.solve_triangular(r, q.T @ response)
    r_inverse = linalg.solve_triangular(r, np.eye(r.shape[0]))
    return coefficients, r_inverse @ r_inverse.T


def ols_fit(reg: Regressors) -> OlsFit:
    """ Solve the normal equations of the ADF regression.

    The Gram matrix M = X'X is factored by Cholesky when its condition number is at most
    GRAM_CONDITION_THRESHOLD, otherwise the design is solved by QR with a rank check.

    Args:

        reg:
            The regression design.

    Returns:

        OlsFit with t_alpha = alpha_hat / se and t_beta = (beta_hat - 1) / se.

    Raises:

        SingularDesignError: The design is rank deficient.
    """

    X, y = reg.design, reg.response
    if reg.nobs < X.shape[1]:
        raise SingularDesignError(f"{reg.nobs} observations cannot identify {X.shape[1]} "\
                                  "coefficients")

    gram = X.T @ X
    with np.errstate(all='ignore'):
        condition = float(np.linalg.cond(gram))

    solved = None
    solver = 'cholesky'
    if np.isfinite(condition) and condition <= GRAM_CONDITION_THRESHOLD:
        solved = _solve_cholesky(gram, X.T @ y)
    if solved is None:
        logger.debug("Gram condition number %.3g, falling back to QR", condition)
        solver = 'qr'
        solved = _solve_qr(X, y)
    coefficients, gram_inverse = solved

    residuals = y - X @ coefficients
    sigma2_hat = float(residuals @ residuals) / reg.nobs
    scale = max(float(np.max(np.abs(y))), 1.0)

    tstats_defined = math.sqrt(sigma2_hat) > EXACT_FIT_TOLERANCE * scale
    inverse_diag = np.diag(gram_inverse).copy()
    if tstats_defined:
        t_alpha = coefficients[0] / math.sqrt(sigma2_hat * inverse_diag[0])
        t_beta = (coefficients[1] - 1.0) / math.sqrt(sigma2_hat * inverse_diag[1])
    else:
        logger.warning("Exact fit: residual variance is zero and t-statistics are undefined")
        sigma2_hat = 0.0
        t_alpha = t_beta = math.nan

    phi_hat = tuple(float(p) for p in coefficients[2:])

    return OlsFit(
        alpha_hat=float(coefficients[0]),
        beta_hat=float(coefficients[1]),
        phi_hat=phi_hat,
        residuals=residuals,
        sigma2_hat=sigma2_hat,
        gram=gram,
        gram_inverse_diag=inverse_diag,
        t_alpha=float(t_alpha),
        t_beta=float(t_beta),
        phi1_hat=1.0 - float(sum(phi_hat)),
        nobs=reg.nobs,
        k=reg.k,
        solver=solver,
        tstats_defined=tstats_defined,
    )


def fwl_check(reg: Regressors, fit: OlsFit) -> float:
    """ |beta_hat - 1 - FWL expression| for k = 1.

    With y^mu = y - mean of the lagged levels,
    beta_hat - 1 = [(y^mu_T)^2 - (y^mu_0)^2 - sum (dy_t)^2] / [2 sum (y^mu_{t-1})^2].

    Raises:

        InvalidInputError: k != 1.
    """

    if reg.k != 1:
        raise InvalidInputError(f"The FWL identity is stated for k = 1, received k = {reg.k}")

    lagged = reg.lagged_level
    mean = float(np.mean(lagged))
    centred = lagged - mean
    dy = reg.response - lagged

    numerator = (reg.response[-1] - mean) ** 2 - centred[0] ** 2 - float(dy @ dy)
    expression = numerator / (2.0 * float(centred @ centred))

    return abs(expression - (fit.beta_hat - 1.0))


def information_criteria(series: Series, k_max: int) -> pl.DataFrame:
    """ AIC and BIC for k = 1..k_max on a common sample.

    criterion = T_eff * log(sigma2_hat) + penalty * (k + 1), penalty 2 (AIC) or log(T_eff) (BIC).
    The common sample starts at t = k_max. Candidates too long for the series (fewer than k + 2
    rows after 2k observations) are skipped with a warning, and the common sample then starts at
    the largest remaining k. Candidates with a singular design are skipped with a warning.

    Returns:

        A polars DataFrame with columns k, nobs, sigma2, aic, bic.

    Raises:

        InvalidInputError: The series is too short for every candidate, or is not finite.
    """

    check_lag_order(k_max)
    size = len(series)
    usable = min(k_max, (size - 2) // 2)
    if usable < 1:
        raise InvalidInputError(f"A series of length {size} is too short for any lag order; "\
                                "at least 4 observations are needed")
    if usable < k_max:
        logger.warning("Lag orders %d to %d skipped: too long for a series of length %d",
                       usable + 1, k_max, size)

    rows = []
    for k in range(1, usable + 1):
        reg = build_regressors(series, k, start=usable)
        try:
            fit = ols_fit(reg)
        except SingularDesignError as err:
            logger.warning("Lag order %d skipped: %s", k, err)
            continue

        with np.errstate(divide='ignore'):
            log_likelihood_term = reg.nobs * np.log(fit.sigma2_hat)
        rows.append({
            'k': k,
            'nobs': reg.nobs,
            'sigma2': fit.sigma2_hat,
            'aic': float(log_likelihood_term + 2.0 * (k + 1)),
            'bic': float(log_likelihood_term + math.log(reg.nobs) * (k + 1)),
        })

    return pl.DataFrame(rows, schema={'k': pl.Int64, 'nobs': pl.Int64, 'sigma2': pl.Float64,
                                      'aic': pl.Float64, 'bic': pl.Float64})


def select_lag(series: Series, k_max: int, criterion: str = 'bic') -> int:
    """ The lag order minimizing AIC or BIC, ties going to the smaller k.

    Args:

        series:
            The (bound-shifted) series.
        k_max:
            Largest candidate lag order.
        criterion:
            'aic' or 'bic'.

    Returns:

        The selected k.

    Raises:

        InvalidInputError: The series is too short for any lag order.
        SingularDesignError: Every candidate was singular.
    """

    check_choice(criterion, VALID_CRITERIA, 'criterion')
    table = information_criteria(series, k_max)
    if table.height == 0:
        raise SingularDesignError(f"Every lag order from 1 to {k_max} gave a singular design")

    selected = int(table['k'][table[criterion].arg_min()])
    logger.info("%s selected k = %d out of %d candidates", criterion.upper(), selected,
                table.height)

    return selected
