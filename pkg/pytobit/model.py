"""
Main module for the data-generating processes: the censored (dynamic Tobit) autoregression in
ADF form, its uncensored linear counterpart, the limited autoregressive comparison process, and
the shift that moves a lower bound L to zero.

Simulation with a bound L is always carried out on the shifted scale y - L, with intercept
alpha + (beta - 1) L, and shifted back at the end. A run with bound L is therefore exactly
(bit-for-bit) L plus the run of the shifted parameters with bound 0.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from pytobit.util.errors import InvalidInputError, UnstableFilterError
from pytobit.util.input_validation import check_finite, check_lag_order, check_phi
from pytobit.util.kernels import limited_ar_path, tobit_path

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelParams:
    """ Full parameterization of the dynamic Tobit AR(k) in ADF form.

    y_t = max{L, alpha + beta*y_{t-1} + sum_i phi_i*dy_{t-i} + u_t}

    Attributes:

        k:
            Lag order (>= 1).
        alpha:
            Intercept, in level units.
        beta:
            Level coefficient.
        phi:
            The k - 1 difference coefficients.
        sigma:
            Innovation standard deviation (>= 0); informational for simulate_* which take the
            innovations directly.
        lower_bound:
            The censoring point L, defaults to 0.
        init:
            Initial levels y_{-k+1}, ..., y_0, oldest first. Fewer than k values are padded at the
            start with copies of y_0 (flat start).
    """

    k: int = 1
    alpha: float = 0.0
    beta: float = 1.0
    phi: tuple[float, ...] = ()
    sigma: float = 1.0
    lower_bound: float = 0.0
    init: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        check_lag_order(self.k)
        object.__setattr__(self, 'phi', tuple(float(p) for p in check_phi(self.phi, self.k)))
        object.__setattr__(self, 'init', tuple(float(v) for v in np.atleast_1d(self.init)))

        check_finite(np.array([self.alpha, self.beta, self.sigma, self.lower_bound]),
                     'alpha, beta, sigma, lower_bound')
        if self.sigma < 0:
            raise InvalidInputError(f"sigma must be non-negative, received {self.sigma}")
        if not 1 <= len(self.init) <= self.k:
            raise InvalidInputError(f"A lag order of {self.k} takes between 1 and {self.k} "\
                                    f"initial levels, received {len(self.init)}")
        check_finite(np.array(self.init), 'init')
        if min(self.init) < self.lower_bound:
            raise InvalidInputError(f"Initial levels {list(self.init)} fall below the lower "\
                                    f"bound {self.lower_bound}")

    @property
    def flat_start(self) -> bool:
        """ True when some pre-sample levels were filled in with y_0. """
        return len(self.init) < self.k

    def initial_levels(self) -> np.ndarray:
        """ The k initial levels, oldest first, with a flat start where values are missing. """
        levels = np.full(self.k, self.init[-1], dtype=np.float64)
        levels[self.k - len(self.init):] = self.init
        return levels

    def shifted(self) -> 'ModelParams':
        """ The equivalent parameterization of y - L, which is censored at zero. """
        return dataclasses.replace(
            self,
            alpha=self.alpha + (self.beta - 1.0) * self.lower_bound,
            init=tuple(float(v) for v in self.initial_levels() - self.lower_bound),
            lower_bound=0.0,
        )

    def phi1(self) -> float:
        """ phi(1) = 1 - sum(phi). """
        return 1.0 - float(sum(self.phi))


@dataclass(frozen=True)
class LocalParams:
    """ Local-to-unity parameters: alpha = a/sqrt(T), beta = exp(c/T), y_0 = b0*sqrt(T) + L. """

    a: float = 0.0
    c: float = 0.0
    b0: float = 0.0
    T: int = 1000

    def __post_init__(self):
        if self.b0 < 0:
            raise InvalidInputError(f"b0 must be non-negative, received {self.b0}")
        if self.T < 1:
            raise InvalidInputError(f"T must be at least 1, received {self.T}")

    def alpha(self) -> float:
        return self.a / math.sqrt(self.T)

    def beta(self, beta_form: str = 'exp') -> float:
        """ exp(c/T) for beta_form='exp', 1 + c/T for beta_form='linear'. """
        if beta_form == 'exp':
            return math.exp(self.c / self.T)
        if beta_form == 'linear':
            return 1.0 + self.c / self.T
        raise InvalidInputError(f"Invalid beta_form '{beta_form}'. Valid inputs are "\
                                "['exp', 'linear']")

    def y0(self, lower_bound: float = 0.0) -> float:
        return self.b0 * math.sqrt(self.T) + lower_bound

    def to_model_params(self, k: int = 1, phi: Sequence[float] = (), sigma: float = 1.0,
                        lower_bound: float = 0.0, beta_form: str = 'exp') -> ModelParams:
        """ Build the ModelParams this local parameterization implies, with a flat start. """
        return ModelParams(k=k, alpha=self.alpha(), beta=self.beta(beta_form), phi=tuple(phi),
                           sigma=sigma, lower_bound=lower_bound,
                           init=(self.y0(lower_bound),) * k)


@dataclass(frozen=True, eq=False)
class Series:
    """ An observed series with optional ISO dates and a declared lower bound. """

    values: np.ndarray
    dates: tuple[str, ...] | None = None
    lower_bound: float = 0.0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.size == 0:
            raise InvalidInputError("A series needs at least one value")
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)

        if self.dates is not None:
            dates = tuple(str(d) for d in self.dates)
            if len(dates) != values.size:
                raise InvalidInputError(f"Series has {values.size} values but {len(dates)} "\
                                        "dates")
            object.__setattr__(self, 'dates', dates)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True, eq=False)
class SimOutput:
    """ Result of a Tobit simulation: levels, negative parts and the innovations used. """

    y: np.ndarray
    y_minus: np.ndarray
    innovations: np.ndarray
    flat_start: bool = False


@dataclass(frozen=True)
class ShiftRecord:
    """ What shift_bound removed, and how local parameters map onto the shifted series.

    With ell = L / sqrt(T): a_tilde = a + c*ell and b0_tilde = b0 - ell.
    """

    lower_bound: float
    T: int
    ell: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'ell', self.lower_bound / math.sqrt(self.T))

    def drift(self, a: float, c: float) -> float:
        return a + c * self.ell

    def initial(self, b0: float) -> float:
        return b0 - self.ell


def _innovation_array(innovations: Sequence[float]) -> np.ndarray:
    u = np.asarray(innovations, dtype=np.float64).reshape(-1)
    if u.size < 1:
        raise InvalidInputError("At least one innovation is needed")
    check_finite(u, 'innovations')
    return u


def simulate_tobit(params: ModelParams, innovations: Sequence[float]) -> SimOutput:
    """ Simulate the dynamic Tobit model by exact recursion.

    y_t = max{L, alpha + beta*y_{t-1} + sum_{i=1}^{k-1} phi_i*dy_{t-i} + u_t}, t = 1..T, where
    the pre-sample differences come from params.init. y_minus holds the negative part of the
    argument on the shifted scale, i.e. what y_t - L would have been below zero.

    Args:

        params:
            The model parameters.
        innovations:
            u_1..u_T.

    Returns:

        A SimOutput with y and y_minus of length T.

    Raises:

        InvalidInputError: Empty or non-finite innovations.
    """

    u = _innovation_array(innovations)
    zero_bound = params.shifted()
    y, y_minus = tobit_path(zero_bound.alpha, zero_bound.beta,
                            np.asarray(zero_bound.phi, dtype=np.float64),
                            zero_bound.initial_levels(), u, True)

    if params.flat_start:
        logger.debug("Pre-sample levels padded with y_0 (flat start)")

    return SimOutput(y=y + params.lower_bound, y_minus=y_minus, innovations=u,
                     flat_start=params.flat_start)


def simulate_linear_ar(params: ModelParams, innovations: Sequence[float]) -> np.ndarray:
    """ The same recursion as simulate_tobit, without the max. Returns y_1..y_T. """

    u = _innovation_array(innovations)
    zero_bound = params.shifted()
    y, _ = tobit_path(zero_bound.alpha, zero_bound.beta,
                      np.asarray(zero_bound.phi, dtype=np.float64),
                      zero_bound.initial_levels(), u, False)

    return y + params.lower_bound


def simulate_limited_ar(phi: Sequence[float], c: float, T: int,
                        innovations: Sequence[float]) -> np.ndarray:
    """ Limited autoregressive process censored at zero, for model-contrast experiments.

    eps_t solves phi(L) eps_t = u_t from a zero pre-sample, and
    x_t = [x_{t-1}(1 + c/T) + eps_t]_+ from x_0 = 0. With no phi and c = 0 this coincides with the
    Tobit AR(1) with alpha = 0, beta = 1.

    Raises:

        UnstableFilterError: sum(|phi_i|) >= 1.
        InvalidInputError: len(innovations) != T.
    """

    phi_arr = np.asarray(phi, dtype=np.float64).reshape(-1)
    check_finite(phi_arr, 'phi')
    if np.sum(np.abs(phi_arr)) >= 1.0:
        raise UnstableFilterError(f"The filter phi(L) with phi = {list(phi_arr)} has "\
                                  "sum(|phi_i|) >= 1; only absolutely summable filters with "\
                                  "sum(|phi_i|) < 1 are accepted")

    u = _innovation_array(innovations)
    if T < 1 or u.size != T:
        raise InvalidInputError(f"Expected T = {T} innovations, received {u.size}")

    return limited_ar_path(phi_arr, 1.0 + c / T, u)


def shift_bound(series: Series) -> tuple[Series, ShiftRecord]:
    """ Subtract the declared lower bound so the series is censored at zero.

    Args:

        series:
            The observed series, with lower_bound L.

    Returns:

        The series y - L (declared bound 0) and the ShiftRecord for mapping local parameters.

    Raises:

        InvalidInputError: The bound is not finite.
    """

    check_finite(np.array([series.lower_bound]), 'lower_bound')

    shifted = Series(values=series.values - series.lower_bound, dates=series.dates,
                     lower_bound=0.0)

    return shifted, ShiftRecord(lower_bound=series.lower_bound, T=len(series))
