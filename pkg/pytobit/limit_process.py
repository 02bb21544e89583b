"""
Discretized limit processes of the local-to-unity dynamic Tobit and their functionals.

K is a drifted, exponentially discounted Gaussian integral started at b0; J is K regulated at zero
and rescaled by e^{cr}; Y = J / phi(1) is the limit of T^{-1/2} y_{[rT]} in the AR(k) model. All
three live on the uniform grid r = j/n, j = 0..n, and are built by an Euler scheme with left-point
Ito sums. The same standard normal increments drive K and the stochastic integral in the t-ratio
functional.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from pytobit.util.config import DEFAULT_LIMIT_GRID, DEFAULT_SEED, STREAM_LIMIT_DRAWS
from pytobit.util.errors import InvalidInputError
from pytobit.util.parallel import replicate
from pytobit.util.rng import replication_rng

logger = logging.getLogger(__name__)

# Minimum grid size for the t-ratio functional
MIN_TSTAT_GRID = 100

# Relative size of the Gram determinant below which a draw is rejected as degenerate
DEGENERATE_GRAM_TOLERANCE = 1e-12

# Safety valve on consecutive degenerate draws
MAX_RESAMPLES = 1000


@dataclass(frozen=True)
class Theta:
    """ Parameters (a, b0, c) of K and the diffusion scale sigma. """

    a: float = 0.0
    b0: float = 0.0
    c: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.b0 < 0:
            raise InvalidInputError(f"b0 must be non-negative, received {self.b0}")
        if not self.sigma > 0:
            raise InvalidInputError(f"sigma must be positive, received {self.sigma}")

    def phi_scaled(self, phi1: float) -> 'Theta':
        """ theta_phi = (a, phi(1)*b0, c/phi(1)), the parameters of the AR(k) limit. """
        check_phi1(phi1)
        return Theta(a=self.a, b0=phi1 * self.b0, c=self.c / phi1, sigma=self.sigma)


@dataclass(frozen=True, eq=False)
class GridPath:
    """ A path sampled at r = j/n, j = 0..n. """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if values.size < 2:
            raise InvalidInputError("A grid path needs at least two points")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("Grid path values must be finite")
        object.__setattr__(self, 'values', values)

    @property
    def n(self) -> int:
        return self.values.size - 1


@dataclass(frozen=True)
class LimitFunctionals:
    """ Discretized functionals of Y entering the limit of (alpha_hat, beta_hat) and t_beta. """

    int_y: float
    int_y2: float
    int_y_dw: float
    beta_limit: float
    t_beta: float


def check_phi1(phi1: float) -> bool:
    if not phi1 > 0:
        raise InvalidInputError(f"phi(1) must be positive, received {phi1}")
    return True


def _draw_increments(n: int, rng: np.random.Generator | None,
                     increments: np.ndarray | None) -> np.ndarray:
    if increments is not None:
        xi = np.asarray(increments, dtype=np.float64).reshape(-1)
        if xi.size != n:
            raise InvalidInputError(f"Expected {n} increments, received {xi.size}")
        return xi
    if rng is None:
        rng = replication_rng(DEFAULT_SEED, 0, STREAM_LIMIT_DRAWS)
    return rng.standard_normal(n)


def _k_values(theta: Theta, xi: np.ndarray) -> np.ndarray:
    n = xi.shape[-1]
    discount = np.exp(-theta.c * np.arange(1, n + 1) / n)
    values = np.empty(xi.shape[:-1] + (n + 1,))
    values[..., 0] = theta.b0
    values[..., 1:] = (theta.b0
                       + theta.a / n * np.cumsum(discount)
                       + theta.sigma / math.sqrt(n) * np.cumsum(discount * xi, axis=-1))
    return values


def _regulated_values(k_values: np.ndarray, c: float) -> np.ndarray:
    n = k_values.shape[-1] - 1
    running_sup = np.maximum.accumulate(np.maximum(-k_values, 0.0), axis=-1)
    return np.exp(c * np.arange(n + 1) / n) * (k_values + running_sup)


def simulate_K(theta: Theta, n: int = DEFAULT_LIMIT_GRID, rng: np.random.Generator | None = None,
               increments: np.ndarray | None = None) -> GridPath:
    """ Euler-Ito discretization of K(r) = b0 + a int_0^r e^{-cs} ds + sigma int_0^r e^{-cs} dW.

    K_j = b0 + a/n sum_{s<=j} e^{-cs/n} + sigma/sqrt(n) sum_{s<=j} e^{-cs/n} xi_s, K_0 = b0.

    Args:

        theta:
            Parameters of K.
        n:
            Number of grid steps, defaults to DEFAULT_LIMIT_GRID.
        rng:
            Generator for the increments xi_1..xi_n.
        increments:
            Explicit increments xi_1..xi_n; takes precedence over rng.

    Returns:

        The path K_0..K_n.
    """

    if n < 1:
        raise InvalidInputError(f"n must be at least 1, received {n}")

    return GridPath(_k_values(theta, _draw_increments(n, rng, increments)))


def regulate(path: GridPath, c: float) -> GridPath:
    """ J_j = e^{c j/n} (K_j + max_{i<=j} [-K_i]_+), which is non-negative everywhere. """

    return GridPath(_regulated_values(path.values, c))


def simulate_Y(theta_phi: Theta, phi1: float, n: int = DEFAULT_LIMIT_GRID,
               rng: np.random.Generator | None = None,
               increments: np.ndarray | None = None) -> GridPath:
    """ Y = J_{theta_phi} / phi(1), the limit of T^{-1/2} y_{[rT]} in the AR(k) model.

    theta_phi already carries phi(1)*b0 and c/phi(1) (see Theta.phi_scaled).

    Raises:

        InvalidInputError: phi(1) <= 0.
    """

    check_phi1(phi1)
    k_path = simulate_K(theta_phi, n, rng=rng, increments=increments)

    return GridPath(regulate(k_path, theta_phi.c).values / phi1)


def limit_functionals(y_path: GridPath, increments: np.ndarray, theta_phi: Theta,
                      phi1: float) -> LimitFunctionals | None:
    """ Assemble the limit of T(beta_hat - 1) and of t_beta from a Y path.

    Integrals use left-point sums; the stochastic integral uses the increments that built the
    path. Returns None when the Gram matrix is degenerate (Y constant on the grid).
    """

    values = y_path.values
    n = y_path.n
    left = values[:-1]
    int_y = float(np.mean(left))
    int_y2 = float(np.mean(left * left))
    int_y_dw = float(np.dot(left, increments) / math.sqrt(n))

    det = int_y2 - int_y * int_y
    if det <= DEGENERATE_GRAM_TOLERANCE * max(int_y2, 1.0):
        return None

    u1 = phi1 * (values[-1] - values[0] - theta_phi.c * int_y) - theta_phi.a
    u2 = theta_phi.sigma * int_y_dw
    beta_limit = (u2 - int_y * u1) / det
    t_beta = beta_limit * math.sqrt(det) / theta_phi.sigma

    return LimitFunctionals(int_y=int_y, int_y2=int_y2, int_y_dw=int_y_dw,
                            beta_limit=beta_limit, t_beta=t_beta)


def limit_beta_alternative(path: GridPath, sigma: float, c: float) -> float:
    """ Partial-summation form of the limit of T(beta_hat - 1) for k = 1.

    [J^mu(1)^2 - J^mu(0)^2 - sigma^2] / (2 int (J^mu)^2) - c, with J^mu = J - int J.
    """

    values = path.values
    centred = values - np.mean(values[:-1])
    denominator = 2.0 * float(np.mean(centred[:-1] ** 2))

    return (centred[-1] ** 2 - centred[0] ** 2 - sigma ** 2) / denominator - c


def _limit_draw(theta_phi: Theta, phi1: float, n: int,
                rng: np.random.Generator) -> tuple[float, int]:
    for rejected in range(MAX_RESAMPLES):
        xi = rng.standard_normal(n)
        y_path = GridPath(_regulated_values(_k_values(theta_phi, xi), theta_phi.c) / phi1)
        functionals = limit_functionals(y_path, xi, theta_phi, phi1)
        if functionals is not None:
            return functionals.t_beta, rejected
    raise InvalidInputError(f"{MAX_RESAMPLES} consecutive degenerate draws for {theta_phi}")


def limit_tstat_draw(theta_phi: Theta, phi1: float, n: int = DEFAULT_LIMIT_GRID,
                     rng: np.random.Generator | None = None) -> float:
    """ One draw from the limiting distribution of t_beta.

    Degenerate draws (constant Y on the grid) are discarded and redrawn from the same generator;
    the number discarded is logged at DEBUG.

    Args:

        theta_phi:
            (a, phi(1)*b0, c/phi(1), sigma).
        phi1:
            phi(1) > 0.
        n:
            Grid steps (>= 100), defaults to DEFAULT_LIMIT_GRID.
        rng:
            Generator owning this draw.

    Returns:

        The draw.
    """

    check_phi1(phi1)
    if n < MIN_TSTAT_GRID:
        raise InvalidInputError(f"n must be at least {MIN_TSTAT_GRID}, received {n}")
    if rng is None:
        rng = replication_rng(DEFAULT_SEED, 0, STREAM_LIMIT_DRAWS)

    value, rejected = _limit_draw(theta_phi, phi1, n, rng)
    if rejected:
        logger.debug("Discarded %d degenerate limit draws", rejected)

    return value


@dataclass(frozen=True)
class LimitTask:
    theta_phi: Theta
    phi1: float
    n: int
    seed: int
    start: int = 0
    stop: int = 0


def _limit_chunk(task: LimitTask) -> np.ndarray:
    out = np.empty((task.stop - task.start, 2))
    for row, replication in enumerate(range(task.start, task.stop)):
        rng = replication_rng(task.seed, replication, STREAM_LIMIT_DRAWS)
        out[row] = _limit_draw(task.theta_phi, task.phi1, task.n, rng)
    return out


def limit_tstat_draws(theta_phi: Theta, phi1: float, replications: int,
                      n: int = DEFAULT_LIMIT_GRID, seed: int = DEFAULT_SEED,
                      workers: int = 1) -> np.ndarray:
    """ Many independent limit draws, replication i using stream (seed, i).

    Returns:

        An array of `replications` draws, identical for any number of workers.
    """

    check_phi1(phi1)
    if n < MIN_TSTAT_GRID:
        raise InvalidInputError(f"n must be at least {MIN_TSTAT_GRID}, received {n}")

    task = LimitTask(theta_phi=theta_phi, phi1=phi1, n=n, seed=seed)
    result = replicate(_limit_chunk, task, replications, workers=workers, label='limit draws')

    rejected = int(result[:, 1].sum())
    if rejected:
        logger.info("Discarded %d degenerate limit draws out of %d", rejected, replications)

    return result[:, 0]
