"""
Stability of the switching difference dynamics.

When y_{t-1} > 0 the lagged differences evolve through F_1, and when the bound binds through F_0,
so {dy_t} is stochastically bounded if the joint spectral radius (JSR) of {F_0, F_1} is below one.
This module builds the pair, brackets its JSR by branch-and-bound over matrix products, and runs
a simulation probe for explosive trajectories.
"""

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from pytobit.model import ModelParams, simulate_tobit
from pytobit.util.config import (DEFAULT_EXPLOSION_REPLICATIONS, DEFAULT_EXPLOSION_T,
                                 DEFAULT_JSR_DEPTH, DEFAULT_JSR_TOLERANCE, DEFAULT_SEED,
                                 EXPLOSION_GROWTH_THRESHOLD, EXPLOSION_SHARE_THRESHOLD,
                                 MAX_JSR_PRODUCTS, STREAM_EXPLOSION_PROBE)
from pytobit.util.errors import InvalidInputError
from pytobit.util.input_validation import check_finite
from pytobit.util.rng import draw_innovations, replication_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CompanionPair:
    """ The matrices F_0 and F_1 governing the lagged differences.

    Attributes:

        F0:
            Companion matrix when the bound binds (delta = 0).
        F1:
            Companion matrix when it does not (delta = 1).
        phi:
            The difference coefficients the pair was built from, or None for an arbitrary pair.
            Only a pair that carries phi gets the sum(|phi_i|) cap on its upper bound.
    """

    F0: np.ndarray
    F1: np.ndarray
    phi: tuple[float, ...] | None = None

    def __post_init__(self):
        F0 = np.asarray(self.F0, dtype=np.float64)
        F1 = np.asarray(self.F1, dtype=np.float64)
        if F0.ndim != 2 or F0.shape[0] != F0.shape[1] or F0.shape != F1.shape:
            raise InvalidInputError(f"F0 and F1 must be square matrices of the same shape, "\
                                    f"received {F0.shape} and {F1.shape}")
        object.__setattr__(self, 'F0', F0)
        object.__setattr__(self, 'F1', F1)

    @property
    def dim(self) -> int:
        return self.F0.shape[0]

    def scaled(self, s: float) -> 'CompanionPair':
        """ The pair (s*F0, s*F1), which no longer carries phi. """
        return CompanionPair(F0=s * self.F0, F1=s * self.F1)


@dataclass(frozen=True)
class JsrCertificate:
    """ Bracket lower <= JSR <= upper and how it was obtained. """

    lower: float
    upper: float
    depth: int
    conclusive: bool
    products: int = 0
    notes: tuple[str, ...] = ()

    @property
    def satisfies_assumption(self) -> bool:
        """ The JSR is certified below one. """
        return self.upper < 1.0

    @property
    def violates_assumption(self) -> bool:
        """ The JSR is certified at or above one. """
        return self.lower >= 1.0


@dataclass(frozen=True, eq=False)
class ExplosionDiagnostics:
    """ Outcome of explosion_probe.

    growth_ratios holds, per replication, max|dy| over the second half of the sample divided by
    max|dy| over the first half; non-finite trajectories get an infinite ratio.
    """

    T: int
    replications: int
    growth_threshold: float
    share_threshold: float
    growth_ratios: np.ndarray
    max_abs_dy_quantiles: dict[float, float]
    explosive_share: float
    median_growth_ratio: float
    explosive: bool
    notes: tuple[str, ...] = field(default=())

    @property
    def classification(self) -> str:
        return 'explosive' if self.explosive else 'bounded'


def companion_pair(phi: Sequence[float]) -> CompanionPair:
    """ Build {F_0, F_1} from the k - 1 difference coefficients.

    F_delta has first row (phi_1*delta, phi_2, ..., phi_{k-1}), second row delta*e_1 and an
    identity on the subdiagonal below that. With k = 1 both matrices are 0 x 0.

    Args:

        phi:
            The difference coefficients phi_1..phi_{k-1}.

    Returns:

        The CompanionPair, carrying phi.
    """

    phi_arr = np.asarray(phi, dtype=np.float64).reshape(-1)
    check_finite(phi_arr, 'phi')
    m = phi_arr.size

    F1 = np.zeros((m, m))
    if m:
        F1[0, :] = phi_arr
        F1[1:, :-1] = np.eye(m - 1)
    F0 = F1.copy()
    if m:
        F0[0, 0] = 0.0
    if m > 1:
        F0[1, 0] = 0.0

    return CompanionPair(F0=F0, F1=F1, phi=tuple(float(p) for p in phi_arr))


def sufficient_condition(phi: Sequence[float]) -> bool:
    """ sum(|phi_i|) < 1, which guarantees JSR({F_0, F_1}) < 1. """

    return float(np.sum(np.abs(np.asarray(phi, dtype=np.float64)))) < 1.0


def _spectral_radii(products: np.ndarray) -> np.ndarray:
    return np.max(np.abs(np.linalg.eigvals(products)), axis=-1)


def _inf_norms(products: np.ndarray) -> np.ndarray:
    return np.max(np.sum(np.abs(products), axis=-1), axis=-1)


def jsr_bounds(pair: CompanionPair, depth: int = DEFAULT_JSR_DEPTH,
               tol: float = DEFAULT_JSR_TOLERANCE) -> JsrCertificate:
    """ Bracket the joint spectral radius of a CompanionPair by branch-and-bound.

    Products are grown one factor at a time up to `depth`. The lower bound is the largest
    rho(M)^{1/n} over every product M of length n explored. A product whose induced max-norm
    satisfies ||M||^{1/n} <= lower is pruned; at each depth the surviving products give the
    upper bound max(lower, max ||M||^{1/n}), and upper is the smallest of these over depths.
    When the pair carries phi with sum(|phi_i|) = Phi < 1, upper is also capped at
    Phi^{1/(k-1)}.

    Args:

        pair:
            The matrices to bound.
        depth:
            Maximum product length, at least 1.
        tol:
            Target gap relative to upper; the search stops once upper - lower <= tol * upper.

    Returns:

        A JsrCertificate. It is inconclusive when depth or the product cap is exhausted with
        the gap still above tol.
    """

    if depth < 1:
        raise InvalidInputError(f"depth must be at least 1, received {depth}")
    if tol < 0:
        raise InvalidInputError(f"tol must be non-negative, received {tol}")

    if pair.dim == 0:
        return JsrCertificate(lower=0.0, upper=0.0, depth=0, conclusive=True,
                              notes=('k = 1: no difference dynamics, JSR is 0',))

    notes = []
    cap = None
    if pair.phi is not None and sufficient_condition(pair.phi):
        cap = float(np.sum(np.abs(pair.phi))) ** (1.0 / pair.dim)
        notes.append(f"upper capped at sum(|phi|)^(1/{pair.dim}) = {cap:.6g}")

    generators = np.stack([pair.F0, pair.F1])
    lower = 0.0
    upper = np.inf if cap is None else cap
    products = generators
    explored = 0
    reached = 0

    for length in range(1, depth + 1):
        reached = length
        explored += products.shape[0]
        lower = max(lower, float(np.max(_spectral_radii(products))) ** (1.0 / length))

        norms = _inf_norms(products) ** (1.0 / length)
        survivors = products[norms > lower]
        if survivors.shape[0] == 0:
            upper = min(upper, lower)
            notes.append(f"every product pruned at length {length}")
            break

        upper = min(upper, max(lower, float(np.max(norms[norms > lower]))))
        if upper - lower <= tol * upper:
            break

        if 2 * survivors.shape[0] > MAX_JSR_PRODUCTS:
            notes.append(f"product cap {MAX_JSR_PRODUCTS} reached at length {length}")
            logger.warning("JSR search stopped at length %d: product cap reached", length)
            break

        products = (survivors[:, None, :, :] @ generators[None, :, :, :]).reshape(
            -1, pair.dim, pair.dim)

    # Rounding in the eigenvalue routine can leave the cap a hair below lower
    upper = max(upper, lower)
    conclusive = bool(upper - lower <= tol * upper)
    if not conclusive:
        logger.info("JSR bracket [%.6g, %.6g] still wider than tol after length %d",
                    lower, upper, reached)

    return JsrCertificate(lower=lower, upper=float(upper), depth=reached, conclusive=conclusive,
                          products=explored, notes=tuple(notes))


def _growth_ratio(dy: np.ndarray) -> tuple[float, float]:
    if not np.all(np.isfinite(dy)):
        return np.inf, np.inf

    half = dy.size // 2
    first = float(np.max(np.abs(dy[:half])))
    second = float(np.max(np.abs(dy[half:])))
    peak = max(first, second)
    if first == 0.0:
        return (1.0 if second == 0.0 else np.inf), peak

    return second / first, peak


def explosion_probe(params: ModelParams, T: int = DEFAULT_EXPLOSION_T,
                    replications: int = DEFAULT_EXPLOSION_REPLICATIONS,
                    seed: int = DEFAULT_SEED, law: str = 'normal') -> ExplosionDiagnostics:
    """ Simulate the Tobit DGP and look for explosive difference trajectories.

    Replication r draws its innovations from stream (seed, r). A trajectory is explosive when
    max|dy| over the second half exceeds EXPLOSION_GROWTH_THRESHOLD times max|dy| over the
    first half; the model is classified explosive when more than EXPLOSION_SHARE_THRESHOLD of
    the trajectories are.

    Args:

        params:
            The model to simulate.
        T:
            Sample length, at least 4.
        replications:
            Number of trajectories, at least 1.
        seed:
            Master seed.
        law:
            Innovation law, scaled by params.sigma.

    Returns:

        ExplosionDiagnostics.
    """

    if replications < 1:
        raise InvalidInputError(f"replications must be at least 1, received {replications}")
    if T < 4:
        raise InvalidInputError(f"T must be at least 4, received {T}")

    ratios = np.empty(replications)
    peaks = np.empty(replications)
    start = params.initial_levels()[-1]

    with np.errstate(over='ignore', invalid='ignore'):
        for replication in range(replications):
            rng = replication_rng(seed, replication, STREAM_EXPLOSION_PROBE)
            u = draw_innovations(rng, T, law=law, sigma=params.sigma)
            y = simulate_tobit(params, u).y
            ratios[replication], peaks[replication] = _growth_ratio(np.diff(y, prepend=start))

    explosive_share = float(np.mean(ratios > EXPLOSION_GROWTH_THRESHOLD))
    quantiles = {q: float(np.quantile(peaks, q, method='inverted_cdf')) for q in (0.5, 0.9, 0.99)}
    median = float(np.quantile(ratios, 0.5, method='inverted_cdf'))

    notes = ()
    non_finite = int(np.sum(~np.isfinite(peaks)))
    if non_finite:
        notes = (f"{non_finite} trajectories overflowed and count as explosive",)
        logger.info("%d of %d trajectories overflowed", non_finite, replications)

    return ExplosionDiagnostics(
        T=T,
        replications=replications,
        growth_threshold=EXPLOSION_GROWTH_THRESHOLD,
        share_threshold=EXPLOSION_SHARE_THRESHOLD,
        growth_ratios=ratios,
        max_abs_dy_quantiles=quantiles,
        explosive_share=explosive_share,
        median_growth_ratio=median,
        explosive=explosive_share > EXPLOSION_SHARE_THRESHOLD,
        notes=notes,
    )
