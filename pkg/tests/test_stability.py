import math

import numpy as np
import pytest

from pytobit.model import ModelParams
from pytobit.stability import (CompanionPair, companion_pair, explosion_probe, jsr_bounds,
                               sufficient_condition)
from pytobit.util.errors import InvalidInputError

# phi(z) = (1 - z + 0.9z^2)(1 - 1.3z + 0.9z^2) = 1 - 2.3z + 3.1z^2 - 2.07z^3 + 0.81z^4
SWITCHING_EXPLOSIVE_PHI = (2.3, -3.1, 2.07, -0.81)

# Fails the sufficient condition and has JSR above one, yet stays bounded
SWITCHING_BOUNDED_PHI = (1.3, -0.8)


def test_companion_pair_two_lags():
    """
    Test the companion matrices for phi = (1.3, -0.8).
    """
    pair = companion_pair(SWITCHING_BOUNDED_PHI)

    np.testing.assert_array_equal(pair.F1, [[1.3, -0.8], [1.0, 0.0]])
    np.testing.assert_array_equal(pair.F0, [[0.0, -0.8], [0.0, 0.0]])
    assert pair.phi == SWITCHING_BOUNDED_PHI


def test_companion_pair_one_lag():
    """
    Test the 1 x 1 pair and the empty pair of an AR(1).
    """
    pair = companion_pair([0.5])
    empty = companion_pair([])

    np.testing.assert_array_equal(pair.F1, [[0.5]])
    np.testing.assert_array_equal(pair.F0, [[0.0]])
    assert empty.dim == 0


def test_companion_pair_rejects_mismatched_shapes():
    """
    Test that F0 and F1 must be square and of the same shape.
    """
    with pytest.raises(InvalidInputError):
        CompanionPair(F0=np.zeros((2, 2)), F1=np.zeros((3, 3)))

    with pytest.raises(InvalidInputError):
        CompanionPair(F0=np.zeros((2, 3)), F1=np.zeros((2, 3)))


def test_sufficient_condition():
    """
    Test sum(|phi_i|) < 1 on a few coefficient vectors.
    """
    assert sufficient_condition([0.3, -0.4])
    assert not sufficient_condition(SWITCHING_BOUNDED_PHI)
    assert sufficient_condition([])


def test_jsr_bounds_certifies_violation():
    """
    Test that the product F1 F1 F0 pushes the lower bound above one.
    """
    pair = companion_pair(SWITCHING_BOUNDED_PHI)
    product = pair.F1 @ pair.F1 @ pair.F0

    certificate = jsr_bounds(pair, depth=8)

    assert np.max(np.abs(np.linalg.eigvals(product))) == pytest.approx(1.04, abs=1e-9)
    assert certificate.lower >= 1.04 ** (1 / 3) - 1e-12
    assert certificate.violates_assumption
    assert not certificate.satisfies_assumption
    assert certificate.lower <= certificate.upper


def test_jsr_bounds_scalar_pair_is_exact():
    """
    Test that the JSR of the 1 x 1 pair {0, 0.5} is 0.5 at depth 1.
    """
    certificate = jsr_bounds(companion_pair([0.5]))

    assert certificate.lower == pytest.approx(0.5)
    assert certificate.upper == pytest.approx(0.5)
    assert certificate.depth == 1
    assert certificate.conclusive
    assert certificate.satisfies_assumption


def test_jsr_bounds_cap_from_sufficient_condition():
    """
    Test that the upper bound respects the sum(|phi|)^(1/(k-1)) cap and the lower bound the
    spectral radius of F1.
    """
    pair = companion_pair([0.3, -0.4])

    certificate = jsr_bounds(pair, depth=6)

    assert certificate.upper <= math.sqrt(0.7) + 1e-12
    assert certificate.lower >= np.max(np.abs(np.linalg.eigvals(pair.F1))) - 1e-12
    assert certificate.satisfies_assumption


def test_jsr_bounds_nilpotent_pair():
    """
    Test that zero coefficients give a JSR of exactly zero.
    """
    certificate = jsr_bounds(companion_pair([0.0, 0.0]))

    assert certificate.lower == 0.0
    assert certificate.upper == 0.0
    assert certificate.conclusive


def test_jsr_bounds_ar1():
    """
    Test that k = 1 has no difference dynamics and a JSR of zero.
    """
    certificate = jsr_bounds(companion_pair([]))

    assert (certificate.lower, certificate.upper) == (0.0, 0.0)
    assert certificate.conclusive
    assert certificate.satisfies_assumption


def test_jsr_bounds_scale():
    """
    Test that scaling both matrices by s scales both bounds by s.
    """
    pair = companion_pair(SWITCHING_BOUNDED_PHI)

    base = jsr_bounds(pair, depth=8)
    doubled = jsr_bounds(pair.scaled(2.0), depth=8)

    assert doubled.lower == pytest.approx(2.0 * base.lower, rel=1e-9)
    assert doubled.upper == pytest.approx(2.0 * base.upper, rel=1e-9)


def test_jsr_bounds_validation():
    """
    Test that depth must be positive.
    """
    with pytest.raises(InvalidInputError):
        jsr_bounds(companion_pair([0.5]), depth=0)


@pytest.mark.parametrize('m', [1, 2, 3, 4])
def test_jsr_bounds_agree_with_sufficient_condition(m):
    """
    Test on random phi with sum(|phi_i|) < 1 that the certificate is below one and below
    sum(|phi_i|)^(1/(k-1)).
    """
    rng = np.random.default_rng(700 + m)

    for _ in range(25):
        raw = rng.uniform(-1.0, 1.0, m)
        phi = raw / np.sum(np.abs(raw)) * rng.uniform(0.05, 0.95)
        total = float(np.sum(np.abs(phi)))

        certificate = jsr_bounds(companion_pair(phi), depth=6)

        assert sufficient_condition(phi)
        assert certificate.satisfies_assumption
        assert certificate.lower <= certificate.upper <= total ** (1 / m) + 1e-12


@pytest.mark.parametrize('phi', [SWITCHING_BOUNDED_PHI, (0.3, -0.4), (0.9, -0.5, 0.4)])
def test_jsr_bounds_tighten_with_depth(phi):
    """
    Test that the lower bound never falls and the upper bound never rises as the depth grows.
    """
    pair = companion_pair(phi)
    certificates = [jsr_bounds(pair, depth=depth, tol=0.0) for depth in range(1, 10)]

    for shallow, deep in zip(certificates, certificates[1:]):
        assert deep.lower >= shallow.lower - 1e-12
        assert deep.upper <= shallow.upper + 1e-12


def _unit_root_params(phi):
    return ModelParams(k=len(phi) + 1, alpha=0.0, beta=1.0, phi=phi, init=(0.0,))


def test_explosion_probe_switching_explosive():
    """
    Test that the factored coefficient polynomial whose switching dynamics are unbounded is
    classified explosive.
    """
    diagnostics = explosion_probe(_unit_root_params(SWITCHING_EXPLOSIVE_PHI), T=1000,
                                  replications=50, seed=1)

    assert diagnostics.explosive
    assert diagnostics.classification == 'explosive'
    assert diagnostics.median_growth_ratio > 10


def test_explosion_probe_bounded_despite_jsr():
    """
    Test that phi = (1.3, -0.8) stays bounded even though its JSR exceeds one.
    """
    diagnostics = explosion_probe(_unit_root_params(SWITCHING_BOUNDED_PHI), T=1000,
                                  replications=50, seed=1)

    assert not diagnostics.explosive
    assert diagnostics.classification == 'bounded'


def test_explosion_probe_stable_regime():
    """
    Test that a single small difference coefficient is bounded, and that the probe is seeded.
    """
    params = _unit_root_params((0.5,))

    first = explosion_probe(params, T=1000, replications=20, seed=5)
    second = explosion_probe(params, T=1000, replications=20, seed=5)

    assert not first.explosive
    assert first.explosive_share < 0.5
    np.testing.assert_array_equal(first.growth_ratios, second.growth_ratios)
    assert set(first.max_abs_dy_quantiles) == {0.5, 0.9, 0.99}


def test_explosion_probe_validation():
    """
    Test that replications and T are checked.
    """
    with pytest.raises(InvalidInputError):
        explosion_probe(_unit_root_params((0.5,)), replications=0)

    with pytest.raises(InvalidInputError):
        explosion_probe(_unit_root_params((0.5,)), T=3)
