import dataclasses
import math

import numpy as np
import pytest

from pytobit.model import (LocalParams, ModelParams, Series, ShiftRecord, shift_bound,
                           simulate_limited_ar, simulate_linear_ar, simulate_tobit)
from pytobit.util.errors import InvalidInputError, UnstableFilterError
from pytobit.util.rng import draw_innovations, replication_rng


def test_simulate_tobit_censors_at_zero():
    """
    Test that a random walk from zero is held at the bound whenever its argument goes negative,
    and that the negative parts are recorded.
    """
    params = ModelParams(k=1, alpha=0.0, beta=1.0, init=(0.0,))

    result = simulate_tobit(params, [-1.0, 2.0, -3.0, 1.0])

    assert list(result.y) == [0.0, 2.0, 0.0, 1.0]
    assert list(result.y_minus) == [-1.0, 0.0, -1.0, 0.0]
    assert not result.flat_start


def test_simulate_tobit_matches_linear_when_bound_never_binds():
    """
    Test that the censored and linear recursions agree when every argument is positive.
    """
    params = ModelParams(k=1, alpha=0.0, beta=1.0, init=(1.0,))

    result = simulate_tobit(params, [1.0, 2.0])

    assert list(result.y) == [2.0, 4.0]
    assert list(result.y_minus) == [0.0, 0.0]
    assert list(simulate_linear_ar(params, [1.0, 2.0])) == [2.0, 4.0]


def test_simulate_tobit_with_difference_lag():
    """
    Test the k = 2 recursion with one binding step.
    """
    params = ModelParams(k=2, alpha=0.0, beta=1.0, phi=(0.5,), init=(0.0, 0.0))

    result = simulate_tobit(params, [1.0, -2.0, 1.0])

    np.testing.assert_allclose(result.y, [1.0, 0.0, 0.5])


def test_simulate_tobit_flat_start():
    """
    Test that a single initial level for k = 3 is padded into a flat pre-sample.
    """
    params = ModelParams(k=3, phi=(0.2, 0.1), init=(2.0,))

    assert params.flat_start
    assert list(params.initial_levels()) == [2.0, 2.0, 2.0]
    assert simulate_tobit(params, [0.0, 0.0]).flat_start


def test_simulate_tobit_nonzero_bound_is_shifted_run():
    """
    Test that a run with bound L equals L plus the run of the shifted parameters with bound 0.
    """
    u = draw_innovations(replication_rng(11, 0), 200)
    params = ModelParams(k=2, alpha=0.05, beta=0.98, phi=(0.3,), lower_bound=1.2,
                         init=(1.5, 1.4))

    bounded = simulate_tobit(params, u)
    shifted = simulate_tobit(params.shifted(), u)

    np.testing.assert_array_equal(bounded.y, shifted.y + 1.2)
    assert np.all(bounded.y >= 1.2)


def test_simulate_tobit_is_deterministic():
    """
    Test that the same parameters and innovations give identical paths.
    """
    u = draw_innovations(replication_rng(3, 7), 500)
    params = ModelParams(k=1, alpha=0.01, beta=1.0, init=(0.5,))

    np.testing.assert_array_equal(simulate_tobit(params, u).y, simulate_tobit(params, u).y)


def test_simulate_tobit_rejects_bad_innovations():
    """
    Test that empty or non-finite innovations raise.
    """
    params = ModelParams()

    with pytest.raises(ValueError):
        simulate_tobit(params, [])

    with pytest.raises(ValueError):
        simulate_tobit(params, [1.0, math.nan])


def test_model_params_validation():
    """
    Test that ModelParams refuses wrong phi lengths, negative sigma and levels below the bound.
    """
    with pytest.raises(InvalidInputError):
        ModelParams(k=2, phi=())

    with pytest.raises(InvalidInputError):
        ModelParams(sigma=-1.0)

    with pytest.raises(InvalidInputError):
        ModelParams(lower_bound=1.0, init=(0.5,))

    with pytest.raises(InvalidInputError):
        ModelParams(k=0)


def test_simulate_linear_ar():
    """
    Test the uncensored recursion: a cumulative sum, and mean reversion to alpha when beta = 0.
    """
    walk = ModelParams(k=1, alpha=0.0, beta=1.0, init=(0.0,))
    reverting = ModelParams(k=1, alpha=1.0, beta=0.0, init=(5.0,))

    assert list(simulate_linear_ar(walk, [-1.0, 2.0, -3.0])) == [-1.0, 1.0, -2.0]
    assert list(simulate_linear_ar(reverting, [0.0, 0.0])) == [1.0, 1.0]


def test_simulate_limited_ar():
    """
    Test the limited autoregressive process against direct evaluation.
    """
    np.testing.assert_allclose(simulate_limited_ar([0.0], 0.0, 2, [-1.0, 2.0]), [0.0, 2.0])
    np.testing.assert_allclose(simulate_limited_ar([0.5], 0.0, 2, [1.0, 0.0]), [1.0, 1.5])


def test_simulate_limited_ar_without_filter_is_tobit_walk():
    """
    Test that with no filter and c = 0 the limited process is the Tobit AR(1) from zero.
    """
    u = draw_innovations(replication_rng(5, 0), 300)
    tobit = simulate_tobit(ModelParams(k=1, alpha=0.0, beta=1.0, init=(0.0,)), u)

    np.testing.assert_array_equal(simulate_limited_ar([], 0.0, 300, u), tobit.y)


def test_simulate_limited_ar_rejects_unstable_filter():
    """
    Test that a filter with sum |phi_i| >= 1 is refused, and that T must match the innovations.
    """
    with pytest.raises(UnstableFilterError):
        simulate_limited_ar([0.6, -0.5], 0.0, 2, [1.0, 1.0])

    with pytest.raises(InvalidInputError):
        simulate_limited_ar([0.1], 0.0, 3, [1.0, 1.0])


def test_shift_bound():
    """
    Test that shifting subtracts the bound and records ell = L/sqrt(T).
    """
    series = Series(values=[1.25, 1.20, 1.22], lower_bound=1.20)

    shifted, record = shift_bound(series)

    np.testing.assert_allclose(shifted.values, [0.05, 0.0, 0.02], atol=1e-12)
    assert shifted.lower_bound == 0.0
    assert record.ell == pytest.approx(1.20 / math.sqrt(3))


def test_shift_bound_zero_is_identity():
    """
    Test that a zero bound leaves the series unchanged.
    """
    series = Series(values=[0.0, 1.5, 0.0], dates=('2020-01-01', '2020-01-02', '2020-01-03'))

    shifted, record = shift_bound(series)

    np.testing.assert_array_equal(shifted.values, series.values)
    assert shifted.dates == series.dates
    assert record.ell == 0.0


def test_shift_record_maps_local_parameters():
    """
    Test a_tilde = a + c*ell and b0_tilde = b0 - ell.
    """
    record = ShiftRecord(lower_bound=2.0, T=100)

    assert record.ell == pytest.approx(0.2)
    assert record.drift(a=1.0, c=-5.0) == pytest.approx(0.0)
    assert record.initial(b0=0.5) == pytest.approx(0.3)


def test_local_params():
    """
    Test the local-to-unity mapping, in both beta forms.
    """
    local = LocalParams(a=2.0, c=-5.0, b0=0.5, T=100)

    assert local.alpha() == pytest.approx(0.2)
    assert local.beta('exp') == pytest.approx(math.exp(-0.05))
    assert local.beta('linear') == pytest.approx(0.95)
    assert local.y0(lower_bound=1.0) == pytest.approx(6.0)

    params = local.to_model_params(k=2, phi=(0.1,), lower_bound=1.0, beta_form='linear')
    assert params.init == (6.0, 6.0)
    assert params.beta == pytest.approx(0.95)

    with pytest.raises(InvalidInputError):
        local.beta('quadratic')

    with pytest.raises(InvalidInputError):
        LocalParams(b0=-1.0)


def test_series_validation():
    """
    Test that a Series needs values, and as many dates as values.
    """
    with pytest.raises(InvalidInputError):
        Series(values=[])

    with pytest.raises(InvalidInputError):
        Series(values=[1.0, 2.0], dates=('2020-01-01',))

    assert len(Series(values=[1.0, 2.0, 3.0])) == 3


def _random_params(rng: np.random.Generator, k: int) -> ModelParams:
    phi = tuple(rng.uniform(-0.4, 0.4, k - 1) / max(k - 1, 1))
    return ModelParams(k=k, alpha=rng.uniform(-0.5, 0.5), beta=rng.uniform(0.9, 1.02), phi=phi,
                       init=tuple(rng.uniform(0.0, 3.0, k)))


@pytest.mark.parametrize('k', [1, 2, 3])
def test_censoring_identities(k):
    """
    Test on random models that y >= 0, y_minus <= 0, y * y_minus = 0, and that y equals the
    uncensored argument minus y_minus.
    """
    rng = replication_rng(500 + k, 0)

    for _ in range(334):
        params = _random_params(rng, k)
        u = rng.standard_normal(80)
        result = simulate_tobit(params, u)

        levels = np.concatenate([params.initial_levels(), result.y])
        argument = np.empty(u.size)
        for t in range(u.size):
            s = t + k
            diffs = [levels[s - i] - levels[s - i - 1] for i in range(1, k)]
            argument[t] = (params.alpha + params.beta * levels[s - 1]
                           + float(np.dot(params.phi, diffs)) + u[t])

        assert np.all(result.y >= 0.0)
        assert np.all(result.y_minus <= 0.0)
        assert np.all(result.y * result.y_minus == 0.0)
        np.testing.assert_allclose(result.y, argument - result.y_minus, rtol=0, atol=1e-10)


def test_running_max_identity():
    """
    Test that a censored walk equals its free walk x_t plus the running maximum of [-x_s]_+, and
    that the cumulated negative parts are that running maximum.
    """
    rng = replication_rng(510, 0)

    for _ in range(1000):
        alpha, y0 = rng.uniform(-0.3, 0.3), rng.uniform(0.0, 2.0)
        u = rng.standard_normal(100)
        result = simulate_tobit(ModelParams(k=1, alpha=alpha, beta=1.0, init=(y0,)), u)

        free = y0 + np.cumsum(alpha + u)
        regulator = np.maximum.accumulate(np.maximum(-free, 0.0))

        np.testing.assert_allclose(result.y, free + regulator, rtol=0, atol=1e-10)
        np.testing.assert_allclose(np.cumsum(-result.y_minus), regulator, rtol=0, atol=1e-10)


def test_bound_shift_equivariance():
    """
    Test on random models that the run with bound L matches y_t = max(L, argument) evaluated
    directly on the original scale.
    """
    rng = replication_rng(520, 0)

    for _ in range(1000):
        k = int(rng.integers(1, 4))
        base = _random_params(rng, k)
        bound = rng.uniform(-2.0, 2.0)
        params = dataclasses.replace(base, lower_bound=bound,
                                     init=tuple(v + bound for v in base.init))
        u = rng.standard_normal(60)

        levels = list(params.initial_levels())
        for t in range(u.size):
            diffs = [levels[-i] - levels[-i - 1] for i in range(1, k)]
            argument = (params.alpha + params.beta * levels[-1]
                        + float(np.dot(params.phi, diffs)) + u[t])
            levels.append(max(bound, argument))

        np.testing.assert_allclose(simulate_tobit(params, u).y, levels[k:], rtol=0, atol=1e-9)
